"""Adaptive Dormand-Prince 5(4) integrator with a step-rejection hook.

scipy's ``solve_ivp`` has no way to veto a step whose result violates a
physical constraint (negative populations), so the master equation and the
geodesic both use this small stepper instead.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConvergenceError

# Dormand-Prince tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)
_E = _B5 - _B4

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


def dopri_step(fun, t, y, h, k1=None):
    """One Dormand-Prince step. Returns (y5, error_vector, f(t+h, y5))."""
    k = np.empty((7,) + np.shape(y), dtype=np.result_type(y, float))
    k[0] = fun(t, y) if k1 is None else k1
    for i in range(1, 7):
        dy = sum(a * k[j] for j, a in enumerate(_A[i]) if a != 0.0)
        k[i] = fun(t + _C[i] * h, y + h * dy)
    y5 = y + h * np.tensordot(_B5, k, axes=1)
    err = h * np.tensordot(_E, k, axes=1)
    return y5, err, k[6]


@dataclass
class ODEResult:
    t: np.ndarray
    y: np.ndarray
    n_accepted: int = 0
    n_rejected: int = 0
    truncated: bool = False
    message: str = "ok"
    extra: dict = field(default_factory=dict)


def solve(
    fun: Callable,
    t0: float,
    t1: float,
    y0,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    h0: float | None = None,
    max_step: float = np.inf,
    max_steps: int = 1_000_000,
    reject: Callable[[float, np.ndarray], bool] | None = None,
    stops=None,
) -> ODEResult:
    """Integrate y' = fun(t, y) from t0 to t1 (either direction).

    Every accepted step is recorded unless ``stops`` is given, in which case
    only the values at those times (hit exactly) are recorded, plus t0.
    ``reject(t, y)`` returning True forces the step to be retried with half
    the step size. Running out of ``max_steps`` returns what was computed
    with ``truncated=True`` rather than raising.
    """
    y = np.array(y0, dtype=float)
    direction = 1.0 if t1 >= t0 else -1.0
    span = abs(t1 - t0)
    ts, ys = [t0], [y.copy()]
    if span == 0.0:
        return ODEResult(np.array(ts), np.array(ys))

    if stops is not None:
        stops = sorted(set(float(s) for s in stops), key=lambda s: direction * s)
        stops = [s for s in stops if 0 < direction * (s - t0) <= span]
        if not stops or stops[-1] != t1:
            stops.append(t1)
    stop_iter = iter(stops) if stops is not None else None
    next_stop = next(stop_iter) if stop_iter is not None else t1

    t = t0
    f = fun(t, y)
    if h0 is None:
        scale = atol + rtol * np.abs(y)
        d0 = np.sqrt(np.mean((y / scale) ** 2))
        d1 = np.sqrt(np.mean((f / scale) ** 2))
        h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h = min(abs(h0), max_step, span)
    n_acc = n_rej = 0

    while direction * (t1 - t) > 0:
        if n_acc + n_rej >= max_steps:
            return ODEResult(np.array(ts), np.array(ys), n_acc, n_rej, True,
                             f"step budget {max_steps} exhausted at t={t!r}")
        remaining = abs(next_stop - t)
        hit_stop = h >= remaining
        step = remaining if hit_stop else h
        if step < 1e-14 * max(1.0, abs(t)):
            raise ConvergenceError(f"step size underflow at t={t!r}")

        y_new, err, f_new = dopri_step(fun, t, y, direction * step, f)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err_norm = float(np.sqrt(np.mean((err / scale) ** 2)))
        t_new = next_stop if hit_stop else t + direction * step

        if err_norm > 1.0 or not np.all(np.isfinite(y_new)):
            n_rej += 1
            factor = _SAFETY * err_norm ** -0.2 if np.isfinite(err_norm) else _MIN_FACTOR
            h = step * max(_MIN_FACTOR, factor)
            continue
        if reject is not None and reject(t_new, y_new):
            n_rej += 1
            h = 0.5 * step
            continue

        n_acc += 1
        t, y, f = t_new, y_new, f_new
        if stop_iter is None:
            ts.append(t)
            ys.append(y.copy())
        elif hit_stop:
            ts.append(t)
            ys.append(y.copy())
            next_stop = next(stop_iter, t1)
        # a step shortened to land on a stop keeps the previous proposal
        if not (hit_stop and step < h):
            factor = _MAX_FACTOR if err_norm == 0 else _SAFETY * err_norm ** -0.2
            h = step * min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
        h = min(h, max_step)

    return ODEResult(np.array(ts), np.array(ys), n_acc, n_rej)
