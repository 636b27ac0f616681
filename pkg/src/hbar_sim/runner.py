"""Scenario orchestration and deterministic CSV/JSON emission.

Work is split per (omega, nu) item and run on a bounded thread pool; the
report is assembled after sorting by (omega, nu), so output never depends
on scheduling. All physics is done in dimensionless units and converted to
the scenario's unit system only when rows are written.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import ScenarioConfig
from .constants import CODATA2018, CONSTANTS_VERSION
from .entropy import AreaLaw, FluxLedger, FluxMode, area_rate_and_entropy_law, mass_budget
from .errors import ConvergenceError, DomainError
from .excitation import (AtomSpec, ModeSpec, absorption_probability,
                         excitation_probability_closed_form,
                         excitation_probability_numeric)
from .geometry import BlackHole
from .master_equation import (FockPopulations, evolve, hawking_temperature_equivalence,
                              mode_rates, steady_state)
from .special import planck_weight
from .trajectory import InfallTrajectory, integrate_geodesic

SCHEMA_VERSION = "v1"
PARTS = ("excite", "evolve", "entropy")
SUBCOMMANDS = ("trajectory", "excite", "evolve", "entropy", "report")

EXCITE_COLUMNS = ("omega", "nu", "xi", "P_exc_numeric", "P_exc_err", "P_exc_closed",
                  "P_abs_closed", "rel_diff")
EVOLVE_COLUMNS = ("t", "n_mean", "S_over_kB", "residual", "total_prob")
STEADY_COLUMNS = ("n", "p_n")
ENTROPY_COLUMNS = ("omega", "nu", "n_dot", "S_dot_p", "A_dot_p", "S_dot_from_area")
TRAJECTORY_COLUMNS = ("r", "tau", "t", "r_star")

NAN = float("nan")


@dataclass
class ModeResult:
    """Everything computed for one (omega, nu) item, in dimensionless units."""

    omega: float
    nu: float
    status: str = "ok"
    P_exc_numeric: float = NAN
    P_exc_err: float = NAN
    P_exc_converged: bool = False
    P_exc_closed: float = NAN
    P_abs_closed: float = NAN
    rel_diff: float = NAN
    asymptotic: bool = True
    gamma_e: float = NAN
    gamma_a: float = NAN
    kappa: float = 0.0
    rate_identity: float = NAN
    temperature_ratio: float = NAN
    steady: FockPopulations | None = None
    evolution: object = None
    steady_linf: float = NAN
    detailed_balance: float = NAN
    n_dot: float = NAN

    @property
    def xi(self) -> float:
        return 2.0 * math.pi * self.nu

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass
class Check:
    value: float
    bound: float

    @property
    def passed(self) -> bool:
        return math.isfinite(self.value) and self.value <= self.bound


@dataclass
class RunReport:
    config: ScenarioConfig
    parts: tuple
    modes: list = field(default_factory=list)
    geodesic: object = None
    entropy_modes: list = field(default_factory=list)   # (ModeResult, AreaLaw)
    entropy_totals: dict = field(default_factory=dict)  # omega -> (AreaLaw, MassBudget)
    checks: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    wall_clock: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def failed_checks(self):
        return sorted(name for name, c in self.checks.items() if not c.passed)


# -- per-mode work ---------------------------------------------------------


def _geometric_oracle(k, n_max):
    q = k.gamma_e / (k.gamma_a + k.kappa)
    return (1.0 - q) * q ** np.arange(n_max + 1)


def _detailed_balance(p, k):
    n = np.arange(1, p.size, dtype=float)
    up = k.gamma_e * n * p[:-1]
    down = (k.gamma_a + k.kappa) * n * p[1:]
    return float(np.max(np.abs(up - down)) / np.max(up))


def _mode_work(cfg: ScenarioConfig, omega: float, nu: float, parts, closed) -> ModeResult:
    res = ModeResult(omega, nu)
    res.P_exc_closed, res.P_abs_closed = closed
    try:
        atom = AtomSpec(omega)
        mode = ModeSpec(nu, cfg.modes.ell, cfg.coupling())
        res.asymptotic = atom.asymptotic_regime(nu)
        if "excite" in parts:
            p = excitation_probability_numeric(atom, mode, cfg.quadrature)
            res.P_exc_numeric, res.P_exc_err, res.P_exc_converged = p.value, p.error, p.converged
            res.rel_diff = abs(p.value - res.P_exc_closed) / res.P_exc_closed
        if "evolve" in parts or "entropy" in parts:
            _kinetics(cfg, res, atom, mode, parts)
    except (DomainError, ConvergenceError, ArithmeticError) as exc:
        res.status = f"error: omega={omega!r} nu={nu!r}: {exc}"
    return res


def _kinetics(cfg, res, atom, mode, parts):
    ev = cfg.evolution
    r = cfg.injection_rate()
    k = mode_rates(atom, mode, r)
    kappa = cfg.units.to_internal(ev.kappa_leak, "rate") + ev.kappa_ratio * k.gamma_a
    k = k.with_leak(kappa)
    res.gamma_e, res.gamma_a, res.kappa = k.gamma_e, k.gamma_a, kappa
    res.rate_identity = max(abs(k.gamma_e - r * _closed_simplified(atom, mode, +1)) / k.gamma_e,
                            abs(k.gamma_a - r * _closed_simplified(atom, mode, -1)) / k.gamma_a)
    res.temperature_ratio = abs(hawking_temperature_equivalence(mode, _ledger_hole(cfg)) - 1.0)
    xi_eff = 0.5 * math.log((k.gamma_a + kappa) / k.gamma_e)
    res.steady = steady_state(xi_eff, ev.steady_tail_tol)
    if "evolve" in parts and ev.enabled:
        t_final = (cfg.units.to_internal(ev.t_final, "time") if ev.t_final is not None
                   else ev.relaxation_times / k.relaxation_rate)
        evo = evolve(FockPopulations.vacuum(), k, t_final, rtol=ev.rtol, atol=ev.atol,
                     tail_tol=ev.tail_tol, n_samples=ev.samples)
        final = evo.final.p
        res.evolution = evo
        res.steady_linf = float(np.max(np.abs(final - _geometric_oracle(k, final.size - 1))))
        res.detailed_balance = _detailed_balance(final, k)
    if "entropy" in parts:
        if cfg.entropy.n_dot is not None:
            idx = cfg.nus().index(mode.nu)
            res.n_dot = cfg.units.to_internal(cfg.entropy.n_dot[idx], "rate")
        else:
            kf = kappa if kappa > 0 else cfg.entropy.flux_kappa_ratio * k.gamma_a
            res.n_dot = kf * k.with_leak(kf).mean_steady


def _closed_simplified(atom, mode, sign):
    # omega >> nu closed form (g/omega)^2 4 pi nu / (e^{4 pi nu} - 1), nu -> -nu for absorption
    return (mode.g / atom.omega) ** 2 * planck_weight(sign * mode.nu)


def _ledger_hole(cfg: ScenarioConfig) -> BlackHole:
    if cfg.si:
        return BlackHole(cfg.mass_kg, CODATA2018)
    return BlackHole.dimensionless(cfg.black_hole.mass)


# -- orchestration ---------------------------------------------------------


def run_scenario(cfg: ScenarioConfig, parts=PARTS, trajectory: bool = False) -> RunReport:
    """Run the requested parts of the pipeline and evaluate the global checks.

    ``parts`` is a subset of ("excite", "evolve", "entropy"); ``trajectory``
    adds the geodesic integration.
    """
    start = time.perf_counter()
    parts = tuple(p for p in PARTS if p in parts)
    report = RunReport(cfg, parts)
    items = [(w, nu) for w in cfg.omegas() for nu in cfg.nus()]

    closed = {}
    for w, nu in items:
        atom, mode = AtomSpec(w), ModeSpec(nu, cfg.modes.ell, cfg.coupling())
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            pe = excitation_probability_closed_form(atom, mode)
            pa = (absorption_probability(atom, mode, "closed") if 2.0 * nu < w else NAN)
        closed[w, nu] = (pe, pa)

    def work(item):
        return _mode_work(cfg, item[0], item[1], parts, closed[item])

    if parts:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            report.modes = sorted(pool.map(work, items), key=lambda m: (m.omega, m.nu))

    if "entropy" in parts:
        _entropy_ledger(report)
    if trajectory:
        t = cfg.trajectory
        report.geodesic = integrate_geodesic(t.r_start, t.r_end, t.tol)

    _checks(report)
    report.provenance = {
        "config_hash": cfg.digest(),
        "constants_version": CONSTANTS_VERSION,
        "artifact_version": __version__,
        "schema_version": SCHEMA_VERSION,
    }
    report.wall_clock = time.perf_counter() - start
    return report


def _entropy_ledger(report: RunReport):
    cfg = report.config
    bh = _ledger_hole(cfg)
    scale = bh.constants.c / bh.r_g  # dimensionless frequency/rate -> ledger units
    for w in cfg.omegas():
        rows = [m for m in report.modes if m.omega == w and m.ok]
        flux = []
        for m in rows:
            fm = FluxMode(m.nu * scale, m.n_dot * scale)
            law = area_rate_and_entropy_law(FluxLedger((fm,), bh))
            # von Neumann route: 2 xi k_B per photon leaving a thermal mode
            law = AreaLaw(law.m_dot_p, law.A_dot_p,
                          2.0 * m.xi * bh.constants.k_B * fm.n_dot, law.S_dot_from_area)
            report.entropy_modes.append((m, law))
            flux.append((fm, m))
        ledger = FluxLedger(tuple(fm for fm, _ in flux), bh)
        total = area_rate_and_entropy_law(ledger)
        total = AreaLaw(total.m_dot_p, total.A_dot_p,
                        bh.constants.k_B * math.fsum(2.0 * m.xi * fm.n_dot for fm, m in flux),
                        total.S_dot_from_area)
        # m_dot_atom is in the ledger's units (kg/s, or geometric units)
        report.entropy_totals[w] = (total, mass_budget(cfg.entropy.m_dot_atom, ledger))


def _checks(report: RunReport):
    cfg, ch, modes = report.config, report.config.checks, report.modes

    def worst(values):
        vals = list(values)
        if not vals:
            return 0.0
        return NAN if any(not math.isfinite(v) for v in vals) else max(vals)

    checks = {}
    if modes:
        checks["modes_ok"] = Check(float(sum(not m.ok for m in modes)), 0.0)
    if "excite" in report.parts:
        checks["max_rel_diff"] = Check(worst(m.rel_diff for m in modes), ch.max_rel_diff)
    if "evolve" in report.parts or "entropy" in report.parts:
        checks["rate_identity"] = Check(worst(m.rate_identity for m in modes), 1e-12)
        checks["temperature_equivalence"] = Check(
            worst(m.temperature_ratio for m in modes), 1e-12)
    if "evolve" in report.parts and cfg.evolution.enabled:
        checks["steady_linf_max"] = Check(worst(m.steady_linf for m in modes), ch.steady_linf)
        checks["detailed_balance_max"] = Check(
            worst(m.detailed_balance for m in modes), ch.detailed_balance)
    if "entropy" in report.parts:
        per_mode = [law.residual for _, law in report.entropy_modes]
        totals = [t.residual for t, _ in report.entropy_totals.values()]
        checks["area_law_residual_max"] = Check(worst(per_mode + totals), ch.area_law_rtol)
    if report.geodesic is not None:
        g = report.geodesic
        checks["geodesic_residual"] = Check(
            NAN if g.truncated else max(g.tau_residual, g.t_residual), ch.geodesic_residual)
    report.checks = checks


# -- formatting and atomic writes ------------------------------------------


def format_float(x, precision: int = 17) -> str:
    """Shortest round-trip text at precision >= 17, else %.{precision}g."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if precision >= 17:
        return repr(x)
    return format(x, f".{precision}g")


def _json_value(x, precision):
    if isinstance(x, dict):
        return {k: _json_value(v, precision) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_value(v, precision) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return None
        return x if precision >= 17 else float(format(x, f".{precision}g"))
    if isinstance(x, np.integer):
        return int(x)
    return x


def write_atomic(path: Path, text: str):
    """Write via a temporary file in the same directory and rename it into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def csv_text(name: str, columns, rows, precision: int = 17, comments=()) -> str:
    lines = [f"# schema: hbar-sim/{name} {SCHEMA_VERSION}"]
    lines += [f"# {c}" for c in comments]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else format_float(v, precision)
                              for v in row))
    return "\n".join(lines) + "\n"


def json_text(obj, precision: int = 17) -> str:
    return json.dumps(_json_value(obj, precision), sort_keys=True, indent=2,
                      allow_nan=False) + "\n"


# -- tables ----------------------------------------------------------------


def excite_rows(report: RunReport):
    for m in report.modes:
        yield (_user(report, m.omega, "frequency"), _user(report, m.nu, "frequency"), m.xi,
               m.P_exc_numeric, m.P_exc_err, m.P_exc_closed, m.P_abs_closed, m.rel_diff)


def _user(report, value, kind):
    return report.config.units.to_user(value, kind)


def evolve_rows(report: RunReport, m: ModeResult):
    evo = m.evolution
    for t, n, s, res, tot in zip(evo.t, evo.n_mean(), evo.entropy(), evo.residual(),
                                 evo.total_prob()):
        yield (_user(report, t, "time"), n, s, _user(report, res, "rate"), tot)


def entropy_rows(report: RunReport):
    bh = _ledger_hole(report.config)
    scale = bh.constants.c / bh.r_g
    for m, law in report.entropy_modes:
        yield (_user(report, m.omega, "frequency"), m.nu * scale, m.n_dot * scale,
               law.S_dot_p, law.A_dot_p, law.S_dot_from_area)


def trajectory_rows(report: RunReport):
    t = report.config.trajectory
    traj = InfallTrajectory()
    # uniform in ln(r - 1) so the near-horizon approach is resolved
    r = 1.0 + np.exp(np.linspace(math.log(t.r_start - 1.0), math.log(t.r_end - 1.0),
                                 t.samples))
    r[0], r[-1] = t.r_start, t.r_end
    for row in traj.sample(r):
        yield (_user(report, row[0], "length"), _user(report, row[1], "time"),
               _user(report, row[2], "time"), _user(report, row[3], "length"))


def _mode_summary(m: ModeResult) -> dict:
    out = {
        "omega": m.omega, "nu": m.nu, "xi": m.xi, "status": m.status,
        "asymptotic_regime": m.asymptotic,
    }
    if not math.isnan(m.P_exc_numeric):
        out.update(P_exc_numeric=m.P_exc_numeric, P_exc_err=m.P_exc_err,
                   P_exc_converged=m.P_exc_converged, rel_diff=m.rel_diff)
    out.update(P_exc_closed=m.P_exc_closed, P_abs_closed=m.P_abs_closed)
    if not math.isnan(m.gamma_e):
        out.update(gamma_e=m.gamma_e, gamma_a=m.gamma_a, kappa=m.kappa,
                   rate_identity_residual=m.rate_identity,
                   temperature_equivalence_residual=m.temperature_ratio,
                   steady_levels=m.steady.n_max + 1, steady_mean=m.steady.mean(),
                   steady_entropy=m.steady.entropy())
    if m.evolution is not None:
        out.update(steady_linf=m.steady_linf, detailed_balance_residual=m.detailed_balance,
                   t_final=float(m.evolution.t[-1]), n_regrowths=m.evolution.n_regrowths,
                   leaked_photons=float(m.evolution.leaked_photons[-1]))
    if not math.isnan(m.n_dot):
        out["n_dot"] = m.n_dot
    return out


def _law_dict(law: AreaLaw) -> dict:
    return {"m_dot_p": law.m_dot_p, "A_dot_p": law.A_dot_p, "S_dot_p": law.S_dot_p,
            "S_dot_from_area": law.S_dot_from_area, "residual": law.residual}


def report_dict(report: RunReport) -> dict:
    """JSON-ready report (no wall-clock time, so it is reproducible byte for byte)."""
    cfg = report.config
    out = {
        "provenance": dict(report.provenance),
        "units": cfg.black_hole.units,
        "parts": list(report.parts),
        "checks": {name: {"value": c.value, "bound": c.bound, "passed": c.passed}
                   for name, c in sorted(report.checks.items())},
        "passed": report.passed,
        "modes": [_mode_summary(m) for m in report.modes],
    }
    if "entropy" in report.parts:
        bh = _ledger_hole(cfg)
        scale = bh.constants.c / bh.r_g
        out["entropy"] = {
            "per_mode": [dict(_law_dict(law), omega=_user(report, m.omega, "frequency"),
                              nu=m.nu * scale, n_dot=m.n_dot * scale)
                         for m, law in report.entropy_modes],
            "totals": [dict(_law_dict(total), omega=_user(report, w, "frequency"),
                            M_dot=budget.M_dot, A_dot_total=budget.A_dot_total,
                            A_dot_atom=budget.A_dot_atom)
                       for w, (total, budget) in sorted(report.entropy_totals.items())],
        }
    if report.geodesic is not None:
        g = report.geodesic
        out["trajectory"] = {"r_start": cfg.trajectory.r_start, "r_end": cfg.trajectory.r_end,
                             "tol": cfg.trajectory.tol, "tau_residual": g.tau_residual,
                             "t_residual": g.t_residual, "truncated": g.truncated,
                             "steps": int(g.r.size - 1), "message": g.message}
    return out


def emit_outputs(report: RunReport, cfg: ScenarioConfig | None = None, subcommand="report",
                 directory=None):
    """Write the files for ``subcommand`` and return their paths (sorted).

    CSV carries a schema header comment; JSON is sorted and indented. Each
    file is written atomically, so a failed run never leaves partial files.
    """
    cfg = report.config if cfg is None else cfg
    if subcommand not in SUBCOMMANDS:
        raise ValueError(f"unknown subcommand {subcommand!r}")
    out_dir = Path(cfg.outputs.directory if directory is None else directory)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"{out_dir}: cannot create output directory ({exc.strerror})") from exc
    prec = cfg.outputs.precision
    csv_on, json_on = "csv" in cfg.outputs.formats, "json" in cfg.outputs.formats
    files = {}
    full = subcommand == "report"
    unit_note = f"units: {cfg.black_hole.units}"

    if subcommand == "trajectory" or (full and report.geodesic is not None):
        if csv_on:
            files["trajectory.csv"] = csv_text("trajectory", TRAJECTORY_COLUMNS,
                                               trajectory_rows(report), prec, [unit_note])
    if (subcommand == "excite" or full) and "excite" in report.parts:
        if csv_on:
            files["excite.csv"] = csv_text("excite", EXCITE_COLUMNS, excite_rows(report),
                                           prec, [unit_note])
    if (subcommand == "evolve" or full) and "evolve" in report.parts:
        for i, m in enumerate(report.modes):
            if not csv_on or m.steady is None:
                continue
            note = [unit_note, f"omega={format_float(_user(report, m.omega, 'frequency'))} "
                               f"nu={format_float(_user(report, m.nu, 'frequency'))} "
                               f"xi={format_float(m.xi)}"]
            if m.evolution is not None:
                files[f"evolve_{i:03d}.csv"] = csv_text("evolve", EVOLVE_COLUMNS,
                                                        evolve_rows(report, m), prec, note)
            files[f"steady_{i:03d}.csv"] = csv_text(
                "steady", STEADY_COLUMNS,
                ((str(n), p) for n, p in enumerate(m.steady.p)), prec, note)
    if (subcommand == "entropy" or full) and "entropy" in report.parts:
        if csv_on:
            files["entropy.csv"] = csv_text("entropy", ENTROPY_COLUMNS, entropy_rows(report),
                                            prec, [unit_note])
    if json_on:
        data = report_dict(report)
        files[f"{subcommand}.json"] = json_text(data, prec)

    paths = []
    for name in sorted(files):
        path = out_dir / name
        try:
            write_atomic(path, files[name])
        except OSError as exc:
            raise OSError(f"{path}: write failed ({exc.strerror or exc})") from exc
        paths.append(path)
    return paths
