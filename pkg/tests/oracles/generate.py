"""Regenerate the frozen reference values in ``tests/reference.py`` with mpmath.

Independent of the package: the excitation integral is evaluated on the
rotated contour x = -i s, where e^{-ix} becomes e^{-s} and the integrand is
smooth and absolutely convergent, so no regulator or extrapolation is
involved. Run with ``python tests/oracles/generate.py`` (takes ~1 minute).
"""
import mpmath as mp

mp.mp.dps = 40


def phi(x, omega):
    c = mp.cbrt(1 + mp.mpf(3) / 2 * x / omega)
    return x / omega + c**2 + 2 * c + 2 * mp.log(c - 1)


def p_exc(omega, nu, sign=1):
    omega, nu = mp.mpf(omega), mp.mpf(nu)

    def f(s):
        x = -1j * s
        return mp.exp(-1j * sign * nu * phi(x, omega)) * mp.exp(-s)

    val = -1j * mp.quad(f, [0, mp.mpf("1e-6"), 1, 10, 50, mp.inf])
    return abs(val) ** 2 / omega**2


def closed(omega, nu):
    omega, nu = mp.mpf(omega), mp.mpf(nu)
    return 4 * mp.pi * nu / (omega**2 * (1 + 2 * nu / omega) ** 2 * mp.expm1(4 * mp.pi * nu))


def solar():
    G, c, hbar, kB = (mp.mpf("6.67430e-11"), mp.mpf(299792458), mp.mpf("1.054571817e-34"),
                      mp.mpf("1.380649e-23"))
    M = mp.mpf("1.98892e30")
    return hbar * c**3 / (8 * mp.pi * kB * G * M), 16 * mp.pi * G**2 * M**2 / c**4


if __name__ == "__main__":
    T, A = solar()
    print("T_SUN =", mp.nstr(T, 20))
    print("A_SUN =", mp.nstr(A, 20))
    print("CLOSED_100_1 =", mp.nstr(closed(100, 1), 19))
    for w in (50, 100, 200):
        for nu in ("0.1", "0.5", "1.0"):
            print(f"P_EXC[{w}, {nu}] =", mp.nstr(p_exc(w, nu), 16))
    print("P_EXC[100, 0.25] =", mp.nstr(p_exc(100, "0.25"), 16))
    print("P_ABS[100, 0.25] =", mp.nstr(p_exc(100, "0.25", -1), 16))
