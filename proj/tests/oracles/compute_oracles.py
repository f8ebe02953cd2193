"""Reference values frozen into the C++ unit tests.

Independent of the C++ code: mpmath quadrature/series and exact rational
enumeration. Run with `python3 tests/oracles/compute_oracles.py`.
"""
from fractions import Fraction
from itertools import product

import mpmath as mp

mp.mp.dps = 40


def tube_series(a, b, x, t):
    L = b - a
    total = mp.mpf(0)
    for k in range(1, 400, 2):
        total += 4 / (k * mp.pi) * mp.sin(k * mp.pi * (x - a) / L) * mp.exp(-k * k * mp.pi**2 * t / (2 * L * L))
    return total


def gaussian_abs_moment(mean, var, lam):
    sd = mp.sqrt(var)
    f = lambda z: abs(mean + sd * z) ** lam * mp.npdf(z)
    return mp.quad(f, [-mp.inf, -mean / sd, mp.inf])


def pm1_window_probability(n, lo, hi):
    """Exact P(every partial sum of n +-1 steps lies in [lo, hi]) from 0."""
    good = 0
    for steps in product((-1, 1), repeat=n):
        s = 0
        ok = True
        for d in steps:
            s += d
            if s < lo or s > hi:
                ok = False
                break
        good += ok
    return Fraction(good, 2**n)


def main():
    print("tube [0,1] x=0.5 t=1:", mp.nstr(tube_series(0, 1, 0.5, 1), 15))
    print("tube [0,1] x=0.3 t=0.2:", mp.nstr(tube_series(0, 1, 0.3, 0.2), 15))
    print("tube [-1,2] x=0 t=3:", mp.nstr(tube_series(-1, 2, 0, 3), 15))
    for mean, var, lam in [(0, 1, 2.5), (0, 2, 3.7), (0, 0.5, 4), (0, 1, 0.5)]:
        print(f"E|N({mean},{var})|^{lam}:", mp.nstr(gaussian_abs_moment(mean, var, lam), 15))
    # n = 10, alpha = 0.3: n^alpha = 1.995..., lattice window {-1, 0, 1}
    n = 10
    width = mp.mpf(n) ** mp.mpf("0.3")
    p = pm1_window_probability(n, -1, 1)
    print("pm1 n=10 window +-n^0.3 =", mp.nstr(width, 10), "P =", p,
          "exponent =", mp.nstr(mp.log(p) / mp.mpf(n) ** mp.mpf("0.4"), 15))
    print("pm1 n=2 [-1,1]:", pm1_window_probability(2, -1, 1))
    print("pm1 n=4 [-1,1]:", pm1_window_probability(4, -1, 1))
    print("C_gh g=0 h=1+s:", mp.quad(lambda s: 1 / (1 + s) ** 2, [0, 1]))


if __name__ == "__main__":
    main()
