#!/usr/bin/env python3
"""High-precision reference values for the Mittag-Leffler function.

Sums the defining series E_{a,b}(z) = sum_k z^k / Gamma(a k + b) directly in
multiprecision arithmetic. The working precision is chosen from the largest
term so that cancellation on the negative axis still leaves >= 50 correct
digits, and every value is recomputed at a higher precision to confirm it.

a and b must be rational; Gamma(a k + b) is then advanced along q residue
chains with exact Gamma(x + p) = Gamma(x) x (x+1) ... (x+p-1) updates, which
keeps 10^5-term sums cheap.

Regenerate with:
    python3 crates/core/tests/oracle/ml_series_oracle.py > crates/core/tests/data/ml_series_oracle.json
"""

import json
import sys
import math
from fractions import Fraction

import gmpy2
from gmpy2 import mpc, mpfr

DIGITS = 50


def log10_max_term(a, b, zabs):
    """Float estimate of log10 of the largest |term| and the index where terms die off."""
    if zabs == 0.0:
        return 0.0, 1
    best = -math.inf
    k = 0
    lz = math.log(zabs)
    while True:
        x = a * k + b
        lt = k * lz - (math.lgamma(x) if x > 0 else 0.0)
        best = max(best, lt)
        if k > 10 and lt < best - (DIGITS + 40) * math.log(10):
            return best / math.log(10), k
        k += 1


def series(a_frac, b_frac, z_re, z_im, extra_digits):
    a = float(a_frac)
    b = float(b_frac)
    zabs = math.hypot(float(z_re), float(z_im))
    lmax, kmax = log10_max_term(a, b, zabs)
    digits = DIGITS + max(lmax, 0.0) + extra_digits
    bits = int(digits * 3.33) + 64
    ctx = gmpy2.get_context().copy()
    ctx.precision = bits
    with gmpy2.context(ctx):
        z = mpc(mpfr(str(z_re)), mpfr(str(z_im)))
        p, q = a_frac.numerator, a_frac.denominator
        xs = []
        gs = []
        for r in range(q):
            x = mpfr(a_frac.numerator * r) / a_frac.denominator + mpfr(b_frac.numerator) / b_frac.denominator
            xs.append(x)
            gs.append(gmpy2.gamma(x))
        total = mpc(0)
        zk = mpc(1)
        tol = mpfr(10) ** (-(DIGITS + 20))
        k = 0
        while True:
            r = k % q
            term = zk / gs[r]
            total += term
            # advance the chain that owns index k to index k + q
            x = xs[r]
            g = gs[r]
            for j in range(p):
                g *= x + j
            xs[r] = x + p
            gs[r] = g
            if k > kmax and abs(term) < tol * abs(total):
                break
            zk *= z
            k += 1
        return total, k


def reference(a_frac, b_frac, z_re, z_im):
    v1, n1 = series(a_frac, b_frac, z_re, z_im, 30)
    v2, _ = series(a_frac, b_frac, z_re, z_im, 60)
    ctx = gmpy2.get_context().copy()
    ctx.precision = 400
    with gmpy2.context(ctx):
        rel = abs(v1 - v2) / abs(v2)
        assert rel < mpfr(10) ** (-DIGITS), (a_frac, b_frac, z_re, z_im, rel)
    return v2, n1


def fmt(x):
    """Decimal string with 32 significant digits."""
    if x == 0:
        return "0.0"
    mant, exp, _ = x.digits(10, 32)
    sign = ""
    if mant[0] == "-":
        sign, mant = "-", mant[1:]
    return f"{sign}{mant[0]}.{mant[1:]}e{exp - 1}"


def main():
    alphas = [Fraction(3, 10), Fraction(1, 2), Fraction(7, 10), Fraction(9, 10)]
    zs = [
        ("-0.5", "0"), ("-1", "0"), ("-2", "0"), ("-3", "0"), ("-5", "0"),
        ("-7.5", "0"), ("-10", "0"), ("-14", "0"), ("-20", "0"),
        ("-1", "2"), ("-3", "-4"), ("-0.25", "6"), ("-6", "8"),
        ("0", "9"), ("-12", "-9"), ("-0.5", "-19"), ("-11", "15"),
    ]
    grid = []
    for a in alphas:
        for b in (a, Fraction(1), a + 1):
            for zr, zi in zs:
                v, n = reference(a, b, zr, zi)
                print(a, b, zr, zi, n, file=sys.stderr, flush=True)
                grid.append({
                    "alpha": float(a), "beta": float(b),
                    "z": [float(zr), float(zi)],
                    "value": [fmt(v.real), fmt(v.imag)],
                    "terms": n,
                })
    named = []
    for a, b, zr, zi in [
        (Fraction(1, 2), Fraction(1, 2), "-3", "0"),
        (Fraction(1, 2), Fraction(1, 2), "-2", "0"),
        (Fraction(1, 2), Fraction(1, 2), "-1", "0"),
        (Fraction(1, 2), Fraction(1), "-1", "0"),
        (Fraction(1, 2), Fraction(3, 2), "-1", "0"),
        (Fraction(3, 5), Fraction(1), "-1", "0"),
    ]:
        v, n = reference(a, b, zr, zi)
        named.append({
            "alpha": float(a), "beta": float(b),
            "z": [float(zr), float(zi)],
            "value": [fmt(v.real), fmt(v.imag)],
            "terms": n,
        })
    print(json.dumps({"digits": DIGITS, "grid": grid, "named": named}, indent=1))


if __name__ == "__main__":
    main()
