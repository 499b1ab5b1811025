"""Writes 50-digit reference values of the bag sample-complexity bound.

    m = ceil((64 / eps^2) * (2 vc ln(12 r / eps) + ln(4 / delta)))

Output columns: vc r eps delta m_exact(50 digits) m_ceil
"""
import random
import sys

import mpmath

mpmath.mp.dps = 50
rng = random.Random(20240611)
out = sys.stdout
out.write("# vc r eps delta m_exact m_ceil\n")
for _ in range(100):
    vc = rng.randint(1, 500)
    r = rng.choice([1, rng.randint(1, 5000), round(rng.uniform(1, 500), 3)])
    eps = round(rng.uniform(0.005, 0.99), 4)
    delta = round(rng.uniform(0.001, 0.99), 4)
    m = (mpmath.mpf(64) / mpmath.mpf(eps) ** 2) * (
        2 * vc * mpmath.log(12 * mpmath.mpf(r) / mpmath.mpf(eps))
        + mpmath.log(4 / mpmath.mpf(delta))
    )
    out.write(f"{vc} {r} {eps} {delta} {mpmath.nstr(m, 40)} {int(mpmath.ceil(m))}\n")
