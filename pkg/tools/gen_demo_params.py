"""One-shot search for the demo profile field constants.

Finds the smallest 160-bit prime q, then the smallest cofactor of the
form 3*m such that p = 3*m*q - 1 is a 256-bit prime.  That shape gives
p = 2 (mod 3) and q | p + 1 by construction, 32-byte coordinates (so
64-byte serialized points), and a prime-order subgroup big enough that
the toy profile's exhaustive checks do not carry over by accident.

The search is fully deterministic: rerunning this script must print the
same constants that are frozen into ibetrust.ibe.PROFILES["demo"].

Usage: python tools/gen_demo_params.py
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from ibetrust.curve import is_probable_prime


def main():
    q = 2**159 + 1
    while not is_probable_prime(q):
        q += 2
    print(f"q bits: {q.bit_length()}")
    print(f"q = {q:#x}")

    m = (2**255) // (3 * q) + 1
    while True:
        p = 3 * m * q - 1
        if p.bit_length() == 256 and is_probable_prime(p):
            break
        m += 1
    print(f"m = {m}")
    print(f"p bits: {p.bit_length()}")
    print(f"p = {p:#x}")
    print(f"cofactor = 3*m = {3 * m:#x}")

    assert p % 3 == 2
    assert (p + 1) % q == 0
    assert (p + 1) // q == 3 * m
    print("checks: p = 2 mod 3, q | p+1: ok")


if __name__ == "__main__":
    main()
