"""Check V_c o phi_c = T o W o phi_a for several a, printing T's centre modulus.

Usage: python scripts/psi_identity.py [a ...]   (defaults: 1/2 3/5 5/13 0.3)
"""
import sys
from fractions import Fraction

from bsdforms.normalize import psi_identity


def main():
    args = sys.argv[1:] or ["1/2", "3/5", "5/13", "0.3"]
    for text in args:
        a = Fraction(text) if "/" in text else float(text)
        rep = psi_identity(a)
        kind = "exact" if rep.c.exact else "float"
        print(f"a = {text:6s} c = {rep.c}  holds {rep.holds}  conformal {rep.conformal}  "
              f"|centre| = {rep.A}  (a^2 = {a * a})  [{kind}]")


if __name__ == "__main__":
    main()
