"""Print the boundary defect I - B^* B of the Whitney block for (3,1) and (4,2).

Usage: python scripts/block_defect_report.py [degree]
"""
import sys

from bsdforms.model import ModelSignature, whitney_block_defect


def main():
    D = int(sys.argv[1]) if len(sys.argv) > 1 else 4
    for p, q in ((3, 1), (4, 2)):
        rep = whitney_block_defect(ModelSignature(p, q), D)
        print(f"({p},{q}), D = {D}: {rep.describe()}")
        for row, col, mono, coeff in rep.terms:
            print(f"  entry ({row},{col}): {mono}  {coeff}")


if __name__ == "__main__":
    main()
