"""Writes equation metadata golden files from the closed-form dispersions.

psiOnAxis lists psi_c(n) for n = -10..10 along the first axis; degrees lists,
per component and term, how many inputs each component feeds.
"""
import json
import math
import sys

ALPHA = 0.75
AXIS = range(-10, 11)


def sq(n):
    return float(n * n)


SPECS = {
    "kdv": (1, [[lambda n: float(n ** 3)]], [[[2]]]),
    "cnls1d": (1, [[sq], [lambda n: -sq(n)]], [[[2, 1]], [[1, 2]]]),
    "cnls2d": (2, [[sq], [lambda n: -sq(n)]], [[[2, 1]], [[1, 2]]]),
    "fnls": (1, [[lambda n: -abs(n) ** (2 * ALPHA)], [lambda n: abs(n) ** (2 * ALPHA)]],
             [[[2, 1]], [[1, 2]]]),
    "dnls": (1, [[sq], [lambda n: -sq(n)]], [[[2, 1]], [[1, 2]]]),
    "zakharov": (1, [[sq], [lambda n: -sq(n)], [lambda n: math.sqrt(1 + n * n)],
                     [lambda n: -math.sqrt(1 + n * n)]],
                 [[[1, 0, 1, 0], [1, 0, 0, 1]], [[0, 1, 0, 1], [0, 1, 1, 0]],
                  [[1, 1, 0, 0]], [[1, 1, 0, 0]]]),
}

if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "."
    for name, (d, psi, degrees) in SPECS.items():
        doc = {"name": name, "d": d, "components": len(psi),
               "degrees": degrees,
               "psiOnAxis": [[f[0](n) for n in AXIS] for f in psi]}
        with open(f"{out}/metadata_{name}.json", "w") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")
