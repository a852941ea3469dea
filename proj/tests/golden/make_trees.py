"""Writes the ordered-tree golden files from a standalone construction.

Elements are numbered in creation order.  A tree of generation J is built
from every tree of generation J - 1 by developing each leaf, leaves taken in
preorder, into node J with p new children appended at the end.
"""
import json
import sys


def root(p):
    return {"parent": [-1] + [0] * p, "slot": [None] + list(range(p)),
            "label": [1] + [None] * p}


def children(t, e):
    return [c for c in range(len(t["parent"])) if t["parent"][c] == e]


def preorder(t):
    out, stack = [], [0]
    while stack:
        e = stack.pop()
        out.append(e)
        stack.extend(reversed(sorted(children(t, e), key=lambda c: t["slot"][c])))
    return out


def extend(t, leaf, p):
    j = sum(1 for x in t["label"] if x is not None)
    u = {k: list(v) for k, v in t.items()}
    u["label"][leaf] = j + 1
    for k in range(p):
        u["parent"].append(leaf)
        u["slot"].append(k)
        u["label"].append(None)
    return u


def generation(p, J):
    gen = [root(p)]
    for _ in range(2, J + 1):
        gen = [extend(t, leaf, p) for t in gen for leaf in preorder(t)
               if t["label"][leaf] is None]
    return gen


def dump(t):
    return [{"label": t["label"][e],
             "parentLabelOrNull": None if t["parent"][e] < 0 else t["label"][t["parent"][e]],
             "childSlot": t["slot"][e]} for e in range(len(t["parent"]))]


if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "."
    for J in (1, 2):
        with open(f"{out}/trees_p3_J{J}.json", "w") as f:
            json.dump([dump(t) for t in generation(3, J)], f, indent=1)
            f.write("\n")
