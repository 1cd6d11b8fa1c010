#!/usr/bin/env python3
"""External LP adapter for cross-checking: reads the btsa LP JSON on stdin,
solves it with scipy's HiGHS interface and writes the result JSON on stdout."""
import json
import sys

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix


def main():
    lp = json.load(sys.stdin)
    n = lp["n_cols"]
    c = np.array(lp["cost"], dtype=float)
    bounds = [(lo, up) for lo, up in zip(lp["lower"], lp["upper"])]
    ub_r, ub_c, ub_v, ub_b, ub_sign = [], [], [], [], []
    eq_r, eq_c, eq_v, eq_b = [], [], [], []
    row_kind = []
    for row in lp["rows"]:
        if row["sense"] == "eq":
            k = len(eq_b)
            eq_r += [k] * len(row["cols"])
            eq_c += row["cols"]
            eq_v += row["vals"]
            eq_b.append(row["rhs"])
            row_kind.append(("eq", k, 1.0))
        else:
            s = 1.0 if row["sense"] == "le" else -1.0
            k = len(ub_b)
            ub_r += [k] * len(row["cols"])
            ub_c += row["cols"]
            ub_v += [s * v for v in row["vals"]]
            ub_b.append(s * row["rhs"])
            row_kind.append(("ub", k, s))
    a_ub = coo_matrix((ub_v, (ub_r, ub_c)), shape=(len(ub_b), n)).tocsr() if ub_b else None
    a_eq = coo_matrix((eq_v, (eq_r, eq_c)), shape=(len(eq_b), n)).tocsr() if eq_b else None
    res = linprog(c, A_ub=a_ub, b_ub=ub_b or None, A_eq=a_eq, b_eq=eq_b or None,
                  bounds=bounds, method="highs")
    status = {0: "optimal", 1: "iteration_limit", 2: "infeasible", 3: "unbounded"}.get(res.status, "invalid_input")
    out = {"status": status}
    if status == "optimal":
        duals = []
        for kind, k, s in row_kind:
            m = res.eqlin.marginals[k] if kind == "eq" else res.ineqlin.marginals[k]
            duals.append(float(s * m))
        out.update({
            "objective": float(res.fun),
            "primal": [float(v) for v in res.x],
            "row_duals": duals,
            "bound_duals": [float(a + b) for a, b in zip(res.lower.marginals, res.upper.marginals)],
        })
    json.dump(out, sys.stdout)


if __name__ == "__main__":
    main()
