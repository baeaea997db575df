#!/usr/bin/env python3
"""Solve sparse SDPA files with cvxpy and print the optimal objective.

    python3 scripts/sdpa_check.py FILE [FILE ...]

Each file is read as: minimize c'y subject to sum_i F_i y_i - F_0 >= 0
(block diagonal). One JSON object per file goes to stdout.
"""

import json
import sys

import cvxpy as cp
import numpy as np


def data_lines(text):
    for line in text.splitlines():
        s = line.strip()
        if not s or s[0] in '*"':
            continue
        yield s.replace(",", " ").replace("{", " ").replace("}", " ").replace("(", " ").replace(")", " ")


def read_sdpa(path):
    with open(path) as f:
        lines = data_lines(f.read())
        m = int(next(lines).split()[0])
        nblock = int(next(lines).split()[0])
        sizes = [abs(int(v)) for v in next(lines).split()[:nblock]]
        c = np.array([float(v) for v in next(lines).split()[:m]])
        mats = [[np.zeros((n, n)) for n in sizes] for _ in range(m + 1)]
        for line in lines:
            t = line.split()
            k, b, i, j, v = int(t[0]), int(t[1]) - 1, int(t[2]) - 1, int(t[3]) - 1, float(t[4])
            mats[k][b][i, j] = v
            mats[k][b][j, i] = v
    return c, sizes, mats


def solve(path):
    c, sizes, mats = read_sdpa(path)
    m = len(c)
    y = cp.Variable(m)
    cons = []
    for b, n in enumerate(sizes):
        expr = -mats[0][b] + sum(mats[k + 1][b] * y[k] for k in range(m) if np.any(mats[k + 1][b]))
        cons.append((expr + expr.T) / 2 >> 0)
    prob = cp.Problem(cp.Minimize(c @ y), cons)
    for solver in ("CLARABEL", "SCS"):
        if solver not in cp.installed_solvers():
            continue
        try:
            prob.solve(solver=solver)
        except cp.SolverError:
            continue
        if prob.status in ("optimal", "optimal_inaccurate"):
            return {"file": path, "solver": solver, "status": prob.status, "objective": float(prob.value)}
    return {"file": path, "solver": None, "status": prob.status, "objective": None}


def main(argv):
    if len(argv) < 2:
        print(__doc__, file=sys.stderr)
        return 2
    for path in argv[1:]:
        print(json.dumps(solve(path)))
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
