#!/usr/bin/env python3
"""Solve exported FLOW models with HiGHS (scipy.optimize.milp) and record the optima.

Reads the LP files written by `qstpi export-lp`, replaces each bilinear product
of binaries y_a*y_b by a continuous w >= y_a + y_b - 1, w <= y_a, w <= y_b, and
writes <dir>/optima.json mapping file name -> objective value.

    tools/solve_lp_fixtures.py tests/fixtures/flow
"""

import json
import sys
from pathlib import Path

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import lil_matrix

SECTIONS = {"minimize", "subject to", "bounds", "binaries", "end"}


def parse_terms(tokens):
    lin, quad = [], []
    sign, coef, pending, in_quad = 1.0, 1.0, None, False
    for t in tokens:
        if t == "+":
            continue
        if t == "-":
            sign = -sign
        elif t == "[":
            in_quad = True
        elif t == "]":
            in_quad = False
        elif t == "*":
            continue
        else:
            try:
                coef = float(t)
                continue
            except ValueError:
                pass
            if in_quad and pending is None:
                pending = t
                continue
            if in_quad:
                quad.append((pending, t, sign * coef))
                pending = None
            else:
                lin.append((t, sign * coef))
            sign, coef = 1.0, 1.0
    return lin, quad


def read_lp(path):
    sec, body, binaries = None, [], []
    obj, rows = [], []
    for raw in Path(path).read_text().splitlines():
        line = raw.split("\\", 1)[0]
        if not line.strip():
            continue
        if not line[0].isspace():
            key = line.strip().lower()
            if key not in SECTIONS:
                raise ValueError(f"{path}: unknown section {key!r}")
            sec = key
            continue
        toks = line.split()
        if sec == "minimize":
            obj += toks[1:] if toks[0].endswith(":") else toks
        elif sec == "subject to":
            body += toks
        elif sec == "binaries":
            binaries += toks
    lin, _ = parse_terms(obj)
    i = 0
    while i < len(body):
        name = body[i][:-1]
        j = i + 1
        while body[j] not in ("<=", ">=", "="):
            j += 1
        l, q = parse_terms(body[i + 1 : j])
        rows.append((name, l, q, body[j], float(body[j + 1])))
        i = j + 2
    return lin, rows, binaries


def solve(path):
    obj, rows, binaries = read_lp(path)
    names = {}

    def var(v):
        return names.setdefault(v, len(names))

    for v, _ in obj:
        var(v)
    for _, l, q, _, _ in rows:
        for v, _ in l:
            var(v)
        for a, b, _ in q:
            var(a), var(b)
    for v in binaries:
        var(v)
    prods = {}
    extra = []  # (w, a, b)
    for _, _, q, _, _ in rows:
        for a, b, _ in q:
            key = tuple(sorted((a, b)))
            if key not in prods:
                prods[key] = var(f"w__{key[0]}__{key[1]}")
                extra.append((prods[key], names[key[0]], names[key[1]]))

    n = len(names)
    A = lil_matrix((len(rows) + 3 * len(extra), n))
    lo, hi = [], []
    for r, (_, l, q, sense, rhs) in enumerate(rows):
        for v, c in l:
            A[r, names[v]] += c
        for a, b, c in q:
            A[r, prods[tuple(sorted((a, b)))]] += c
        lo.append(rhs if sense in (">=", "=") else -np.inf)
        hi.append(rhs if sense in ("<=", "=") else np.inf)
    r = len(rows)
    for w, a, b in extra:
        A[r, w], A[r, a], A[r, b] = 1, -1, -1  # w >= a + b - 1
        lo.append(-1), hi.append(np.inf)
        A[r + 1, w], A[r + 1, a] = 1, -1  # w <= a
        lo.append(-np.inf), hi.append(0)
        A[r + 2, w], A[r + 2, b] = 1, -1  # w <= b
        lo.append(-np.inf), hi.append(0)
        r += 3

    c = np.zeros(n)
    for v, k in obj:
        c[names[v]] += k
    integrality = np.zeros(n)
    ub = np.full(n, np.inf)
    for v in binaries:
        integrality[names[v]] = 1
        ub[names[v]] = 1
    res = milp(
        c,
        constraints=LinearConstraint(A.tocsr(), lo, hi),
        integrality=integrality,
        bounds=Bounds(np.zeros(n), ub),
        options={"mip_rel_gap": 1e-12},
    )
    if res.status != 0:
        raise RuntimeError(f"{path}: {res.message}")
    return float(res.fun)


def main():
    d = Path(sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures/flow")
    optima = {p.name: solve(p) for p in sorted(d.glob("*.lp"))}
    (d / "optima.json").write_text(json.dumps(optima, indent=2, sort_keys=True) + "\n")
    for k, v in optima.items():
        print(f"{k} {v:.9f}")


if __name__ == "__main__":
    main()
