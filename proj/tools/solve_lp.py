#!/usr/bin/env python3
"""Solve an LP-text file written by efce-lab with scipy's HiGHS backend.

Usage: solve_lp.py model.lp

Prints, on success:
    status optimal
    objective <value>            (in the model's own sense)
    var <name> <value>           (one line per variable)
Any other status prints `status <reason>` and exits nonzero.
"""
import sys

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix


def tokenize_sections(path):
    maximize = False
    obj_tokens, con_tokens, bounds_lines = [], [], []
    state = None
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("\\"):
                continue
            if line in ("Maximize", "Minimize"):
                maximize = line == "Maximize"
                state = "obj"
                continue
            if line == "Subject To":
                state = "cons"
                continue
            if line == "Bounds":
                state = "bounds"
                continue
            if line == "End":
                state = "done"
                break
            if state == "obj":
                obj_tokens += [t for t in line.split() if t != "obj:"]
            elif state == "cons":
                con_tokens += line.split()
            elif state == "bounds":
                bounds_lines.append(line.split())
    if state != "done":
        raise ValueError("missing End marker")
    return maximize, obj_tokens, con_tokens, bounds_lines


def is_number(tok):
    return tok[0] in "+-.0123456789"


def parse(path):
    maximize, obj_tokens, con_tokens, bounds_lines = tokenize_sections(path)
    var_id, var_names, free = {}, [], []
    for parts in bounds_lines:
        name = parts[0]
        var_id[name] = len(var_names)
        var_names.append(name)
        free.append(len(parts) == 2 and parts[1] == "free")

    objective = [
        (var_id[obj_tokens[i + 1]], float(obj_tokens[i]))
        for i in range(0, len(obj_tokens), 2)
    ]
    cons = []
    i = 0
    while i < len(con_tokens):
        name = con_tokens[i]
        assert name.endswith(":"), name
        i += 1
        terms = []
        while i < len(con_tokens) and is_number(con_tokens[i]):
            terms.append((var_id[con_tokens[i + 1]], float(con_tokens[i])))
            i += 2
        sense = con_tokens[i]
        rhs = float(con_tokens[i + 1])
        i += 2
        cons.append((sense, terms, rhs))
    return maximize, objective, cons, var_names, free


def main():
    if len(sys.argv) != 2:
        print("usage: solve_lp.py model.lp", file=sys.stderr)
        return 2
    maximize, objective, cons, var_names, free = parse(sys.argv[1])
    n = len(var_names)
    c = np.zeros(n)
    for v, coef in objective:
        c[v] = -coef if maximize else coef

    def sparse(rows):
        r, cc, vv, rhs = [], [], [], []
        for k, (_, terms, b) in enumerate(rows):
            for v, coef in terms:
                r.append(k)
                cc.append(v)
                vv.append(coef)
            rhs.append(b)
        return coo_matrix((vv, (r, cc)), shape=(len(rows), n)), rhs

    eq = [c_ for c_ in cons if c_[0] == "="]
    ub = [c_ for c_ in cons if c_[0] == "<="]
    A_eq, b_eq = sparse(eq) if eq else (None, None)
    A_ub, b_ub = sparse(ub) if ub else (None, None)
    bounds = [(None, None) if f else (0, None) for f in free]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds,
                  method="highs")
    if res.status != 0:
        print(f"status {res.message}")
        return 1
    print("status optimal")
    obj = -res.fun if maximize else res.fun
    print(f"objective {float(obj)!r}")
    for name, val in zip(var_names, res.x):
        print(f"var {name} {float(val)!r}")
    return 0


if __name__ == "__main__":
    try:
        sys.exit(main())
    except BrokenPipeError:
        sys.exit(0)
