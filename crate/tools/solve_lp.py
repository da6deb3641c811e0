#!/usr/bin/env python3
"""Solve an exported LP/MILP model file with scipy's HiGHS backend.

Reads the documented LP subset written by the exporter (objective,
constraints, bounds, binary section, `\\ objective_offset:` comment) and
writes a `name value` solution file that the importer re-verifies.

Usage:
    solve_lp.py model.lp -o model.sol [--time-limit S] [--mip-rel-gap G]

Exit codes: 0 solved, 1 input error, 2 solver failure/limit.
"""

import argparse
import re
import sys

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, milp

TERM_RE = re.compile(r"([+-])\s*([\d.eE+-]*?)\s*([A-Za-z_][\w.]*)")
ROW_RE = re.compile(r"(.*?)(<=|>=|=)\s*([-+\d.eE]+)\s*$")


def parse_terms(expr):
    terms = []
    for sign, coef, name in TERM_RE.findall(expr):
        c = float(coef) if coef not in ("", "+", "-") else 1.0
        if sign == "-":
            c = -c
        terms.append((name, c))
    return terms


def parse_model(path):
    offset = 0.0
    lines = []
    with open(path) as fh:
        for raw in fh:
            if raw.startswith("\\"):
                m = re.match(r"\\ objective_offset:\s*([-+\d.eE]+)", raw)
                if m:
                    offset = float(m.group(1))
                continue
            lines.append(raw.rstrip("\n"))

    section = None
    sense = None
    obj_terms = []
    rows = []  # (name, terms, op, rhs)
    bounds = {}
    binaries = set()
    for line in lines:
        stripped = line.strip()
        if not stripped:
            continue
        low = stripped.lower()
        if low in ("minimize", "maximize"):
            sense = low
            section = "obj"
            continue
        if low == "subject to":
            section = "rows"
            continue
        if low == "bounds":
            section = "bounds"
            continue
        if low == "binary":
            section = "binary"
            continue
        if low == "end":
            break
        if section == "obj":
            expr = stripped.split(":", 1)[1] if ":" in stripped else stripped
            obj_terms.extend(parse_terms(expr))
        elif section == "rows":
            name, rest = stripped.split(":", 1)
            m = ROW_RE.match(rest.strip())
            if not m:
                raise ValueError(f"cannot parse constraint: {stripped!r}")
            rows.append((name.strip(), parse_terms(m.group(1)), m.group(2), float(m.group(3))))
        elif section == "bounds":
            if stripped.endswith("free"):
                bounds[stripped.split()[0]] = (-np.inf, np.inf)
            elif "<=" in stripped:
                parts = [p.strip() for p in stripped.split("<=")]
                if len(parts) == 3:
                    lo = -np.inf if parts[0] == "-inf" else float(parts[0])
                    hi = np.inf if parts[2] in ("inf", "+inf") else float(parts[2])
                    bounds[parts[1]] = (lo, hi)
                else:
                    m = re.match(r"([A-Za-z_][\w.]*)\s*<=\s*([-+\d.eE]+)", stripped)
                    bounds[m.group(1)] = (0.0, float(m.group(2)))
            elif ">=" in stripped:
                name, val = [p.strip() for p in stripped.split(">=")]
                bounds[name] = (float(val), np.inf)
            elif "=" in stripped:
                name, val = [p.strip() for p in stripped.split("=")]
                bounds[name] = (float(val), float(val))
        elif section == "binary":
            binaries.add(stripped)

    if sense is None:
        raise ValueError("no objective sense found")
    names = sorted(
        {n for n, _ in obj_terms}
        | {n for _, terms, _, _ in rows for n, _ in terms}
        | set(bounds)
        | binaries
    )
    return sense, offset, obj_terms, rows, bounds, binaries, names


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("model")
    ap.add_argument("-o", "--out", required=True)
    ap.add_argument("--time-limit", type=float, default=None)
    ap.add_argument("--mip-rel-gap", type=float, default=None)
    args = ap.parse_args()

    try:
        sense, offset, obj_terms, rows, bounds, binaries, names = parse_model(args.model)
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    idx = {n: i for i, n in enumerate(names)}
    n = len(names)
    c = np.zeros(n)
    for name, v in obj_terms:
        c[idx[name]] += v
    sign = 1.0 if sense == "minimize" else -1.0

    data, ri, ci, lo_r, hi_r = [], [], [], [], []
    for r, (_, terms, op, rhs) in enumerate(rows):
        for name, v in terms:
            ri.append(r)
            ci.append(idx[name])
            data.append(v)
        if op == "=":
            lo_r.append(rhs)
            hi_r.append(rhs)
        elif op == "<=":
            lo_r.append(-np.inf)
            hi_r.append(rhs)
        else:
            lo_r.append(rhs)
            hi_r.append(np.inf)
    a = sparse.csr_matrix((data, (ri, ci)), shape=(len(rows), n))

    lb = np.zeros(n)
    ub = np.full(n, np.inf)
    integrality = np.zeros(n)
    for name, (lo, hi) in bounds.items():
        lb[idx[name]] = lo
        ub[idx[name]] = hi
    for name in binaries:
        lb[idx[name]] = 0.0
        ub[idx[name]] = 1.0
        integrality[idx[name]] = 1

    options = {}
    if args.time_limit is not None:
        options["time_limit"] = args.time_limit
    if args.mip_rel_gap is not None:
        options["mip_rel_gap"] = args.mip_rel_gap
    res = milp(
        c=sign * c,
        constraints=LinearConstraint(a, lo_r, hi_r),
        bounds=Bounds(lb, ub),
        integrality=integrality,
        options=options,
    )
    if res.x is None:
        print(f"solver failed: status {res.status} ({res.message})", file=sys.stderr)
        return 2
    objective = sign * res.fun + offset
    with open(args.out, "w") as fh:
        fh.write(f"# objective {float(objective)!r}\n")
        fh.write(f"# status {res.status} mip_gap {float(getattr(res, 'mip_gap', 0.0) or 0.0)!r}\n")
        for name in names:
            fh.write(f"{name} {float(res.x[idx[name]])!r}\n")
    print(f"objective {objective}")
    return 0 if res.status == 0 else 2


if __name__ == "__main__":
    sys.exit(main())
