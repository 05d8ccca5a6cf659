#!/usr/bin/env python3
"""LP/MILP solve driver backed by scipy's HiGHS bindings.

Reads a model file (CPLEX LP text or free MPS), solves it, and writes a
plain-text solution file:

    status <optimal|feasible|infeasible|time_limit|error>
    objective <value>          # maximization sense, when a point exists
    bound <value>              # proven bound, maximization sense
    message <text>             # optional diagnostics
    columns <n>                # n `name value` lines follow (nonzeros)
    duals <n>                  # LP only: row duals, max-sense signs
    rcosts <n>                 # LP only: reduced costs, max-sense signs
    end

A model whose columns are all continuous is solved as an LP (duals and
reduced costs reported); any integer column makes it a MILP solved to a
zero relative gap.

Usage:
    solve_model.py --model M --solution S [--time-limit T] [--threads N]
                   [--seed K] [--lp-hint auto|dual-simplex|barrier]
                   [--warm FILE]
    solve_model.py --serve

--serve reads tab-separated job lines from stdin:
    model  solution  timelimit  threads  seed  lphint  warmstart
("-" for no warm start) and answers "ok" or "error <message>" per job.
Threads and seed are accepted for interface compatibility; scipy's HiGHS
wrapper runs single-threaded and unseeded. Warm starts are accepted but
not forwarded (scipy exposes no MIP-start hook); the caller compensates.
"""

import argparse
import re
import sys

import numpy as np
import scipy.sparse as sp
from scipy.optimize import Bounds, LinearConstraint, linprog, milp

INF = float("inf")

_NUM_RE = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


class Model:
    def __init__(self):
        self.maximize = False
        self.col_names = []
        self.col_index = {}
        self.objective = {}       # col -> coeff
        self.rows = []            # (name, {col: coeff}, relation, rhs)
        self.lower = {}           # col -> bound (default 0)
        self.upper = {}           # col -> bound (default +inf)
        self.integer = set()

    def col(self, name):
        if name not in self.col_index:
            self.col_index[name] = len(self.col_names)
            self.col_names.append(name)
        return self.col_index[name]


def _tokenize_lp(text):
    out = []
    for line in text.splitlines():
        if "\\" in line:
            line = line[: line.index("\\")]
        line = line.replace(":", " : ")
        line = line.replace("<=", " <= ").replace(">=", " >= ")
        out.extend(line.split())
    return out


def parse_lp(text):
    toks = _tokenize_lp(text)
    model = Model()
    i = 0
    n = len(toks)

    def lower(tok):
        return tok.lower()

    def section_at(j):
        t = lower(toks[j])
        if t in ("maximize", "maximise", "max", "minimize", "minimise", "min"):
            return "obj"
        if t in ("st", "s.t.", "st.") or (
            t == "subject" and j + 1 < n and lower(toks[j + 1]) == "to"
        ):
            return "st"
        if t == "such" and j + 1 < n and lower(toks[j + 1]) == "that":
            return "st"
        if t == "bounds":
            return "bounds"
        if t in ("general", "generals", "gen", "integer", "integers"):
            return "general"
        if t in ("binary", "binaries", "bin"):
            return "binary"
        if t == "end":
            return "end"
        return None

    def parse_expr(j, coeffs):
        # [+|-] [number] name, repeated; stops at a relation or section
        sign = 1.0
        coeff = None
        while j < n:
            t = toks[j]
            if t in ("<=", ">=", "=", "<", ">") or section_at(j):
                break
            if t == "+":
                sign, coeff = 1.0, None
                j += 1
            elif t == "-":
                sign, coeff = -1.0, None
                j += 1
            elif _NUM_RE.match(t):
                coeff = float(t) if coeff is None else coeff * float(t)
                j += 1
            else:
                c = model.col(t)
                value = sign * (1.0 if coeff is None else coeff)
                coeffs[c] = coeffs.get(c, 0.0) + value
                sign, coeff = 1.0, None
                j += 1
        return j

    section = None
    while i < n:
        sec = section_at(i)
        if sec:
            section = sec
            t = lower(toks[i])
            model.maximize = model.maximize or t in ("maximize", "maximise", "max")
            i += 2 if (t in ("subject", "such")) else 1
            if section == "end":
                break
            if section == "obj":
                # optional `name :`
                if i + 1 < n and toks[i + 1] == ":":
                    i += 2
                coeffs = {}
                i = parse_expr(i, coeffs)
                model.objective = coeffs
            continue
        if section == "st":
            name = None
            if i + 1 < n and toks[i + 1] == ":":
                name = toks[i]
                i += 2
            coeffs = {}
            i = parse_expr(i, coeffs)
            if i >= n:
                raise ValueError("constraint without relation")
            rel = toks[i]
            rel = {"<": "<=", ">": ">="}.get(rel, rel)
            i += 1
            rhs = float(toks[i])
            i += 1
            model.rows.append((name or f"c{len(model.rows)}", coeffs, rel, rhs))
        elif section == "bounds":
            # forms: `lo <= name <= up`, `name <= up`, `name >= lo`,
            #        `name = v`, `name free`
            if i + 1 < n and _NUM_RE.match(toks[i]) and toks[i + 1] == "<=":
                lo = float(toks[i])
                name = toks[i + 2]
                c = model.col(name)
                model.lower[c] = lo
                i += 3
                if i < n and toks[i] == "<=":
                    model.upper[c] = float(toks[i + 1])
                    i += 2
            else:
                name = toks[i]
                c = model.col(name)
                if i + 1 < n and lower(toks[i + 1]) == "free":
                    model.lower[c] = -INF
                    i += 2
                elif i + 1 < n and toks[i + 1] in ("<=", ">=", "="):
                    rel = toks[i + 1]
                    v = float(toks[i + 2])
                    if rel == "<=":
                        model.upper[c] = v
                    elif rel == ">=":
                        model.lower[c] = v
                    else:
                        model.lower[c] = model.upper[c] = v
                    i += 3
                else:
                    i += 1
        elif section in ("general", "binary"):
            c = model.col(toks[i])
            model.integer.add(c)
            if section == "binary":
                model.lower[c] = max(model.lower.get(c, 0.0), 0.0)
                model.upper[c] = min(model.upper.get(c, INF), 1.0)
            i += 1
        else:
            raise ValueError(f"unexpected token {toks[i]!r} outside any section")
    return model


def parse_mps(text):
    model = Model()
    section = None
    integer_mode = False
    row_rel = {}
    row_order = []
    row_coeffs = {}
    row_rhs = {}
    obj_row = None
    objsense_pending = False

    for raw in text.splitlines():
        if not raw.strip() or raw.lstrip().startswith("*"):
            continue
        head = raw[:1].strip() != ""  # section headers start in column 0
        fields = raw.split()
        if head and fields[0] in (
            "NAME", "OBJSENSE", "ROWS", "COLUMNS", "RHS", "RANGES", "BOUNDS", "ENDATA",
        ):
            section = fields[0]
            if section == "OBJSENSE" and len(fields) > 1:
                model.maximize = fields[1].upper().startswith("MAX")
            objsense_pending = section == "OBJSENSE" and len(fields) == 1
            if section == "ENDATA":
                break
            continue
        if objsense_pending:
            model.maximize = fields[0].upper().startswith("MAX")
            objsense_pending = False
            continue
        if section == "ROWS":
            kind, name = fields[0].upper(), fields[1]
            if kind == "N":
                if obj_row is None:
                    obj_row = name
            else:
                row_rel[name] = {"L": "<=", "G": ">=", "E": "="}[kind]
                row_order.append(name)
                row_coeffs[name] = {}
        elif section == "COLUMNS":
            if len(fields) >= 3 and fields[1].startswith("'MARKER'"):
                integer_mode = fields[2].startswith("'INTORG'")
                continue
            if len(fields) >= 3 and "'MARKER'" in raw:
                integer_mode = "'INTORG'" in raw
                continue
            col = model.col(fields[0])
            if integer_mode:
                model.integer.add(col)
            pairs = fields[1:]
            for k in range(0, len(pairs) - 1, 2):
                row, coeff = pairs[k], float(pairs[k + 1])
                if row == obj_row:
                    model.objective[col] = model.objective.get(col, 0.0) + coeff
                else:
                    row_coeffs[row][col] = row_coeffs[row].get(col, 0.0) + coeff
        elif section == "RHS":
            pairs = fields[1:]
            for k in range(0, len(pairs) - 1, 2):
                row_rhs[pairs[k]] = float(pairs[k + 1])
        elif section == "RANGES":
            raise ValueError("RANGES sections are not supported")
        elif section == "BOUNDS":
            kind = fields[0].upper()
            col = model.col(fields[2])
            value = float(fields[3]) if len(fields) > 3 else 0.0
            if kind in ("UP", "UI"):
                model.upper[col] = value
            elif kind in ("LO", "LI"):
                model.lower[col] = value
            elif kind == "FX":
                model.lower[col] = model.upper[col] = value
            elif kind == "PL":
                model.upper[col] = INF
            elif kind == "MI":
                model.lower[col] = -INF
            elif kind == "BV":
                model.lower[col], model.upper[col] = 0.0, 1.0
                model.integer.add(col)
            elif kind == "FR":
                model.lower[col], model.upper[col] = -INF, INF
            else:
                raise ValueError(f"unsupported bound kind {kind}")
    for name in row_order:
        model.rows.append((name, row_coeffs[name], row_rel[name], row_rhs.get(name, 0.0)))
    return model


def load_model(path):
    with open(path, "r") as fh:
        text = fh.read()
    if path.endswith(".mps") or text.lstrip().startswith(("NAME", "ROWS", "OBJSENSE")):
        return parse_mps(text)
    return parse_lp(text)


def solve(model, time_limit, lp_hint):
    """Returns a dict with the solution-file fields (max-sense values)."""
    ncols = len(model.col_names)
    sense = -1.0 if model.maximize else 1.0  # scipy minimizes
    c = np.zeros(ncols)
    for col, coeff in model.objective.items():
        c[col] = sense * coeff
    lower = np.array([model.lower.get(j, 0.0) for j in range(ncols)])
    upper = np.array([model.upper.get(j, INF) for j in range(ncols)])

    out = {"status": "error", "columns": {}, "message": ""}

    def to_out_objective(fun):
        return sense * fun

    if model.integer:
        rows_lb, rows_ub, data, ri, ci = [], [], [], [], []
        for k, (_, coeffs, rel, rhs) in enumerate(model.rows):
            for col, coeff in coeffs.items():
                ri.append(k)
                ci.append(col)
                data.append(coeff)
            rows_lb.append(rhs if rel in ("=", ">=") else -INF)
            rows_ub.append(rhs if rel in ("=", "<=") else INF)
        constraints = []
        if model.rows:
            a = sp.csr_matrix((data, (ri, ci)), shape=(len(model.rows), ncols))
            constraints = LinearConstraint(a, np.array(rows_lb), np.array(rows_ub))
        integrality = np.zeros(ncols)
        for col in model.integer:
            integrality[col] = 1
        res = milp(
            c=c,
            constraints=constraints,
            integrality=integrality,
            bounds=Bounds(lower, upper),
            options={"time_limit": time_limit, "mip_rel_gap": 0.0},
        )
        if res.status == 0:
            out["status"] = "optimal"
        elif res.status == 1:
            out["status"] = "time_limit"
        elif res.status == 2:
            out["status"] = "infeasible"
        else:
            out["status"] = "error"
            out["message"] = res.message.replace("\n", " ")
        if res.x is not None:
            out["objective"] = to_out_objective(res.fun)
            out["columns"] = {
                model.col_names[j]: res.x[j] for j in range(ncols) if abs(res.x[j]) > 1e-11
            }
        bound = getattr(res, "mip_dual_bound", None)
        if bound is not None and np.isfinite(bound):
            out["bound"] = to_out_objective(bound)
        elif res.status == 0 and res.x is not None:
            out["bound"] = to_out_objective(res.fun)
        return out

    # Pure LP: split rows into <= / = parts (>= rows are negated).
    ub_data, ub_ri, ub_ci, b_ub, ub_rows = [], [], [], [], []
    eq_data, eq_ri, eq_ci, b_eq, eq_rows = [], [], [], [], []
    for k, (name, coeffs, rel, rhs) in enumerate(model.rows):
        if rel == "=":
            for col, coeff in coeffs.items():
                eq_ri.append(len(b_eq))
                eq_ci.append(col)
                eq_data.append(coeff)
            b_eq.append(rhs)
            eq_rows.append((k, 1.0))
        else:
            flip = 1.0 if rel == "<=" else -1.0
            for col, coeff in coeffs.items():
                ub_ri.append(len(b_ub))
                ub_ci.append(col)
                ub_data.append(flip * coeff)
            b_ub.append(flip * rhs)
            ub_rows.append((k, flip))
    a_ub = sp.csr_matrix((ub_data, (ub_ri, ub_ci)), shape=(len(b_ub), ncols)) if b_ub else None
    a_eq = sp.csr_matrix((eq_data, (eq_ri, eq_ci)), shape=(len(b_eq), ncols)) if b_eq else None
    method = {"dual-simplex": "highs-ds", "barrier": "highs-ipm"}.get(lp_hint, "highs")
    res = linprog(
        c,
        A_ub=a_ub,
        b_ub=np.array(b_ub) if b_ub else None,
        A_eq=a_eq,
        b_eq=np.array(b_eq) if b_eq else None,
        bounds=np.column_stack((lower, upper)),
        method=method,
        options={"time_limit": time_limit},
    )
    if res.status == 0:
        out["status"] = "optimal"
    elif res.status == 1:
        out["status"] = "time_limit"
    elif res.status == 2:
        out["status"] = "infeasible"
    else:
        out["status"] = "error"
        out["message"] = str(getattr(res, "message", "")).replace("\n", " ")
    if res.status == 0:
        out["objective"] = to_out_objective(res.fun)
        out["bound"] = to_out_objective(res.fun)
        out["columns"] = {
            model.col_names[j]: res.x[j] for j in range(ncols) if abs(res.x[j]) > 1e-11
        }
        # Duals and reduced costs, reported in max sense when maximizing:
        # scipy marginals are d(min objective)/d(rhs).
        duals = {}
        if res.ineqlin is not None and len(ub_rows):
            for (k, flip), marg in zip(ub_rows, res.ineqlin.marginals):
                duals[model.rows[k][0]] = sense * flip * marg
        if res.eqlin is not None and len(eq_rows):
            for (k, _), marg in zip(eq_rows, res.eqlin.marginals):
                duals[model.rows[k][0]] = sense * marg
        out["duals"] = duals
        rc = res.lower.marginals + res.upper.marginals
        out["rcosts"] = {model.col_names[j]: sense * rc[j] for j in range(ncols)}
    return out


def format_value(v):
    return repr(float(v))


def write_solution(path, out):
    lines = [f"status {out['status']}"]
    if "objective" in out:
        lines.append(f"objective {format_value(out['objective'])}")
    if "bound" in out:
        lines.append(f"bound {format_value(out['bound'])}")
    if out.get("message"):
        lines.append(f"message {out['message']}")
    cols = out.get("columns", {})
    lines.append(f"columns {len(cols)}")
    for name, value in cols.items():
        lines.append(f"{name} {format_value(value)}")
    for key in ("duals", "rcosts"):
        if key in out:
            section = out[key]
            lines.append(f"{key} {len(section)}")
            for name, value in section.items():
                lines.append(f"{name} {format_value(value)}")
    lines.append("end")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def run_job(model_path, solution_path, time_limit, lp_hint):
    model = load_model(model_path)
    out = solve(model, time_limit, lp_hint)
    write_solution(solution_path, out)


def serve():
    for line in sys.stdin:
        line = line.rstrip("\n")
        if not line:
            continue
        fields = line.split("\t")
        try:
            model_path, solution_path = fields[0], fields[1]
            time_limit = float(fields[2]) if len(fields) > 2 else 1e30
            lp_hint = fields[5] if len(fields) > 5 else "auto"
            run_job(model_path, solution_path, time_limit, lp_hint)
            print("ok", flush=True)
        except Exception as ex:  # noqa: BLE001 - report and keep serving
            print(f"error {type(ex).__name__}: {ex}".replace("\n", " "), flush=True)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--model")
    ap.add_argument("--solution")
    ap.add_argument("--time-limit", type=float, default=1e30)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--lp-hint", default="auto")
    ap.add_argument("--warm", default="-")
    ap.add_argument("--serve", action="store_true")
    args = ap.parse_args()
    if args.serve:
        serve()
        return 0
    if not args.model or not args.solution:
        ap.error("--model and --solution are required outside --serve")
    run_job(args.model, args.solution, args.time_limit, args.lp_hint)
    return 0


if __name__ == "__main__":
    sys.exit(main())
