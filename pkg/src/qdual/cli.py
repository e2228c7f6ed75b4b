"""Command-line entry point ``qdual``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import collective, criteria, duality, eraser, reproduce
from ._expr import evaluate
from .errors import QdualError, StateParseError
from .fock import parse_state
from .qstate import NAMED_STATES, DensityMatrix, min_pt_eigenvalue, named_ket, named_state, werner
from .verdict import VIOLATION_TOL


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return None if not math.isfinite(obj) else float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def render(data, fmt: str) -> str:
    data = _jsonable(data)
    if fmt == "json":
        return json.dumps(data, indent=2)
    rows = data if isinstance(data, list) else data.get("rows", [data]) if isinstance(data, dict) else [data]
    rows = [_flatten(r) if isinstance(r, dict) else {"value": r} for r in rows]
    if fmt == "csv":
        buf = io.StringIO()
        fields = list(dict.fromkeys(k for r in rows for k in r))
        w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        return buf.getvalue()
    lines = []
    if isinstance(data, dict) and "rows" in data:
        lines.append("  ".join(f"{k}={v}" for k, v in data.items() if k != "rows"))
    for r in rows:
        lines.append("  ".join(f"{k}={v}" for k, v in r.items()))
    return "\n".join(lines) + "\n"


def emit(args, data) -> None:
    text = render(data, args.format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


# -- state inputs -----------------------------------------------------------------------------


def load_density(text: str) -> DensityMatrix:
    """Named state, ``rho_alpha:<a>``, ``upb``, ``werner:<bell>:<p>`` or a JSON file."""
    if text in NAMED_STATES:
        return named_state(text)
    if text.startswith("rho_alpha:"):
        return criteria.rho_alpha(float(text.split(":", 1)[1]))
    if text == "upb":
        return criteria.shifts_upb_state()
    if text.startswith("werner:"):
        _, name, p = text.split(":")
        ket, dims = named_ket(f"bell:{name}")
        return werner(ket, float(p), dims)
    path = Path(text)
    if path.exists():
        return DensityMatrix.from_json(path.read_text())
    raise StateParseError(f"unknown state {text!r}")


def _parse_range(text: str) -> np.ndarray:
    start, stop, step = (float(x) for x in text.split(":"))
    n = int(round((stop - start) / step))
    return np.round(start + step * np.arange(n + 1), 10)


# -- subcommands -----------------------------------------------------------------------------------


def cmd_duality(args) -> int:
    if args.table:
        rep = reproduce.reproduce(f"table{args.table}")
        emit(args, rep.to_dict())
        return 0 if rep.passed else 1
    if not args.state:
        raise StateParseError("--state or --table is required")
    state = parse_state(args.state, cutoff=args.cutoff)
    report = duality.duality_check(state, args.k)
    out = report.to_dict()
    if report.defined:
        out["entanglement_by_visibility"] = duality.entanglement_by_visibility(state, args.k, args.tolerance).to_dict()
        out["entanglement_by_distinguishability"] = duality.entanglement_by_distinguishability(
            state, args.k, args.tolerance
        ).to_dict()
    emit(args, out)
    return 0


def _hoelder_initial(args):
    if args.config:
        raw = json.loads(Path(args.config).read_text())
        return {k: np.array([complex(re, im) for re, im in v]) for k, v in raw["vectors"].items()}
    return criteria.load_hoelder_config()


def cmd_criteria_run(args) -> int:
    rho = load_density(args.state)
    tol = args.tolerance
    name = args.criterion
    if name == "chsh":
        out = criteria.chsh(rho, *criteria.bell_settings(), tol=tol).to_dict()
    elif name == "pauli_sum":
        out = criteria.pauli_sum_witness(rho, tol=tol).to_dict()
    elif name == "cauchy_schwarz":
        if args.optimize:
            res = criteria.optimize_cauchy_schwarz(rho, args.restarts, args.seed, tol)
            out = res.verdict.to_dict() | {"vectors": res.vectors}
        else:
            # fixed choice testing |rho_{01,10}|^2 <= rho_{00,00} rho_{11,11}
            e0, e1 = np.eye(2)
            a1, a2 = criteria.rank_one_pair(e1, e0, 2)
            b1, b2 = criteria.rank_one_pair(e0, e1, 2)
            out = criteria.cauchy_schwarz_criterion(rho, a1, a2, b1, b2, tol).to_dict()
    elif name == "bs":
        out = [v.to_dict() for v in criteria.tripartite_biseparable_test(rho, tol)]
    elif name == "sep":
        out = [v.to_dict() for v in criteria.tripartite_full_separability_test(rho, tol)]
    elif name == "hoelder4":
        init = _hoelder_initial(args)
        if args.optimize:
            res = criteria.optimize_hoelder(rho, args.restarts, args.seed, initial=init, tol=tol)
            out = res.verdict.to_dict() | {"vectors": res.vectors}
        else:
            out = criteria.hoelder_four_root_criterion(rho, *criteria.hoelder_operators(init, rho.dims), tol=tol).to_dict()
    elif name == "ppt":
        out = {"min_pt_eigenvalue": min_pt_eigenvalue(rho), "npt": min_pt_eigenvalue(rho) < -tol}
    elif name == "classify":
        out = criteria.classify_tripartite(rho, args.restarts if args.optimize else 0, args.seed, tol).to_dict()
    else:
        raise QdualError(f"unknown criterion {name!r}")
    emit(args, out)
    return 0


def cmd_rho_alpha(args) -> int:
    rows = reproduce.rho_alpha_scan(_parse_range(args.scan), args.restarts, args.seed, not args.no_hoelder)
    emit(args, rows)
    return 0


def cmd_eraser(args) -> int:
    table = eraser.eraser_probabilities(branch_p=args.branch_p)
    counts = eraser.sample_clicks(table, args.shots, args.seed)
    out = table.to_dict()
    out["counts"] = {
        f"{a},{b}": int(counts[i, j]) for i, a in enumerate(eraser.A_LABELS) for j, b in enumerate(eraser.B_LABELS)
    }
    out["empirical"] = eraser.empirical_visibilities(counts)
    emit(args, out)
    return 0


def cmd_figure6(args) -> int:
    emit(args, collective.figure6_sweep(args.n))
    return 0


def cmd_depth_curve(args) -> int:
    grid = np.linspace(0, 1, args.points)
    curve = collective.depth_bound_curve(args.n, args.k, grid, args.restarts, args.seed)
    emit(args, curve.rows())
    return 0


def cmd_reproduce(args) -> int:
    targets = reproduce.TARGETS if args.target == "all" else [args.target]
    reports = [reproduce.reproduce(t, seed=args.seed, restarts=args.restarts) for t in targets]
    if args.format == "text" and not args.out:
        for rep in reports:
            print(f"[{'pass' if rep.passed else 'FAIL'}] {rep.target}")
            for r in rep.rows:
                mark = "ok  " if r.passed else "FAIL"
                print(f"  {mark} {r.quantity:<36} ref={r.reference:<22} got={r.computed:<24} {r.convention}")
    else:
        data = [rep.to_dict() for rep in reports]
        if args.format == "csv":
            data = [dict(target=rep.target, **row.to_dict()) for rep in reports for row in rep.rows]
        emit(args, data if len(data) != 1 or args.format == "csv" else data[0])
    return 0 if all(r.passed for r in reports) else 1


def cmd_classical_bound(args) -> int:
    if args.fixed is not None:
        fixed = {}
        for item in args.fixed.split(","):
            key, _, val = item.partition("=")
            key = key.strip().upper().lstrip("E")
            fixed[(int(key[0]), int(key[1]))] = float(eval_number(val))
        lo, hi = criteria.classical_correlation_bound(fixed)
    elif args.p1 is not None:
        lo, hi = criteria.classical_sock_bound(args.p1, 1 - args.p1 if args.p2 is None else args.p2)
    else:
        lo, hi = criteria.classical_sock_bound(*criteria.sock_probabilities_for(-1 / math.sqrt(2)))
    emit(args, {"target": "E12", "min": lo, "max": hi})
    return 0


def eval_number(text: str) -> float:
    return evaluate(text).real


# -- parser -------------------------------------------------------------------------------------------


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    """Global flags; sub-commands repeat them without defaults so either position works."""
    g = argparse.ArgumentParser(add_help=False)
    dflt = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    g.add_argument("--seed", type=int, default=dflt(0), help="seed for every random generator")
    g.add_argument("--tolerance", type=float, default=dflt(VIOLATION_TOL), help="violation tolerance")
    g.add_argument("--out", default=dflt(None), help="write output to this file instead of stdout")
    g.add_argument(
        "--format", choices=("json", "csv", "text"), default=dflt(None), help="default json (text for reproduce)"
    )
    return g


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags(suppress=True)
    p = argparse.ArgumentParser(prog="qdual", description=__doc__, parents=[_global_flags(suppress=False)])
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("duality", parents=[common], help="D_k, V_k, C_k, W_k of a two-mode state")
    d.add_argument("--state", help='ket literal such as "(1/sqrt(2))|1,0> + (1/sqrt(2))|0,1>"')
    d.add_argument("--k", type=int, default=1)
    d.add_argument("--cutoff", type=int, default=8)
    d.add_argument("--table", choices=("1", "2", "3"), help="reproduce a duality table")
    d.set_defaults(func=cmd_duality)

    c = sub.add_parser("criteria", parents=[common], help="entanglement criteria")
    csub = c.add_subparsers(dest="criteria_command", required=True)
    run = csub.add_parser("run", parents=[common])
    run.add_argument("--state", required=True, help=f"one of {', '.join(NAMED_STATES)}, rho_alpha:<a>, upb, werner:<bell>:<p>, or a JSON file")
    run.add_argument("--criterion", required=True, choices=criteria.CRITERIA)
    run.add_argument("--optimize", action="store_true", help="search rank-one operators")
    run.add_argument("--restarts", type=int, default=64)
    run.add_argument("--config", help="JSON file with operator vectors for hoelder4")
    run.set_defaults(func=cmd_criteria_run)
    ra = csub.add_parser("rho-alpha", parents=[common])
    ra.add_argument("--scan", default="2.0:2.9:0.01", help="start:stop:step")
    ra.add_argument("--restarts", type=int, default=16)
    ra.add_argument("--no-hoelder", action="store_true", help="partial transposes only")
    ra.set_defaults(func=cmd_rho_alpha)

    e = sub.add_parser("eraser", parents=[common], help="delayed-choice eraser statistics")
    e.add_argument("--shots", type=int, default=10**6)
    e.add_argument("--branch-p", type=float, default=0.5)
    e.set_defaults(func=cmd_eraser)

    col = sub.add_parser("collective", parents=[common], help="collective spin bounds")
    colsub = col.add_subparsers(dest="collective_command", required=True)
    f6 = colsub.add_parser("figure6", parents=[common])
    f6.add_argument("--n", type=int, default=16)
    f6.set_defaults(func=cmd_figure6)
    dc = colsub.add_parser("depth-curve", parents=[common])
    dc.add_argument("--n", type=int, required=True)
    dc.add_argument("--k", type=int, required=True)
    dc.add_argument("--points", type=int, default=21)
    dc.add_argument("--restarts", type=int, default=32)
    dc.set_defaults(func=cmd_depth_curve)

    r = sub.add_parser("reproduce", parents=[common], help="recompute reference tables and windows")
    r.add_argument("target", choices=reproduce.TARGETS + ("all",))
    r.add_argument("--restarts", type=int, default=16)
    r.set_defaults(func=cmd_reproduce, default_format="text")

    cb = sub.add_parser("classical-bound", parents=[common], help="classical range of <A1 B2>")
    cb.add_argument("--p1", type=float)
    cb.add_argument("--p2", type=float)
    cb.add_argument("--fixed", help='e.g. "E11=-1/sqrt(2),E22=-1/sqrt(2),E21=-1/sqrt(2)"')
    cb.set_defaults(func=cmd_classical_bound)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = getattr(args, "default_format", "json")
    try:
        return args.func(args)
    except QdualError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
