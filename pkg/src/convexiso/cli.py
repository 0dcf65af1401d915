"""Command-line entry point: ``convexiso {isotropy, verify, search}``.

Exit codes: 0 success, 2 input error, 3 degenerate geometry, 4 a
verification contract failed.
"""
import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import caps, perturbation
from .errors import ConvexIsoError, CorruptFile, DegenerateBody, FormatVersionMismatch
from .geometry import Ball, body_from_dict, cube, regular_polygon
from .isotropy import check_isotropic, isotropic_frame

EXIT_OK, EXIT_INPUT, EXIT_DEGENERATE, EXIT_CONTRACT = 0, 2, 3, 4
SUITES = ("prop4", "caps", "lemma5", "contradiction")
DEFAULT_SCALES = [2.0 ** -k for k in range(4, 11)]
ORDER_TARGET, ORDER_TOL = 2.0, 0.3
CAP_SLOPE_TOL = 0.05


class InputError(Exception):
    pass


class ContractFailure(Exception):
    def __init__(self, row):
        self.row = row
        super().__init__(f"contract violated: {row}")


# ---------------------------------------------------------------------------
# input helpers
# ---------------------------------------------------------------------------

def _builtin_body(name, n):
    if name == "disc":
        return Ball(np.zeros(2), 1.0)
    if name == "ball":
        return Ball(np.zeros(n), 1.0)
    if name == "square":
        return cube(2)
    if name == "cube":
        return cube(n)
    if name == "triangle":
        return regular_polygon(3)
    return None


def load_body(spec, n=2):
    """Body from a JSON file or one of: disc, ball, square, cube, triangle."""
    K = _builtin_body(spec, n)
    if K is not None:
        return K
    if not os.path.isfile(spec):
        raise InputError(f"body file not found: {spec}")
    try:
        with open(spec) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot parse {spec}: {exc}") from exc
    if not isinstance(doc, dict):
        raise InputError(f"{spec}: expected a JSON object")
    try:
        return body_from_dict(doc)
    except DegenerateBody:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{spec}: invalid body: {exc}") from exc


def _parse_floats(text):
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise InputError(f"bad number list {text!r}") from exc
    if not vals:
        raise InputError("empty number list")
    return vals


def _check_out(path):
    if path is None:
        return
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent):
        raise InputError(f"output directory does not exist: {parent}")


def _emit(text, path):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _to_json(obj):
    def default(o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, (np.floating, np.integer, np.bool_)):
            return o.item()
        raise TypeError(type(o).__name__)
    return json.dumps(obj, indent=1, default=default) + "\n"


def _table(columns, rows, fmt):
    if fmt == "json":
        return _to_json([dict(zip(columns, r)) for r in rows])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_isotropy(args):
    K = load_body(args.body, args.n)
    frame = isotropic_frame(K)
    image = frame.apply_body(K)
    rep = check_isotropic(image, args.tol if args.tol is not None else 1e-9)
    doc = {"L_K": frame.L_K, "M_K": frame.M_K, "volume": frame.volume,
           "frame": frame.to_dict(), "check": rep.to_dict()}
    _emit(_to_json(doc), args.out)
    return EXIT_OK


def _verify_prop4(args):
    K = load_body(args.body or "disc", args.n)
    frame = isotropic_frame(K)
    K = frame.apply_body(K)
    scales = _parse_floats(args.scales) if args.scales else DEFAULT_SCALES
    n = K.dim
    u = np.eye(n)[0]
    kinds = ["slab", "spike"] if args.kind == "both" else [args.kind]
    cols = ("kind",) + perturbation.SCHEDULE_COLUMNS + ("order_fit",)
    rows, bad = [], None
    for kind in kinds:
        sched = perturbation.prop4_schedule(K, u, scales, kind)
        order = perturbation.prop4_error_order(K, u, scales, kind)
        for r in sched:
            rows.append([kind] + [r[c] for c in perturbation.SCHEDULE_COLUMNS] + [order])
        if abs(order - ORDER_TARGET) > ORDER_TOL and bad is None:
            bad = rows[-len(sched)]
    return cols, rows, bad


def _verify_caps(args):
    R = args.R
    a_values = _parse_floats(args.a_schedule) if args.a_schedule else [R * 1e-2, R * 1e-3, R * 1e-4]
    if any(a >= R / 4 for a in a_values):
        raise InputError("every a must be below R/4")
    rows, fits = caps.verify_caps(args.n, R, a_values, args.b)
    expected = caps.expected_cap_orders(args.n)
    cols = caps.CAP_COLUMNS + ("expected_order",)
    out, bad = [], None
    for r in rows:
        row = r + [expected[r[4]]]
        out.append(row)
        ok = row[11] and abs(row[12] - row[13]) <= CAP_SLOPE_TOL
        if not ok and bad is None:
            bad = row
    return cols, out, bad


def _verify_lemma5(args):
    n = args.n
    tol = args.tol if args.tol is not None else 1e-12
    B = Ball(np.zeros(n), 1.0)
    rng = np.random.default_rng(args.seed)
    cols = ("check", "index", "value", "target", "error", "passed")
    rows, bad = [], None
    X = rng.normal(size=(100, n))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    for i, x in enumerate(X):
        v = perturbation.sphere_condition_residual(B, x)
        rows.append(["sphere_residual", i, v, 0.0, abs(v), abs(v) <= tol])
    x0 = X[0]
    for i, r in enumerate(perturbation.shrinking_spike_schedule(B, x0, x0, [1e-1, 1e-2, 1e-3])):
        passed = r["error"] < 1e-3 if i == 2 else True
        rows.append(["spike_ratio", r["diameter"], r["ratio"], r["target"], r["error"], passed])
    for row in rows:
        if not row[-1]:
            bad = row
            break
    return cols, rows, bad


def _verify_contradiction(args):
    if args.n_max < 2:
        raise InputError("--n-max must be at least 2")
    cols = ("n", "c_out", "c_in", "verdict")
    rows, bad = [], None
    for n in range(2, args.n_max + 1):
        c_out, c_in, verdict = caps.contradiction_coefficients(n)
        rows.append([n, str(c_out), str(c_in), verdict])
        if not verdict and bad is None:
            bad = rows[-1]
    return cols, rows, bad


def cmd_verify(args):
    suite = args.suite_opt or args.suite
    if suite not in SUITES:
        raise InputError(f"suite must be one of {', '.join(SUITES)}")
    runner = {"prop4": _verify_prop4, "caps": _verify_caps, "lemma5": _verify_lemma5,
              "contradiction": _verify_contradiction}[suite]
    cols, rows, bad = runner(args)
    _emit(_table(cols, rows, args.format), args.out)
    if bad is not None:
        raise ContractFailure({c: v.item() if isinstance(v, np.generic) else v for c, v in zip(cols, bad)})
    return EXIT_OK


def cmd_search(args):
    from .search import SearchConfig, hill_climb, multi_start, save_run

    if args.config is None:
        raise InputError("--config is required")
    try:
        with open(args.config) as fh:
            doc = json.load(fh)
        if args.seed_given:
            doc["seed"] = args.seed
        cfg = SearchConfig.from_dict(doc)
    except (OSError, json.JSONDecodeError, TypeError, ValueError) as exc:
        raise InputError(f"invalid search config: {exc}") from exc
    logs = [hill_climb(cfg)] if args.restarts == 1 else multi_start(cfg, args.restarts)
    best = (max if cfg.mode == "maximize" else min)(logs, key=lambda lg: lg.final_L)
    if args.out is not None:
        save_run(best, args.out)
    finals = ", ".join(f"{lg.final_L:.6f}" for lg in logs)
    print(f"mode={cfg.mode} n={cfg.n} vertices={cfg.vertices} restarts={args.restarts} "
          f"final L_K={best.final_L:.6f} (runs: {finals})")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

class _SeedAction(argparse.Action):
    def __call__(self, parser, namespace, values, option_string=None):
        setattr(namespace, self.dest, values)
        namespace.seed_given = True


def build_parser():
    p = argparse.ArgumentParser(prog="convexiso", description="Isotropy-constant toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", help="output path (default: standard output)")
        sp.add_argument("--seed", type=int, default=0, action=_SeedAction)
        sp.add_argument("--tol", type=float)
        sp.add_argument("--format", choices=("json", "csv"), default=None)
        sp.set_defaults(seed_given=False)

    sp = sub.add_parser("isotropy", help="isotropic frame and L_K of a body")
    sp.add_argument("--body", required=True, help="body JSON file or builtin name")
    sp.add_argument("--n", type=int, default=2)
    common(sp)
    sp.set_defaults(func=cmd_isotropy)

    sp = sub.add_parser("verify", help="run a verification suite")
    sp.add_argument("suite", nargs="?", choices=SUITES)
    sp.add_argument("--suite", dest="suite_opt", choices=SUITES)
    sp.add_argument("--body", help="body for prop4 (file or builtin; default disc)")
    sp.add_argument("--kind", choices=("slab", "spike", "both"), default="both")
    sp.add_argument("--scales", help="comma-separated decreasing scales for prop4")
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--R", type=float, default=1.0)
    sp.add_argument("--b", type=float, default=0.0)
    sp.add_argument("--a-schedule", dest="a_schedule", help="comma-separated cap heights")
    sp.add_argument("--n-max", dest="n_max", type=int, default=64)
    common(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("search", help="hill-climbing search over polytopes")
    sp.add_argument("--config", help="SearchConfig JSON file")
    sp.add_argument("--restarts", type=int, default=1)
    common(sp)
    sp.set_defaults(func=cmd_search)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = "csv" if args.command == "verify" else "json"
    try:
        _check_out(args.out)
        return args.func(args)
    except ContractFailure as exc:
        print(f"contract failure: {exc.row}", file=sys.stderr)
        return EXIT_CONTRACT
    except DegenerateBody as exc:
        print(f"degenerate geometry: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (InputError, FormatVersionMismatch, CorruptFile) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ConvexIsoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
