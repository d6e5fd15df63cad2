"""Command-line interface.

Exit status: 0 on success, 2 for input errors (bad flags, unreadable or
malformed CSV, dimension mismatches), 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys

import numpy as np

from .cluster import fcm
from .decomposition import PopulationModel, decompose
from .depth import KINDS, DepthSpec, compute_depth
from .exceptions import InputError, NumericFailure
from .geometry import scale_curve
from .qstat import run_test
from .ratestudy import QUANTITIES, StudyConfig, chi_square_attraction_check, run_study

log = logging.getLogger("depthq")


def parse_csv(path: str, has_header: bool = False) -> np.ndarray:
    """Read a numeric CSV into an (m, d) float matrix."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc
    numbered = [(i + 1, r) for i, r in enumerate(rows) if any(cell.strip() for cell in r)]
    if has_header and numbered:
        numbered = numbered[1:]
    if not numbered:
        raise InputError(f"{path}: no data rows")
    width = len(numbered[0][1])
    out = np.empty((len(numbered), width))
    for k, (line, row) in enumerate(numbered):
        if len(row) != width:
            raise InputError(f"{path}: row {line} has {len(row)} columns, expected {width}")
        for col, cell in enumerate(row):
            try:
                out[k, col] = float(cell)
            except ValueError:
                raise InputError(
                    f"{path}: row {line}, column {col + 1}: non-numeric value {cell!r}") from None
            if not np.isfinite(out[k, col]):
                raise InputError(f"{path}: row {line}, column {col + 1}: value is not finite")
    return out


def _num(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(f"{float(v):.9g}")
    if isinstance(v, dict):
        return {k: _num(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_num(x) for x in v]
    return v


def dumps(obj) -> str:
    """JSON with fixed key order and 9 significant digits."""
    return json.dumps(_num(obj), indent=2) + "\n"


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _spec(args) -> DepthSpec:
    return DepthSpec(args.depth, args.directions, args.seed)


def cmd_test(args) -> str:
    x = parse_csv(args.x, args.header)
    y = parse_csv(args.y, args.header)
    report = run_test(x, y, _spec(args))
    if args.verbose:
        r = report
        print(f"Q(F_m,G_n)={r.qpair.q_fg:.4f}  Q(G_n,F_m)={r.qpair.q_gf:.4f}  "
              f"p-values: {r.p_q_fg:.3f} {r.p_q_gf:.3f} {r.p_m:.3f} {r.p_m_star:.3f}",
              file=sys.stderr)
    return dumps(report.as_dict())


def cmd_depth(args) -> str:
    data = parse_csv(args.data, args.header)
    points = parse_csv(args.points, args.header)
    depths = compute_depth(points, data, _spec(args))
    return "".join(f"{v:.9g}\n" for v in depths)


def cmd_rate_study(args) -> str:
    config = StudyConfig(dim=args.dim, sizes=tuple(args.sizes), reps=args.reps,
                         seed=args.seed, depth=_spec(args), quantity=args.quantity)
    result = run_study(config, n_jobs=args.jobs)
    out = {"quantity": config.quantity, "dim": config.dim, "reps": config.reps,
           "seed": config.seed, "depth": config.depth.kind}
    out.update(result.as_dict())
    if args.attraction:
        check = chi_square_attraction_check(config, n_jobs=args.jobs)
        out["attraction"] = check._asdict()
    if args.csv:
        lines = ["size,mean_abs"] + [f"{s},{v:.9g}" for s, v in result.per_size_mean_abs]
        with open(args.csv, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    return dumps(out)


def cmd_scale_curve(args) -> str:
    data = parse_csv(args.data, args.header)
    curve = scale_curve(data, _spec(args), args.fractions, args.mc_samples, args.seed)
    return curve.to_csv()


def cmd_fcm(args) -> str:
    data = parse_csv(args.data, args.header)
    res = fcm(data, args.clusters, args.fuzzifier, args.tol, args.max_iter, args.seed)
    if args.memberships_out:
        with open(args.memberships_out, "w") as fh:
            fh.write(",".join(f"u{k}" for k in range(args.clusters)) + "\n")
            for row in res.memberships:
                fh.write(",".join(f"{v:.9g}" for v in row) + "\n")
    if args.labels_out:
        with open(args.labels_out, "w") as fh:
            fh.write("label\n" + "".join(f"{int(k)}\n" for k in res.hard_labels))
    return dumps({
        "clusters": args.clusters,
        "fuzzifier": args.fuzzifier,
        "seed": args.seed,
        "iterations": res.n_iter,
        "objective": res.objective_trace[-1],
        "centers": res.centers.tolist(),
        "cluster_sizes": np.bincount(res.hard_labels, minlength=args.clusters).tolist(),
    })


def cmd_decompose(args) -> str:
    x = parse_csv(args.x, args.header)
    y = parse_csv(args.y, args.header)
    d = x.shape[1]
    mean = np.asarray(args.mean, dtype=float) if args.mean else np.zeros(d)
    cov = parse_csv(args.cov, args.header) if args.cov else np.eye(d)
    report = decompose(x, y, PopulationModel(mean, cov))
    return dumps(vars(report))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="depthq", description="Depth-based two-sample tests.")
    parser.add_argument("--verbose", action="store_true", help="summary on standard error")
    sub = parser.add_subparsers(dest="command", required=True)

    def depth_opts(p, default="mahalanobis"):
        p.add_argument("--depth", choices=KINDS, default=default)
        p.add_argument("--directions", type=int, default=500)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--header", action="store_true", help="input CSVs start with a header row")
        p.add_argument("--verbose", action="store_true", default=argparse.SUPPRESS)

    p = sub.add_parser("test", help="two-sample test of --x against --y")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    depth_opts(p)
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("depth", help="depth of --points with respect to --data")
    p.add_argument("--data", required=True)
    p.add_argument("--points", required=True)
    depth_opts(p)
    p.set_defaults(func=cmd_depth)

    p = sub.add_parser("rate-study", help="Monte Carlo rate study under the null")
    p.add_argument("--quantity", choices=QUANTITIES, default="q_dev")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--sizes", type=_int_list, default=[64, 128, 256, 512, 1024])
    p.add_argument("--reps", type=int, default=500)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--csv", help="also write a size,mean_abs table here")
    p.add_argument("--attraction", action="store_true",
                   help="add chi-square attraction KS distances at the largest size")
    depth_opts(p)
    p.set_defaults(func=cmd_rate_study)

    p = sub.add_parser("scale-curve", help="hull volume of the deepest fractions")
    p.add_argument("--data", required=True)
    p.add_argument("--fractions", type=_float_list,
                   default=[round(0.05 * k, 2) for k in range(1, 21)])
    p.add_argument("--mc-samples", type=int, default=200_000)
    depth_opts(p)
    p.set_defaults(func=cmd_scale_curve)

    p = sub.add_parser("fcm", help="fuzzy c-means clustering")
    p.add_argument("--data", required=True)
    p.add_argument("--clusters", type=int, default=3)
    p.add_argument("--fuzzifier", type=float, default=2.0)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--header", action="store_true")
    p.add_argument("--memberships-out")
    p.add_argument("--labels-out")
    p.add_argument("--verbose", action="store_true", default=argparse.SUPPRESS)
    p.set_defaults(func=cmd_fcm)

    p = sub.add_parser("decompose", help="main terms and remainders under a Gaussian model")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--mean", type=_float_list, help="model mean (default: zero)")
    p.add_argument("--cov", help="CSV with the model covariance (default: identity)")
    p.add_argument("--header", action="store_true")
    p.add_argument("--verbose", action="store_true", default=argparse.SUPPRESS)
    p.set_defaults(func=cmd_decompose)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(message)s")
    try:
        output = args.func(args)
    except (InputError, ValueError, OSError) as exc:
        print(f"depthq {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except NumericFailure as exc:
        print(f"depthq {args.command}: numeric failure: {exc}", file=sys.stderr)
        return 3
    sys.stdout.write(output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
