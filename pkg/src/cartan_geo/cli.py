"""Command-line entry point.

Exit codes: 0 when every executed check passes, 1 when a check fails, 2 for
malformed input.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .connections import (
    alpha_connections,
    canonical_connection,
    check_duality,
    covariant_derivative_of_metric,
    dual_curvature_residual,
    hessian_check,
    torsion,
)
from .cs_metrics import MetricField, Strategy, check_cs_condition, signature, solve_cs_space
from .errors import CartanGeoError, DegenerateMetricError
from .fisher import (
    alpha_duality_residual,
    alpha_metric_derivative_residual,
    amari_chentsov,
    builtin_family,
    fisher_matrix,
    fisher_second_derivative_check,
    load_custom_family,
    metric_derivative_decomposition_check,
    score_mean_check,
    statistical_alpha_connection,
)
from .io import InputError, load_algebra, load_json, load_metric, load_points, load_tensor
from .lie_core import Chart, GroupPoint, HTypeSpec, make_heisenberg
from .mean import Dataset, barycenter_fixed_point, mean_in_chart, mean_report, parametric_mean_closed_form
from .verify import default_metric, run_suite, worker_count

EXIT_OK, EXIT_FAILED, EXIT_INPUT = 0, 1, 2


class _Sink:
    """Serialized output: stdout or a file given by ``--out``."""

    def __init__(self, path):
        self.fh = open(path, "w") if path else sys.stdout
        self.owned = bool(path)

    def line(self, obj):
        self.fh.write(json.dumps(obj) + "\n")

    def close(self):
        if self.owned:
            self.fh.close()
        else:
            self.fh.flush()


def _matrix(m) -> list:
    return np.asarray(m, dtype=float).tolist()


def _check_line(name, residual, tol) -> dict:
    residual = float(residual)
    return {"check": name, "residual": residual, "tolerance": tol, "pass": bool(residual <= tol)}


# ---------------------------------------------------------------- commands


def cmd_cs_solve(args, sink) -> int:
    alg, _ = load_algebra(args.alg)
    space = solve_cs_space(alg)
    basis = []
    for b in space.basis_matrices:
        try:
            sig = list(signature(b))
        except DegenerateMetricError:
            sig = None
        basis.append({"matrix": _matrix(b), "signature": sig})
    samples = [
        {"nondegenerate": s["nondegenerate"], "signature": list(s["signature"]) if s["signature"] else None}
        for s in space.samples(5, seed=args.seed)
    ]
    sink.line({"dimension": space.dimension, "basis": basis, "samples": samples})
    return EXIT_OK


def _strategy_field(alg, htype, g, args) -> MetricField:
    strategy = Strategy(args.strategy)
    if strategy is Strategy.SERIES:
        return MetricField(alg, g, strategy, order=args.order)
    return MetricField(alg, g, strategy, htype=htype)


def cmd_metric_eval(args, sink) -> int:
    alg, htype = load_algebra(args.alg)
    g = load_metric(args.metric) if args.metric else default_metric(alg, args.seed)
    field = _strategy_field(alg, htype, g, args)
    pts = load_points(args.data, alg.dim)
    chart = Chart(args.chart)
    rows = []
    for q in pts:
        coeffs = field.coordinates(GroupPoint(chart, q))
        rows.append((q, coeffs))
        sink.line({"point": q.tolist(), "chart": chart.value, "coefficients": _matrix(coeffs)})
    if args.csv:
        d = alg.dim
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"q{i + 1}" for i in range(d)] + [f"g{i + 1}_{j + 1}" for i in range(d) for j in range(d)])
            for q, c in rows:
                w.writerow([repr(float(v)) for v in q] + [repr(float(v)) for v in c.ravel()])
    return EXIT_OK


def cmd_connections(args, sink) -> int:
    alg, _ = load_algebra(args.alg)
    g = load_metric(args.metric) if args.metric else default_metric(alg, args.seed)
    S = load_tensor(args.tensor, alg.dim)
    if S.dim != alg.dim:
        raise InputError("tensor and algebra dimensions differ")
    tol = args.tol if args.tol is not None else 1e-11
    rng = np.random.default_rng(args.seed)
    pts = [np.zeros(alg.dim)]
    if alg.is_two_step():
        pts += [0.7 * rng.standard_normal(alg.dim) for _ in range(4)]
    plus, minus = alpha_connections(alg, g, S, args.alpha)
    can = canonical_connection(alg)
    s = S.entries
    nab_plus = covariant_derivative_of_metric(alg, g, plus, pts)
    nab_minus = covariant_derivative_of_metric(alg, g, minus, pts)
    perms = [(0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]
    # unit-level product A with g(A(x, y), z) = S(x, y, z)
    product = np.einsum("ijq,qp->ijp", s, np.linalg.inv(g.matrix))
    residuals = [
        ("cs-condition", check_cs_condition(alg, g), tol),
        ("duality", check_duality(alg, g, plus, minus, pts), tol),
        ("pair-mean", max(np.max(np.abs(0.5 * (plus.at(p) + minus.at(p)) - can.gamma)) for p in pts), 1e-15),
        ("nabla-alpha-metric", max(np.max(np.abs(t - args.alpha * s)) for t in nab_plus), tol),
        ("nabla-minus-alpha-metric", max(np.max(np.abs(t + args.alpha * s)) for t in nab_minus), tol),
        ("total-symmetry", max(np.max(np.abs(t - t.transpose(p))) for t in nab_plus for p in perms), tol),
        ("dual-curvature", dual_curvature_residual(alg, g, plus, minus, pts), tol),
        ("torsion", max(np.max(np.abs(torsion(c, alg, p))) for c in (plus, minus) for p in pts), 1e-13),
        ("canonical-parallelism", max(np.max(np.abs(t)) for t in covariant_derivative_of_metric(alg, g, can, pts)), tol),
        ("hessian-condition", hessian_check(alg, g, product), tol),
    ]
    lines = [_check_line(*r) for r in residuals]
    for line in lines:
        sink.line(line)
    return EXIT_OK if all(line["pass"] for line in lines) else EXIT_FAILED


def _family(args):
    if args.family.endswith(".json"):
        return load_custom_family(args.family)
    return builtin_family(args.family, args.k)


def cmd_fisher(args, sink) -> int:
    fam = _family(args)
    theta = np.array([float(t) for t in args.theta.split(",")])
    tol = args.tol if args.tol is not None else 1e-6
    conn = statistical_alpha_connection(fam, theta, args.alpha)
    residuals = {
        "score_mean": score_mean_check(fam, theta),
        "second_derivative": fisher_second_derivative_check(fam, theta),
        "decomposition": metric_derivative_decomposition_check(fam, theta),
        "duality": alpha_duality_residual(fam, theta, args.alpha),
        "nabla_alpha_metric": alpha_metric_derivative_residual(fam, theta, args.alpha),
    }
    sink.line(
        {
            "family": fam.name,
            "theta": theta.tolist(),
            "alpha": args.alpha,
            "fisher": _matrix(fisher_matrix(fam, theta).matrix),
            "amari_chentsov": _matrix(amari_chentsov(fam, theta).entries),
            "christoffel_lowered": _matrix(conn.lowered),
            "christoffel_raised": None if conn.raised is None else _matrix(conn.raised),
            "residuals": residuals,
            "tolerance": tol,
            "pass": all(v <= tol for v in residuals.values()),
        }
    )
    return EXIT_OK if all(v <= tol for v in residuals.values()) else EXIT_FAILED


def _gamma_spec(path, n, m) -> HTypeSpec:
    data = load_json(path)
    if isinstance(data, dict) and data.get("kind", "htype") == "htype":
        n = int(data.get("n", n))
        m = int(data.get("m", m))
        return HTypeSpec.from_entries(n, m, data.get("gamma", []))
    raise InputError(f"{path}: expected an htype spec")


def cmd_mean(args, sink) -> int:
    tol = args.tol if args.tol is not None else 1e-12
    chart = Chart(args.chart)
    pts = load_points(args.data)
    if args.n is None or args.m is None:
        if chart is not Chart.HEISENBERG:
            raise InputError("--n and --m are required for exponential-chart data")
        args.n, args.m = pts.shape[1] - 1, 1
    data = Dataset(pts, chart, args.n, args.m)
    if args.sweep:
        files = sorted(Path(args.sweep).glob("*.json"))
        if not files:
            raise InputError(f"no parameter files in {args.sweep}")
        specs = [_gamma_spec(f, args.n, args.m) for f in files]
        with ThreadPoolExecutor(max_workers=worker_count()) as pool:
            rows = list(pool.map(lambda s: mean_report(s, data, [s])[0], specs))
        ok = True
        for f, row in zip(files, rows):
            row["gamma_id"] = f.name
            ok &= row["residual"] <= tol
            sink.line(row)
        return EXIT_OK if ok else EXIT_FAILED
    if chart is Chart.HEISENBERG:
        heis = make_heisenberg((data.dim - 1) // 2)
        res = mean_in_chart(heis, data)
    elif args.gamma:
        res = parametric_mean_closed_form(_gamma_spec(args.gamma, args.n, args.m), data)
    else:
        spec = HTypeSpec(args.n, args.m, np.zeros((args.m, args.n, args.n)))
        res = parametric_mean_closed_form(spec, data)
    out = res.to_dict()
    if args.alg:
        alg, _ = load_algebra(args.alg)
        fp = barycenter_fixed_point(alg, data, tol=tol)
        out["fixed_point"] = fp.to_dict()
    sink.line(out)
    return EXIT_OK if res.residual <= tol else EXIT_FAILED


def cmd_verify(args, sink) -> int:
    alg, _ = load_algebra(args.alg)
    g = load_metric(args.metric) if args.metric else None
    results = run_suite(alg, g, seed=args.seed, tol=args.tol)
    for r in results:
        sink.line(r.to_dict())
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILED


COMMANDS = {
    "cs-solve": cmd_cs_solve,
    "metric-eval": cmd_metric_eval,
    "connections": cmd_connections,
    "fisher": cmd_fisher,
    "mean": cmd_mean,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--tol", type=float, help="override the default tolerance")

    parser = argparse.ArgumentParser(prog="cartan-geo", description="Cartan-Schouten geometry on Lie groups.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cs-solve", parents=[common], help="space of Cartan-Schouten metrics of an algebra")
    p.add_argument("--alg", required=True)

    p = sub.add_parser("metric-eval", parents=[common], help="coordinate coefficients of a metric field")
    p.add_argument("--alg", required=True)
    p.add_argument("--metric")
    p.add_argument("--data", "--point", dest="data", required=True, help="CSV of points")
    p.add_argument("--chart", choices=[c.value for c in Chart], default="exp")
    p.add_argument("--strategy", choices=[s.value for s in Strategy], default=Strategy.CLOSED_FORM_2NIL.value)
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--csv", help="also write the coefficient grid as CSV")

    p = sub.add_parser("connections", parents=[common], help="alpha-connection residual report")
    p.add_argument("action", choices=["verify"])
    p.add_argument("--alg", required=True)
    p.add_argument("--metric")
    p.add_argument("--tensor", required=True)
    p.add_argument("--alpha", type=float, default=1.0)

    p = sub.add_parser("fisher", parents=[common], help="Fisher structures of a parametric family")
    p.add_argument("--family", required=True, help="bernoulli, categorical, gaussian1d or a JSON file")
    p.add_argument("--theta", required=True, help="comma-separated parameter values")
    p.add_argument("--k", type=int, help="number of categories")
    p.add_argument("--alpha", type=float, default=0.0)

    p = sub.add_parser("mean", parents=[common], help="biinvariant mean of a point cloud")
    p.add_argument("--data", required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--chart", choices=[c.value for c in Chart], default="exp")
    p.add_argument("--gamma", help="H-type parameter file")
    p.add_argument("--sweep", help="directory of H-type parameter files")
    p.add_argument("--alg", help="also run the fixed-point solver on this algebra")

    p = sub.add_parser("verify", parents=[common], help="randomized invariant suite")
    p.add_argument("--alg", required=True)
    p.add_argument("--metric")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        sink = _Sink(args.out)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc.strerror}", file=sys.stderr)
        return EXIT_INPUT
    try:
        return COMMANDS[args.command](args, sink)
    except (CartanGeoError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    finally:
        sink.close()


if __name__ == "__main__":
    sys.exit(main())

