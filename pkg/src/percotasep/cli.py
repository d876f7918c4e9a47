"""Command-line entry point.

One subcommand per estimator or verifier; every run is a pure function
of (subcommand parameters, seed). Exit codes: 0 success, 1 parameter
error, 2 verification failure (mismatches or bound violations), 3
capacity error.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import percotasep
from percotasep import rng as rng_mod
from percotasep.correspondence import verify_coupling
from percotasep.errors import (
    CapacityError,
    EstimationError,
    ParameterError,
    PercoTasepError,
)
from percotasep.estimator import (
    expected_distance_exact,
    lower_bound_check,
    monte_carlo_distance,
    stationary_start_expectation,
)
from percotasep.experiment import ExperimentResult, ExperimentSpec
from percotasep.plane import estimate_mu
from percotasep.strip import (
    Model,
    StripGeometry,
    cross_distance_profile,
    event_a_bound_report,
    parse_edges,
    sample_strip,
    standard_distance,
    dump_edges as dump_edges_text,
)
from percotasep.tasep import (
    EXACT_K_CAP,
    TasepRates,
    nu_pair_formula,
    nu_pair_simulated,
    stationary_exact,
)

EXIT_OK = 0
EXIT_PARAMETER = 1
EXIT_VERIFICATION = 2
EXIT_CAPACITY = 3

NU_COMPARE_TOLERANCE = 1e-6  # formula-vs-oracle disagreement threshold


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; we reserve 2
        raise ParameterError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="percotasep")
    parser.add_argument("--version", action="version", version=percotasep.__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0, help="64-bit master seed")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--output", default=None, help="file path; default stdout")

    p = sub.add_parser("strip-distance", help="E[D(n,0)] on the diagonal strip")
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--method", choices=("exact", "stationary", "mc"), default="exact")
    p.add_argument("--replicas", type=int, default=1000)
    p.add_argument("--dump-edges", default=None, metavar="PATH",
                   help="write the replica-0 edge configuration to PATH")
    p.add_argument("--replay-edges", default=None, metavar="PATH",
                   help="recompute the distance of a dumped configuration")
    common(p)

    p = sub.add_parser("tasep-stationary", help="stationary pair probability nu")
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--method", choices=("exact", "simulation", "formula"),
                   default="exact")
    p.add_argument("--burn-in", type=int, default=100_000)
    p.add_argument("--samples", type=int, default=1_000_000)
    common(p)

    p = sub.add_parser("nu-compare", help="closed form vs brute force per K")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--K-max", type=int, default=6)
    common(p)

    p = sub.add_parser("verify-correspondence",
                       help="profiles vs coupled particles on shared edges")
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--columns", type=int, default=10_000)
    common(p)

    p = sub.add_parser("mu-estimate", help="time-constant Monte Carlo on the plane")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--margin", type=int, default=None)
    p.add_argument("--replicas", type=int, default=400)
    common(p)

    p = sub.add_parser("event-a-bound", help="empirical P(not A) vs 22*K*n*eps^2")
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--replicas", type=int, default=4000)
    common(p)

    p = sub.add_parser("lower-bound-check",
                       help="plane vs strip distances on shared edges")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--replicas", type=int, default=1000)
    common(p)

    return parser


def _cmd_strip_distance(args):
    if args.replay_edges:
        config = parse_edges(Path(args.replay_edges).read_text())
        geom = config.geom
        if geom.model is Model.CROSS:
            value = int(cross_distance_profile(config).d[geom.K])
        else:
            d = standard_distance(geom, config, config.n_columns)
            value = "unreachable" if d is None else d
        params = {"K": geom.K, "eps": args.eps, "n": config.n_columns,
                  "method": "replay"}
        return params, [{"value": value, "stderr": None, "nu_exact": None,
                         "lower_gap": None, "upper_gap": None}], EXIT_OK

    K, eps, n = args.K, args.eps, args.n
    if n < 0:
        raise ParameterError("n must be >= 0")
    if args.dump_edges:
        geom = StripGeometry(K, Model.CROSS)
        config = sample_strip(rng_mod.stream(args.seed, 0), geom, eps, n)
        Path(args.dump_edges).write_text(dump_edges_text(config))
    stderr = None
    if args.method == "exact":
        value = expected_distance_exact(K, eps, n).value
    elif args.method == "stationary":
        value = float(stationary_start_expectation(K, eps, n).value)
    else:
        est = monte_carlo_distance(K, eps, n, args.replicas, args.seed)
        value, stderr = est.value, est.stderr
    nu_exact = lower_gap = upper_gap = None
    if K <= EXACT_K_CAP and 0.0 < eps < 1.0:
        nu_exact = stationary_exact(K, TasepRates.uniform(eps)).nu_pair
        base = n * (1.0 + 2.0 * eps * nu_exact)
        lower_gap = value - base
        upper_gap = base + 2 * K - value
    params = {"K": K, "eps": eps, "n": n, "method": args.method}
    if args.method == "mc":
        params["replicas"] = args.replicas
    return params, [{"value": value, "stderr": stderr, "nu_exact": nu_exact,
                     "lower_gap": lower_gap, "upper_gap": upper_gap}], EXIT_OK


def _cmd_tasep_stationary(args):
    params = {"K": args.K, "eps": args.eps, "method": args.method}
    if args.method == "exact":
        dist = stationary_exact(args.K, TasepRates.uniform(args.eps))
        row = {"nu_pair": dist.nu_pair, "stderr": None,
               "residual": dist.residual, "samples": None}
    elif args.method == "simulation":
        params.update({"burn_in": args.burn_in, "samples": args.samples})
        dist = nu_pair_simulated(args.K, args.eps, args.burn_in, args.samples,
                                 rng_mod.stream(args.seed))
        row = {"nu_pair": dist.nu_pair, "stderr": dist.stderr,
               "residual": None, "samples": dist.samples}
    else:
        row = {"nu_pair": float(nu_pair_formula(args.K, args.eps)),
               "stderr": None, "residual": None, "samples": None}
    return params, [row], EXIT_OK


def _cmd_nu_compare(args):
    if args.K_max < 1 or args.K_max > EXACT_K_CAP:
        raise ParameterError(f"--K-max must be in 1..{EXACT_K_CAP}")
    rows = []
    for K in range(1, args.K_max + 1):
        formula = float(nu_pair_formula(K, args.eps))
        dist = stationary_exact(K, TasepRates.uniform(args.eps))
        diff = abs(formula - dist.nu_pair)
        rows.append({
            "K": K,
            "nu_formula": formula,
            "nu_exact": dist.nu_pair,
            "residual": dist.residual,
            "abs_diff": diff,
            "status": "AGREE" if diff <= NU_COMPARE_TOLERANCE else "DISCREPANT",
        })
    return {"eps": args.eps, "K_max": args.K_max}, rows, EXIT_OK


def _cmd_verify_correspondence(args):
    report = verify_coupling(args.K, args.eps, args.columns, args.seed)
    code = EXIT_OK if report.passed else EXIT_VERIFICATION
    params = {"K": args.K, "eps": args.eps, "columns": args.columns}
    return params, [report.to_dict()], code


def _cmd_mu_estimate(args):
    est = estimate_mu(args.eps, args.n, args.margin, args.replicas, args.seed)
    params = {"eps": args.eps, "n": args.n, "margin": est.margin,
              "replicas": args.replicas}
    return params, [{"admissible_fraction": est.admissible_fraction,
                     "mu_hat": est.mu_hat, "stderr": est.stderr}], EXIT_OK


def _cmd_event_a_bound(args):
    report = event_a_bound_report(args.K, args.n, args.eps, args.replicas,
                                  args.seed)
    code = EXIT_OK if report.satisfied else EXIT_VERIFICATION
    params = {"K": args.K, "n": args.n, "eps": args.eps,
              "replicas": args.replicas}
    return params, [{"p_hat": report.p_hat, "stderr": report.stderr,
                     "bound": report.bound, "satisfied": report.satisfied}], code


def _cmd_lower_bound_check(args):
    report = lower_bound_check(args.k, args.eps, args.seed, args.replicas)
    code = EXIT_OK if report.passed else EXIT_VERIFICATION
    params = {"k": args.k, "eps": args.eps, "replicas": args.replicas}
    return params, [{
        "equality_violations": report.equality_violations,
        "inequality_violations": report.inequality_violations,
        "monotonicity_violations": report.monotonicity_violations,
        "passed": report.passed,
    }], code


_COMMANDS = {
    "strip-distance": _cmd_strip_distance,
    "tasep-stationary": _cmd_tasep_stationary,
    "nu-compare": _cmd_nu_compare,
    "verify-correspondence": _cmd_verify_correspondence,
    "mu-estimate": _cmd_mu_estimate,
    "event-a-bound": _cmd_event_a_bound,
    "lower-bound-check": _cmd_lower_bound_check,
}

# verify-correspondence is contracted to emit a JSON report
_FORCED_FORMAT = {"verify-correspondence": "json"}


def main(argv=None) -> int:
    parser = build_parser()
    start = time.perf_counter()
    try:
        args = parser.parse_args(argv)
        params, rows, code = _COMMANDS[args.command](args)
    except (ParameterError, EstimationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMETER
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except PercoTasepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VERIFICATION
    spec = ExperimentSpec(args.command, params, args.seed)
    result = ExperimentResult(spec, rows, time.perf_counter() - start,
                              percotasep.__version__)
    fmt = _FORCED_FORMAT.get(args.command, args.format)
    text = result.to_json() if fmt == "json" else result.to_csv()
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
