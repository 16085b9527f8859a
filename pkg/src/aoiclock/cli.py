"""Command line front end: analyze, simulate, verify, sweep.

Exit codes: 0 on success, 1 for failed verification checks or I/O problems,
2 for configuration and usage errors.  Exact rationals appear in JSON as
"num/den" strings next to a *_float convenience field.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import __version__
from .basic import (
    ConfigError,
    NullSequenceError,
    decompose,
    distribution_basic,
    expected_approx_basic,
    expected_exact_basic,
    max_bound_basic,
    rel_error_bound_basic,
    sequence_basic,
)
from .extended import (
    DEFAULT_TOL,
    SystemConfig,
    aoi_conditional,
    distribution_conditional,
    expected_approx_extended,
    expected_exact_extended,
    freshness_offset_K,
    max_bound_prob,
    rel_error_bound_extended,
    sequence_conditional,
)
from .simulate import RngSpec, empirical_mean, simulate_basic, simulate_extended, write_trace_csv
from .sweep import EmptyGridError, SweepGrid, run_sweep, write_outputs


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _rat(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _add_config_flags(sub, with_model=True):
    sub.add_argument("--a-period", type=int, required=True, help="reader period in slots")
    sub.add_argument("--b-period", type=int, required=True, help="source period in slots")
    sub.add_argument("--n-period", type=int, required=True, help="link period in slots")
    if with_model:
        sub.add_argument("--model", choices=("basic", "extended"), default="basic")
        sub.add_argument("--delta-b", type=int, default=0, help="source phase shift (extended)")
        sub.add_argument("--delta-n", type=int, default=0, help="link phase shift (extended)")
        sub.add_argument("--p", type=_fraction, default=Fraction(1),
                         help="transmission success probability, exact rational (extended)")


def _config_from_args(args) -> SystemConfig:
    d = decompose(args.a_period, args.b_period, args.n_period)
    return SystemConfig(d, args.delta_b, args.delta_n, args.p, args.model)


def _distribution_block(dist, extra=None):
    block = {
        "min": dist.min(),
        "max": dist.max(),
        "mean": _rat(dist.mean()),
        "mean_float": float(dist.mean()),
        "hyperperiod_reads": dist.period,
        "progressions": [
            {"start": pr.start, "step": pr.step, "count": pr.count}
            for pr in dist.progressions
        ],
    }
    if extra:
        block.update(extra)
    return block


def cmd_analyze(args) -> int:
    cfg = _config_from_args(args)
    d = cfg.d
    report = {
        "config": {
            "a_period": d.a_period,
            "b_period": d.b_period,
            "n_period": d.n_period,
            "model": cfg.model,
            "delta_b": cfg.delta_b,
            "delta_n": cfg.delta_n,
            "p": _rat(cfg.p),
            "p_float": float(cfg.p),
        },
        "decomposition": {
            "A": d.A, "B": d.B, "N": d.N, "a": d.a, "b": d.b, "n": d.n,
            "hyperperiod_reads": d.period,
        },
    }
    if cfg.model == "basic":
        dist = distribution_basic(d)
        exact = expected_exact_basic(d)
        band = expected_approx_basic(d)
        report["distribution"] = _distribution_block(dist)
        report["expected_exact"] = _rat(exact)
        report["expected_exact_float"] = float(exact)
        report["band"] = {
            "center": _rat(band.center), "center_float": float(band.center),
            "half_width": _rat(band.half_width), "half_width_float": float(band.half_width),
        }
        try:
            bound = rel_error_bound_basic(d)
            report["rel_error_bound"] = _rat(bound)
            report["rel_error_bound_float"] = float(bound)
        except NullSequenceError:
            report["rel_error_bound"] = None
            report["rel_error_bound_float"] = None
            report["rel_error_note"] = "age is identically zero; relative error unbounded"
        report["max_bound"] = max_bound_basic(d)
        report["observed_max"] = dist.max()
    else:
        dist = distribution_conditional(cfg, 0)
        band = expected_approx_extended(cfg)
        exact = expected_exact_extended(cfg, args.tol)
        bound = rel_error_bound_extended(cfg)
        report["freshness_offset"] = freshness_offset_K(cfg)
        report["distribution"] = _distribution_block(dist, {"conditioned_on_l": 0})
        report["expectation"] = {
            "value": _rat(exact.value),
            "value_float": float(exact.value),
            "tail_bound": _rat(exact.tail_bound),
            "tail_bound_float": float(exact.tail_bound),
            "terms_used": exact.terms_used,
            "tol": _rat(args.tol),
        }
        report["band"] = {
            "center": _rat(band.center), "center_float": float(band.center),
            "half_width": _rat(band.half_width), "half_width_float": float(band.half_width),
        }
        report["rel_error_bound"] = _rat(bound)
        report["rel_error_bound_float"] = float(bound)
        if cfg.p == 1:
            # with lossless delivery the probabilistic machinery degenerates
            # to a hard bound
            report["max_bound"] = d.b_period + d.n_period - d.n + freshness_offset_K(cfg)
        if args.sigma is not None:
            report["sigma"] = _rat(args.sigma)
            report["max_bound_prob"] = max_bound_prob(cfg, args.sigma)
    print(json.dumps(report, indent=2))
    return 0


def cmd_simulate(args) -> int:
    cfg = _config_from_args(args)
    if cfg.model == "basic":
        if args.seed is not None:
            raise ConfigError("the basic model is deterministic; --seed does not apply")
        trace = simulate_basic(cfg.d, args.cycles)
    else:
        if args.seed is None:
            raise ConfigError("the extended model is stochastic; --seed is required")
        trace = simulate_extended(cfg, args.cycles, RngSpec(args.seed))
    if args.out == "-":
        write_trace_csv(trace, sys.stdout)
    else:
        write_trace_csv(trace, args.out)
    warm = trace.warmup_cycles
    if warm < trace.cycles:
        mean = empirical_mean(trace, warm, trace.cycles - warm)
        peak = int(trace.ages[warm:].max())
        print(
            f"cycles={trace.cycles} warmup={warm} "
            f"mean={float(mean):.6f} max={peak}",
            file=sys.stderr,
        )
    else:
        print(f"cycles={trace.cycles} warmup={warm} (no delivery seen)", file=sys.stderr)
    return 0


def _verify_basic(args, failures: list[str]) -> None:
    d = decompose(args.a_period, args.b_period, args.n_period)
    period = d.period

    dist = distribution_basic(d)
    seq = sequence_basic(d, 1, period)
    closed = sorted(dist.values.elements())
    direct = sorted(int(v) for v in seq)
    detail = ""
    if closed != direct:
        k = next(i for i, (x, y) in enumerate(zip(closed, direct)) if x != y)
        detail = f"first mismatch at sorted position {k}: closed={closed[k]} direct={direct[k]}"
    _check(failures, "progression_family_multiset", closed == direct, detail)

    exact = expected_exact_basic(d)
    mean = Fraction(int(seq.sum()), period)
    _check(failures, "closed_form_mean", exact == mean, f"closed={exact} direct={mean}")

    band = expected_approx_basic(d)
    _check(failures, "band_membership", band.contains(exact),
           f"exact={exact} band=[{band.low}, {band.high}]")

    peak = int(seq.max())
    bound = max_bound_basic(d)
    _check(failures, "max_bound", peak <= bound, f"observed={peak} bound={bound}")

    cycles = args.cycles or 3 * period + 1
    trace = simulate_basic(d, cycles)
    model = sequence_basic(d, 0, cycles)
    same = bool((trace.ages == model).all())
    detail = ""
    if not same:
        k = int((trace.ages != model).argmax())
        detail = f"first mismatch at k={k}: simulated={trace.ages[k]} formula={model[k]}"
    _check(failures, "simulator_matches_formula", same, detail)


def _verify_extended(args, failures: list[str]) -> None:
    cfg = _config_from_args(args)
    period = cfg.d.period

    for l in range(args.l_max + 1):
        dist = distribution_conditional(cfg, l)
        seq = sequence_conditional(cfg, l, 1, period)
        closed = sorted(dist.values.elements())
        direct = sorted(int(v) for v in seq)
        detail = ""
        if closed != direct:
            k = next(i for i, (x, y) in enumerate(zip(closed, direct)) if x != y)
            detail = f"l={l}, first mismatch at sorted position {k}: closed={closed[k]} direct={direct[k]}"
        _check(failures, f"progression_family_multiset_l{l}", closed == direct, detail)

    exact = expected_exact_extended(cfg, args.tol)
    band = expected_approx_extended(cfg)
    inside = exact.value <= band.high and exact.value + exact.tail_bound >= band.low
    _check(failures, "band_membership", inside,
           f"certified=[{exact.value}, {exact.value + exact.tail_bound}] "
           f"band=[{band.low}, {band.high}]")

    cycles = args.cycles or 3 * period + 50
    trace = simulate_extended(cfg, cycles, RngSpec(args.seed if args.seed is not None else 0))
    ok = True
    detail = ""
    for k in range(trace.warmup_cycles, trace.cycles):
        want = aoi_conditional(cfg, k, int(trace.fails[k]))
        if int(trace.ages[k]) != want:
            ok = False
            detail = f"k={k} l={int(trace.fails[k])}: simulated={int(trace.ages[k])} formula={want}"
            break
    _check(failures, "trace_bridge_identity", ok, detail)

    if cfg.p == 1:
        warm = trace.warmup_cycles
        model = sequence_conditional(cfg, 0, warm, trace.cycles - warm)
        same = bool((trace.ages[warm:] == model).all())
        detail = ""
        if not same:
            k = int((trace.ages[warm:] != model).argmax()) + warm
            detail = f"first mismatch at k={k}"
        _check(failures, "lossless_trace_matches_formula", same, detail)


def _check(failures: list[str], name: str, ok: bool, detail: str = "") -> None:
    if ok:
        print(f"check {name}: PASS")
    else:
        suffix = f" ({detail})" if detail else ""
        print(f"check {name}: FAIL{suffix}")
        failures.append(name)


def cmd_verify(args) -> int:
    failures: list[str] = []
    if args.model == "basic":
        _verify_basic(args, failures)
    else:
        _verify_extended(args, failures)
    if failures:
        print(f"{len(failures)} check(s) failed: {', '.join(failures)}")
        return 1
    print("all checks passed")
    return 0


def cmd_sweep(args) -> int:
    grid = SweepGrid.from_json(args.grid)
    result = run_sweep(grid, tol=args.tol, bin_width=args.bin_width, jobs=args.jobs)
    paths = write_outputs(result, args.out)
    skips = ", ".join(f"{k}={v}" for k, v in sorted(result.skip_counts.items())) or "none"
    print(f"candidates={result.n_candidates} evaluated={result.n_configs} skipped: {skips}")
    print(f"mean_error={result.mean_error!r} bound_violations={result.bound_violations}")
    print(f"wrote {len(paths)} files to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aoiclock",
        description="Exact age-of-information analysis for clocked sender/receiver pairs",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    an = subs.add_parser("analyze", help="closed-form report for one config")
    _add_config_flags(an)
    an.add_argument("--sigma", type=_fraction, default=None,
                    help="confidence for the probabilistic max bound (extended)")
    an.add_argument("--tol", type=_fraction, default=DEFAULT_TOL,
                    help="truncation tolerance for the exact expectation")
    an.set_defaults(func=cmd_analyze)

    sim = subs.add_parser("simulate", help="run the slot-exact simulator, write a trace CSV")
    _add_config_flags(sim)
    sim.add_argument("--cycles", type=int, required=True, help="number of reads to simulate")
    sim.add_argument("--seed", type=int, default=None, help="rng seed (extended model)")
    sim.add_argument("--out", default="-", help="trace file, '-' for stdout")
    sim.set_defaults(func=cmd_simulate)

    ver = subs.add_parser("verify", help="cross-check closed forms against direct evaluation")
    _add_config_flags(ver)
    ver.add_argument("--l-max", type=int, default=3, help="check conditional families up to this l")
    ver.add_argument("--cycles", type=int, default=None, help="simulated reads (default: 3 hyperperiods)")
    ver.add_argument("--seed", type=int, default=None, help="rng seed for the trace check")
    ver.add_argument("--tol", type=_fraction, default=DEFAULT_TOL)
    ver.set_defaults(func=cmd_verify)

    sw = subs.add_parser("sweep", help="grid sweep of approximation error")
    sw.add_argument("--grid", required=True, help="JSON grid file")
    sw.add_argument("--out", required=True, help="output directory")
    sw.add_argument("--bin-width", type=_fraction, default=Fraction(1, 100))
    sw.add_argument("--tol", type=_fraction, default=DEFAULT_TOL)
    sw.add_argument("--jobs", type=int, default=1)
    sw.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, EmptyGridError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
