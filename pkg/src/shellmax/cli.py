"""Experiment orchestration: the ``shellmax`` command.

Subcommands: growth, norm, median, coarse-median, correlation, maximal,
dist-check, suite.  Every output artifact embeds the serialized run
configuration and the package version, floats are serialized with 17
significant digits, and rows are flushed as they are produced, so outputs
are byte-identical given (config, seed, version) and a failing cell never
corrupts completed ones.

Exit codes: 0 success, 2 configuration error, 3 resource budget exceeded,
4 internal invariant breach.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import __version__
from .cayley import DEFAULT_BUDGET, enumerate_ball, fit_growth
from .errors import ConfigError, InvariantBreachError, ResourceBudgetError, SpecParseError
from .geometry import (SamplerConfig, coarse_median_scan, correlation_rd_ratio,
                       median_candidates, require_exponential_growth)
from .groups import parse_spec
from .harmonic import FiniteFunction, ball_measure, operator_norm_truncated, sphere_measure
from .maximal import (distributional_sweep, dyadic_corpus, maximal_function,
                      weak_type_ratio)
from .prng import Lcg

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3
EXIT_INVARIANT = 4


def _fmt(value) -> str:
    """Serialize one CSV cell; floats use 17 significant digits."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, Fraction):
        return format(float(value), ".17g")
    return str(value)


@dataclass
class RunConfig:
    """Flat mirror of the CLI flags; embedded verbatim in every artifact."""
    values: dict

    @staticmethod
    def from_args(args: argparse.Namespace) -> "RunConfig":
        skip = {"func", "config"}
        values = {k: v for k, v in sorted(vars(args).items())
                  if k not in skip and v is not None}
        return RunConfig(values)

    def json(self) -> str:
        return json.dumps(self.values, sort_keys=True, separators=(",", ":"),
                          default=lambda v: format(v, ".17g") if isinstance(v, float) else str(v))


class ReportWriter:
    """CSV writer with config/version header comments and per-row flush."""

    def __init__(self, path: Path, config: RunConfig, columns):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.handle = open(self.path, "w", newline="")
        self.handle.write(f"# version={__version__}\n")
        self.handle.write(f"# config={config.json()}\n")
        self.handle.write(",".join(columns) + "\n")
        self.handle.flush()

    def row(self, *cells):
        self.handle.write(",".join(_fmt(c) for c in cells) + "\n")
        self.handle.flush()

    def close(self):
        self.handle.close()


def _write_json(path, config: RunConfig, payload: dict):
    body = {"version": __version__, "config": json.loads(config.json()), **payload}
    text = json.dumps(body, sort_keys=True, indent=2,
                      default=lambda v: format(v, ".17g") if isinstance(v, float) else str(v))
    if path is None:
        sys.stdout.write(text + "\n")
    else:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text + "\n")


# ---------------------------------------------------------------------------
# suite runners
# ---------------------------------------------------------------------------

def run_growth(args, config: RunConfig) -> None:
    model = parse_spec(args.group)
    ball = enumerate_ball(model, args.radius, budget=args.budget)
    fit = fit_growth(ball.sphere_sizes) if ball.radius >= 7 else None
    writer = ReportWriter(args.out, config,
                          ["n", "sphere_size", "ball_size", "fitted_prediction", "ratio"])
    try:
        for n in range(ball.radius + 1):
            size = ball.sphere_sizes[n]
            if fit is not None and fit.recurrence is not None and n >= fit.recurrence.valid_from:
                predicted = float(fit.recurrence.predict(ball.sphere_sizes, n))
            elif fit is not None:
                predicted = (n ** fit.d) * (fit.q ** n) if n else 1.0
            else:
                predicted = float(size)
            ratio = size / predicted if predicted else math.inf
            writer.row(n, size, ball.ball_sizes[n], predicted, ratio)
    finally:
        writer.close()
    if fit is not None:
        _write_json(Path(args.out).with_suffix(".fit.json"), config, {
            "d": fit.d, "q": fit.q, "c_gr": fit.c_gr,
            "flags": sorted(fit.flags),
            "recurrence": None if fit.recurrence is None else {
                "coefficients": [str(c) for c in fit.recurrence.coeffs],
                "valid_from": fit.recurrence.valid_from,
            },
        })


def run_norm(args, config: RunConfig) -> None:
    model = parse_spec(args.group)
    ball = enumerate_ball(model, args.truncation, budget=args.budget)
    measure = (ball_measure(ball, args.radius_op) if args.ball
               else sphere_measure(ball, args.radius_op))
    est = operator_norm_truncated(model, ball, measure, args.truncation,
                                  tol=args.tol, max_iters=args.max_iters)
    _write_json(args.out, config, {
        "r": est.radius, "R": est.truncation_radius, "kind": est.kind,
        "norm": est.norm, "converged": est.converged, "iters": est.iters,
        "last_rel_change": est.last_rel_change,
        "reference": est.reference,
    })


def run_median(args, config: RunConfig) -> None:
    model = parse_spec(args.group)
    ball = enumerate_ball(model, 2 * args.radius, budget=args.budget)
    domain = list(ball.elements(up_to=args.radius))
    lcg = Lcg(args.seed)
    writer = ReportWriter(args.out, config,
                          ["idx", "x", "y", "z", "candidates", "singleton", "witness"])
    try:
        for idx in range(args.count):
            x, y, z = (domain[lcg.next_below(len(domain))] for _ in range(3))
            cands = median_candidates(model, x, y, z, ball=ball)
            witness = model.format_element(cands[0]) if cands else ""
            writer.row(idx, model.format_element(x), model.format_element(y),
                       model.format_element(z), len(cands), len(cands) == 1, witness)
    finally:
        writer.close()


def run_coarse_median(args, config: RunConfig) -> None:
    model = parse_spec(args.group)
    radius = max(args.rmax, 8)
    ball = enumerate_ball(model, radius, budget=args.budget)
    sampler = SamplerConfig(seed=args.seed, pair_budget=args.pair_budget)
    scan = coarse_median_scan(model, ball, args.rmax, sampler, args.d2, j_max=args.jmax)
    writer = ReportWriter(args.out, config,
                          ["j", "i", "r", "m", "family", "sizeE", "sizeF", "lhs", "rhs", "ratio"])
    try:
        for rep in scan.reports:
            writer.row(rep.params["j"], rep.params["i"], rep.params["r"], rep.params["m"],
                       rep.inputs["family"], rep.inputs["sizeE"], rep.inputs["sizeF"],
                       rep.lhs, rep.rhs, rep.ratio)
    finally:
        writer.close()
    _write_json(Path(args.out).with_suffix(".summary.json"), config,
                {"c0_estimate": scan.c0_estimate, "d2": scan.d2,
                 "cells": len(scan.reports)})


def run_correlation(args, config: RunConfig) -> None:
    model = parse_spec(args.group)
    ball = enumerate_ball(model, args.radius, budget=args.budget)
    require_exponential_growth(ball)
    lcg = Lcg(args.seed)
    writer = ReportWriter(args.out, config,
                          ["idx", "r", "sizeA", "sizeB", "lhs", "rhs", "ratio"])
    domain = list(ball.elements(up_to=min(4, ball.radius)))
    try:
        for idx in range(args.pairs):
            r = 1 + lcg.next_below(min(4, ball.radius))
            size_a = 1 + lcg.next_below(40)
            size_b = 1 + lcg.next_below(40)
            A = lcg.sample(domain, min(size_a, len(domain)))
            B = lcg.sample(domain, min(size_b, len(domain)))
            rep = correlation_rd_ratio(model, ball, A, B, r, args.b,
                                       inputs={"seed": args.seed, "idx": idx})
            writer.row(idx, r, len(A), len(B), rep.lhs, rep.rhs, rep.ratio)
    finally:
        writer.close()


def _load_function(model, path: Path) -> FiniteFunction:
    data = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            word, value = line.split()
            element = model.parse_element(word)
            value = Fraction(value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from None
        if element in data:
            raise ConfigError(f"{path}:{lineno}: duplicate element {word!r}")
        data[element] = value
    return FiniteFunction(data)


def run_maximal(args, config: RunConfig) -> None:
    model = parse_spec(args.group)
    f = _load_function(model, args.f)
    eta_floor = Fraction(args.eta_floor)
    ball = enumerate_ball(model, args.radius, budget=args.budget)
    profile = maximal_function(model, ball, f, eta_floor)
    ratio, arg_eta = weak_type_ratio(profile)
    _write_json(args.out, config, {
        "window": profile.window_radius,
        "eta_floor": float(profile.eta_floor),
        "weak_ratio": float(ratio),
        "argmax_eta": None if arg_eta is None else float(arg_eta),
        "window_points": len(profile.values),
    })
    if args.csv_out:
        writer = ReportWriter(args.csv_out, config, ["x", "Mf"])
        try:
            order = sorted(profile.values, key=model.sort_key)
            for x in order:
                writer.row(model.format_element(x), profile.values[x])
        finally:
            writer.close()


def run_dist_check(args, config: RunConfig) -> None:
    model = parse_spec(args.group)
    radius = max(args.r, args.support_radius, 8)
    ball = enumerate_ball(model, radius, budget=args.budget)
    require_exponential_growth(ball)
    corpus = dyadic_corpus(model, ball, args.support_radius, args.count, args.corpus_seed)
    writer = ReportWriter(args.out, config,
                          ["func", "r", "eta", "lhs", "rhs", "ratio"])
    worst = 0.0
    try:
        for k, f in enumerate(corpus):
            for rep in distributional_sweep(model, ball, f, args.r, args.b,
                                            inputs={"func": k}):
                worst = max(worst, rep.ratio)
                writer.row(k, args.r, rep.params["eta"], rep.lhs, rep.rhs, rep.ratio)
    finally:
        writer.close()
    _write_json(Path(args.out).with_suffix(".summary.json"), config,
                {"max_ratio": worst, "functions": len(corpus)})


_SUITES = ("growth", "norm", "coarse-median", "correlation", "maximal", "dist-check")


def run_suite(args, config: RunConfig) -> None:
    """Run one named suite (or all) with shared defaults into a directory."""
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    chosen = _SUITES if args.suite == "all" else (args.suite,)
    for name in chosen:
        if name not in _SUITES:
            raise ConfigError(f"unknown suite {name!r}; pick from {('all',) + _SUITES}")
        sub = argparse.Namespace(**vars(args))
        if name == "growth":
            sub.out = out_dir / "growth.csv"
            run_growth(sub, config)
        elif name == "norm":
            sub.radius_op, sub.truncation, sub.ball = 1, args.radius, False
            sub.tol, sub.max_iters = 1e-10, 10_000
            sub.out = out_dir / "norm.json"
            run_norm(sub, config)
        elif name == "coarse-median":
            sub.rmax, sub.d2, sub.jmax = min(4, args.radius), 0.0, None
            sub.pair_budget = 200_000
            sub.out = out_dir / "coarse_median.csv"
            run_coarse_median(sub, config)
        elif name == "correlation":
            sub.pairs, sub.b = 50, 0.0
            sub.out = out_dir / "correlation.csv"
            run_correlation(sub, config)
        elif name == "maximal":
            model = parse_spec(args.group)
            ball = enumerate_ball(model, args.radius, budget=args.budget)
            profile = maximal_function(model, ball,
                                       FiniteFunction.indicator(ball.elements(up_to=1)),
                                       Fraction(1, 8))
            ratio, arg_eta = weak_type_ratio(profile)
            _write_json(out_dir / "maximal.json", config, {
                "f": "indicator(B_1)", "window": profile.window_radius,
                "eta_floor": float(profile.eta_floor), "weak_ratio": float(ratio),
                "argmax_eta": None if arg_eta is None else float(arg_eta),
            })
        elif name == "dist-check":
            sub.r, sub.b = 2, 0.0
            sub.corpus_seed, sub.count, sub.support_radius = args.seed, 10, 3
            sub.out = out_dir / "dist.csv"
            run_dist_check(sub, config)


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shellmax",
        description="Measurements on Cayley spheres of exponential-growth groups")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required=True):
        p.add_argument("--group", required=True, help="group spec, e.g. 'free rank=2'")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
        p.add_argument("--config", type=Path, default=None,
                       help="JSON file of defaults; explicit flags win")
        if out_required:
            p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("growth", help="sphere sizes and growth fit")
    common(p)
    p.add_argument("--radius", type=int, required=True)
    p.set_defaults(func=run_growth)

    p = sub.add_parser("norm", help="truncated convolution-operator norm")
    common(p, out_required=False)
    p.add_argument("--radius-op", type=int, required=True, dest="radius_op")
    p.add_argument("--truncation", type=int, required=True)
    p.add_argument("--ball", action="store_true", help="ball average instead of sphere")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iters", type=int, default=10_000, dest="max_iters")
    p.add_argument("--out", type=Path, default=None)
    p.set_defaults(func=run_norm)

    p = sub.add_parser("median", help="median candidates on seeded triples")
    common(p)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--radius", type=int, default=3)
    p.set_defaults(func=run_median)

    p = sub.add_parser("coarse-median", help="spherical coarse median scan")
    common(p)
    p.add_argument("--rmax", type=int, required=True)
    p.add_argument("--d2", type=float, default=0.0)
    p.add_argument("--jmax", type=int, default=None)
    p.add_argument("--pair-budget", type=int, default=1_000_000, dest="pair_budget")
    p.set_defaults(func=run_coarse_median)

    p = sub.add_parser("correlation", help="seeded shell-correlation cells")
    common(p)
    p.add_argument("--pairs", type=int, default=100)
    p.add_argument("--b", type=float, default=0.0)
    p.add_argument("--radius", type=int, default=5)
    p.set_defaults(func=run_correlation)

    p = sub.add_parser("maximal", help="exact maximal profile of a function file")
    common(p, out_required=False)
    p.add_argument("--f", type=Path, required=True,
                   help="lines of '<normal-form word> <rational value>'")
    p.add_argument("--eta-floor", default="1/64", dest="eta_floor")
    p.add_argument("--radius", type=int, default=8)
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--csv-out", type=Path, default=None, dest="csv_out")
    p.set_defaults(func=run_maximal)

    p = sub.add_parser("dist-check", help="distributional inequality over a corpus")
    common(p)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--b", type=float, default=0.0)
    p.add_argument("--corpus-seed", type=int, default=0, dest="corpus_seed")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--support-radius", type=int, default=4, dest="support_radius")
    p.set_defaults(func=run_dist_check)

    p = sub.add_parser("suite", help="run a named suite (or all) into a directory")
    common(p)
    p.add_argument("--suite", default="all", help="|".join(("all",) + _SUITES))
    p.add_argument("--radius", type=int, default=8)
    p.set_defaults(func=run_suite)
    return parser


def _apply_config_file(args: argparse.Namespace, parser: argparse.ArgumentParser,
                       argv) -> argparse.Namespace:
    """Config-file values fill in flags the command line left at defaults."""
    if getattr(args, "config", None) is None:
        return args
    try:
        loaded = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {args.config}: {exc}") from None
    if not isinstance(loaded, dict):
        raise ConfigError("config file must hold a flat JSON object")
    explicit = {a.lstrip("-").split("=")[0].replace("-", "_") for a in argv if a.startswith("--")}
    for key, value in loaded.items():
        attr = key.replace("-", "_")
        if attr in explicit or not hasattr(args, attr):
            continue
        current = getattr(args, attr)
        setattr(args, attr, type(current)(value) if current is not None else value)
    return args


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        args = _apply_config_file(args, parser, argv)
        config = RunConfig.from_args(args)
        args.func(args, config)
    except (SpecParseError, ConfigError, ValueError) as exc:
        print(f"shellmax: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceBudgetError as exc:
        print(f"shellmax: resource budget: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except InvariantBreachError as exc:
        print(f"shellmax: INVARIANT BREACH: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
