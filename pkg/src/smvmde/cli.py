"""Command line interface.

Exit codes: 0 success, 1 validation error, 2 I/O error, 3 numerical or
degenerate-input error.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

import numpy as np

from . import __version__
from .core import StrataAllocation, Variant, multiscale_profile, quantized_entropy
from .errors import InputOutputError, NumericalError, SmvmdeError, ValidationError
from .harness import ExperimentConfig, oracle_entropy, run_synthetic_experiment, run_timing_benchmark
from .io import (
    RunConfig,
    format_outputs,
    load_config,
    load_distributions,
    load_multichannel_csv,
    load_pairs,
    write_outputs,
)
from .stats import effect_size_report, paired_difference_summary

log = logging.getLogger("smvmde")


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _str_list(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def _add_common(parser):
    g = parser.add_argument_group("entropy parameters")
    g.add_argument("--config", help="JSON run configuration; flags override its values")
    g.add_argument("--m", type=int, help="embedding dimension")
    g.add_argument("--c", type=int, help="number of classes")
    g.add_argument("--d", type=int, help="time delay")
    g.add_argument("--tau-max", dest="tau_max", type=int, help="largest scale factor")
    g.add_argument("--variant", help="mvmde, t, st or p")
    g.add_argument("--designated", type=_str_list, help="comma-separated core channel names")
    g.add_argument("--threshold", type=int, help="threshold t (T and ST)")
    g.add_argument("--weight", type=float, help="reduced weight w (ST)")
    g.add_argument("--seed", type=int)
    g.add_argument("--out", help="output file (default: stdout)")
    g.add_argument("--format", choices=("csv", "json"))


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the validation code rather than argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(ValidationError.exit_code, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="smvmde",
        description="Multivariate multiscale dispersion entropy and its stratified variants.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="entropy profile of a multichannel CSV")
    p.add_argument("input")
    _add_common(p)

    p = sub.add_parser("synth", help="synthetic WGN / 1/f experiment grid")
    _add_common(p)
    p.add_argument("--realizations", type=int)
    p.add_argument("--length", type=int)
    p.add_argument("--setups", type=_int_list, help="setup ids 1..6")
    p.add_argument("--variants", type=_str_list, help="comma-separated variants to run")
    p.add_argument("--workers", type=int, help="worker processes (default: $SMVMDE_WORKERS or CPU count)")

    p = sub.add_parser("bench", help="timing sweep over channel counts and lengths")
    _add_common(p)
    p.add_argument("--channels", type=_int_list)
    p.add_argument("--lengths", type=_int_list)
    p.add_argument("--reps", type=int)

    p = sub.add_parser("effect-size", help="bootstrap effect-size differences per scale")
    p.add_argument("first", help="CSV, one column per tau, first group (e.g. healthy)")
    p.add_argument("second", help="CSV, one column per tau, second group")
    p.add_argument("--baseline-first", help="baseline algorithm distributions, first group")
    p.add_argument("--baseline-second", help="baseline algorithm distributions, second group")
    p.add_argument("--bootstrap", type=int, help="bootstrap realizations")
    _add_common(p)

    p = sub.add_parser("paired", help="paired state-difference summary against a baseline")
    p.add_argument("pairs", help="two-column CSV (state1, state2) for the variant")
    p.add_argument("baseline", help="two-column CSV for the baseline algorithm")
    _add_common(p)

    p = sub.add_parser("oracle", help="check the core against brute-force enumeration")
    p.add_argument("input", help="CSV of class labels 1..c, one column per channel")
    _add_common(p)
    return parser


def _config(args) -> RunConfig:
    base = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    overrides = {}
    for f in dataclasses.fields(RunConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            overrides[f.name] = value
    return dataclasses.replace(base, **overrides)


def _emit(obj, cfg: RunConfig):
    if cfg.out:
        write_outputs(obj, cfg.out, cfg.format)
        log.info("wrote %s", cfg.out)
    else:
        sys.stdout.write(format_outputs(obj, cfg.format or "csv"))


def _compute(args, cfg):
    series = load_multichannel_csv(args.input)
    allocation = cfg.allocation(series)
    _emit(multiscale_profile(series, cfg.params(), allocation), cfg)


def _synth(args, cfg):
    params = cfg.params()
    variants = []
    for name in cfg.variants:
        variant = Variant.parse(name)
        variants.append(
            StrataAllocation.mvmde()
            if variant is Variant.MVMDE
            else StrataAllocation(variant, {0}, t=cfg.threshold, w=cfg.weight)
        )
    config = ExperimentConfig(
        setups=tuple(cfg.setups),
        realizations=cfg.realizations,
        length=cfg.length,
        params=params,
        variants=variants,
        seed=cfg.seed,
        workers=getattr(args, "workers", None),
    )
    _emit(run_synthetic_experiment(config), cfg)


def _bench(args, cfg):
    table = run_timing_benchmark(
        channels=cfg.channels,
        lengths=cfg.lengths,
        reps=cfg.reps,
        params=cfg.params(),
        t=cfg.threshold,
        w=cfg.weight,
        seed=cfg.seed,
    )
    _emit(table, cfg)


def _effect_size(args, cfg):
    first, second = load_distributions(args.first), load_distributions(args.second)
    if (args.baseline_first is None) != (args.baseline_second is None):
        raise ValidationError("give both --baseline-first and --baseline-second or neither")
    base_first = base_second = None
    if args.baseline_first is not None:
        base_first = load_distributions(args.baseline_first)
        base_second = load_distributions(args.baseline_second)
    report = effect_size_report(first, second, base_first, base_second, n_boot=cfg.bootstrap, seed=cfg.seed)
    _emit(report, cfg)


def _paired(args, cfg):
    _emit(paired_difference_summary(load_pairs(args.pairs), load_pairs(args.baseline)), cfg)


def _oracle(args, cfg):
    series = load_multichannel_csv(args.input)
    labels = series.data
    if not np.array_equal(labels, np.round(labels)):
        raise ValidationError("oracle input must contain integer class labels")
    labels = labels.astype(np.int64)
    allocation = cfg.allocation(series)
    core = quantized_entropy(labels, cfg.m, cfg.c, cfg.d, allocation)
    reference = oracle_entropy(labels, cfg.m, cfg.c, cfg.d, allocation)
    diff = abs(core - reference)
    _emit((("variant", "core", "oracle", "abs_diff"), [(allocation.variant.label, core, reference, diff)]), cfg)
    if diff > 1e-12:
        raise NumericalError(f"core and oracle disagree by {diff:.3g}")


COMMANDS = {
    "compute": _compute,
    "synth": _synth,
    "bench": _bench,
    "effect-size": _effect_size,
    "paired": _paired,
    "oracle": _oracle,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = _config(args)
        COMMANDS[args.command](args, cfg)
    except SmvmdeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return InputOutputError.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
