"""Experiment runners: synthetic noise profiles, timing sweep, brute-force oracle."""
from __future__ import annotations

import math
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import (
    EntropyParams,
    MultiChannelSeries,
    ShortWindowWarning,
    StrataAllocation,
    Variant,
    minimum_window_length,
    multiscale_profile,
    multiscale_profiles,
)
from .errors import ExperimentError, SmvmdeError, ValidationError, WindowTooShortError
from .synth import STRATIFIED_SETUPS, NoiseKind, NoiseSpec, build_setup, derive_seed, gen_wgn

__all__ = [
    "WORKERS_ENV",
    "default_workers",
    "ExperimentConfig",
    "ProfileRow",
    "ProfileTable",
    "TimingRow",
    "TimingTable",
    "default_variants",
    "run_synthetic_experiment",
    "run_timing_benchmark",
    "oracle_entropy",
]

WORKERS_ENV = "SMVMDE_WORKERS"


def default_workers() -> int:
    """Worker count from ``SMVMDE_WORKERS``, else the number of usable CPUs."""
    raw = os.environ.get(WORKERS_ENV)
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise ValidationError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}") from None
        if value < 1:
            raise ValidationError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}")
        return value
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # pragma: no cover - non-Linux
        return os.cpu_count() or 1


def default_variants(t: int = 1, w: float = 0.5) -> list[StrataAllocation]:
    """mvMDE plus T, ST and P templates; designation is filled in per setup."""
    return [
        StrataAllocation.mvmde(),
        StrataAllocation.threshold({0}, t),
        StrataAllocation.soft_threshold({0}, t, w),
        StrataAllocation.proportional({0}),
    ]


@dataclass
class ExperimentConfig:
    setups: Sequence[int] = (1, 2, 3, 4, 5, 6)
    realizations: int = 40
    length: int = 15_000
    params: EntropyParams = field(default_factory=EntropyParams)
    variants: Sequence[StrataAllocation] = field(default_factory=default_variants)
    seed: int = 0
    workers: int | None = None

    def __post_init__(self):
        if self.realizations < 1:
            raise ValidationError("need at least one realization")
        unknown = [s for s in self.setups if s not in STRATIFIED_SETUPS]
        if unknown:
            raise ValidationError(f"unknown setup id(s) {unknown}; expected 1..6")
        if not self.variants:
            raise ValidationError("no variants to run")
        for alloc in self.variants:
            alloc.validate_for(self.params.m, 3)
        n_coarse = self.length // self.params.tau_max
        if n_coarse - (self.params.m - 1) * self.params.d < 1:
            raise WindowTooShortError(
                f"length {self.length} leaves no embedded vector at tau={self.params.tau_max}"
            )


@dataclass(frozen=True)
class ProfileRow:
    setup: int
    variant: str
    designated: str
    tau: int
    mean: float
    std: float


@dataclass
class ProfileTable:
    rows: list = field(default_factory=list)
    length: int | None = None
    realizations: int | None = None

    COLUMNS = ("setup", "variant", "designated", "tau", "mean", "std")

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def profile(self, setup: int, variant: str | Variant) -> tuple[np.ndarray, np.ndarray]:
        """Mean and std arrays over tau for one (setup, variant)."""
        label = Variant.parse(variant).label
        rows = sorted((r for r in self.rows if r.setup == setup and r.variant == label), key=lambda r: r.tau)
        if not rows:
            raise KeyError((setup, label))
        return np.array([r.mean for r in rows]), np.array([r.std for r in rows])


def _realization(task):
    setup_id, r, length, params, variants, seed = task
    series, designated = build_setup(STRATIFIED_SETUPS[setup_id], length, derive_seed(seed, r))
    allocations = [a if a.variant is Variant.MVMDE else a.with_designated(designated) for a in variants]
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ShortWindowWarning)
            profiles = multiscale_profiles(series, params, allocations)
    except SmvmdeError as exc:
        raise ExperimentError(f"setup {setup_id}, realization {r}", exc) from exc
    return np.array([p.as_array() for p in profiles])


def _map(func, tasks, workers):
    if workers <= 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def run_synthetic_experiment(config: ExperimentConfig) -> ProfileTable:
    """Mean and standard deviation of every variant's profile per setup and scale.

    Realization ``r`` of every setup is built from ``derive_seed(seed, r)``.
    Results do not depend on the worker count.
    """
    params = config.params
    variants = list(config.variants)
    if any(a.variant.stratified for a in variants) and config.length <= minimum_window_length(params, 3):
        warnings.warn(
            f"length {config.length} <= c^m * tau_max = {minimum_window_length(params, 3):g}",
            ShortWindowWarning,
            stacklevel=2,
        )
    workers = config.workers if config.workers is not None else default_workers()
    tasks = [
        (s, r, config.length, params, variants, config.seed)
        for s in config.setups
        for r in range(config.realizations)
    ]
    results = _map(_realization, tasks, workers)
    table = ProfileTable(length=config.length, realizations=config.realizations)
    R = config.realizations
    for i, setup_id in enumerate(config.setups):
        block = np.stack(results[i * R : (i + 1) * R])  # (R, variants, taus)
        mean = block.mean(axis=0)
        std = block.std(axis=0, ddof=1) if R > 1 else np.zeros_like(mean)
        spec = STRATIFIED_SETUPS[setup_id]
        core_name = _channel_names(spec)[spec.designated or 0]
        for v, alloc in enumerate(variants):
            designated_label = core_name if alloc.variant.stratified else ""
            for j, tau in enumerate(params.taus):
                table.rows.append(
                    ProfileRow(setup_id, alloc.variant.label, designated_label, tau, float(mean[v, j]), float(std[v, j]))
                )
    return table


def _channel_names(spec) -> list[str]:
    counters, names = {}, []
    for kind in spec.kinds:
        counters[kind] = counters.get(kind, 0) + 1
        names.append(f"{kind.value}{counters[kind]}")
    return names


@dataclass(frozen=True)
class TimingRow:
    algorithm: str
    channels: int
    length: int
    mean_seconds: float


@dataclass
class TimingTable:
    rows: list = field(default_factory=list)

    COLUMNS = ("algorithm", "channels", "length", "mean_seconds")

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def seconds(self, algorithm: str | Variant, channels: int, length: int) -> float:
        label = Variant.parse(algorithm).label
        for row in self.rows:
            if (row.algorithm, row.channels, row.length) == (label, channels, length):
                return row.mean_seconds
        raise KeyError((label, channels, length))


def run_timing_benchmark(
    channels: Sequence[int] = (2, 5, 8),
    lengths: Sequence[int] = (1_000, 3_000, 10_000, 30_000, 100_000),
    reps: int = 20,
    params: EntropyParams | None = None,
    t: int = 1,
    w: float = 0.5,
    seed: int = 0,
) -> TimingTable:
    """Mean wall-clock seconds of a full multiscale profile per algorithm and size.

    Inputs are uncorrelated WGN with channel 0 designated. Each measurement
    covers coarse graining through the final entropy for all scales. One
    warm-up call per algorithm is discarded, and algorithms are interleaved
    within each repetition so drift affects them equally.
    """
    if reps < 1:
        raise ValidationError("reps must be >= 1")
    params = params or EntropyParams(m=2, c=5, d=1, tau_max=10)
    algorithms = default_variants(t, w)
    table = TimingTable()
    for p in channels:
        for length in lengths:
            data = np.vstack(
                [gen_wgn(NoiseSpec(NoiseKind.WGN, length, derive_seed(seed, p, length, k))) for k in range(p)]
            )
            series = MultiChannelSeries(data)
            totals = [0.0] * len(algorithms)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ShortWindowWarning)
                for alloc in algorithms:
                    multiscale_profile(series, params, alloc)
                for _ in range(reps):
                    for i, alloc in enumerate(algorithms):
                        start = time.perf_counter()
                        multiscale_profile(series, params, alloc)
                        totals[i] += time.perf_counter() - start
            for alloc, total in zip(algorithms, totals):
                table.rows.append(TimingRow(alloc.variant.label, p, length, total / reps))
    return table


# --- brute-force oracle -----------------------------------------------------
# Deliberately shares nothing with the core path: its own subset generator,
# a dict keyed by label tuples, and plain Python loops.


def _subsets(items, k):
    if k == 0:
        yield ()
        return
    for i in range(len(items) - k + 1):
        for rest in _subsets(items[i + 1 :], k - 1):
            yield (items[i],) + rest


def _oracle_weight(core_hits, m, allocation):
    variant = allocation.variant
    if variant is Variant.MVMDE:
        return 1.0
    if variant is Variant.T:
        return 1.0 if core_hits >= allocation.t else 0.0
    if variant is Variant.ST:
        return 1.0 if core_hits >= allocation.t else allocation.w
    return core_hits / m


def oracle_entropy(quantized, m: int, c: int, d: int, allocation: StrataAllocation) -> float:
    """Reference entropy of a quantized series by explicit enumeration.

    Intended for small inputs only.
    """
    channels = [[int(v) for v in row] for row in np.atleast_2d(np.asarray(quantized))]
    p, n = len(channels), len(channels[0])
    if allocation.variant is not Variant.MVMDE:
        if any(k >= p for k in allocation.designated):
            raise ValidationError("designated channel out of range")
        if allocation.variant in (Variant.T, Variant.ST) and allocation.t > m:
            raise ValidationError("threshold exceeds m")
    n_vec = n - (m - 1) * d
    if n_vec < 1:
        raise WindowTooShortError("series too short for one embedded vector")
    positions = list(range(m * p))
    patterns = {}
    total = 0.0
    for j in range(n_vec):
        z, owner = [], []
        for k in range(p):
            for i in range(m):
                z.append(channels[k][j + i * d])
                owner.append(k)
        for subset in _subsets(positions, m):
            hits = 0
            for q in subset:
                if allocation.variant is not Variant.MVMDE and owner[q] in allocation.designated:
                    hits += 1
            weight = _oracle_weight(hits, m, allocation)
            key = tuple(z[q] for q in subset)
            patterns[key] = patterns.get(key, 0.0) + weight
            total += weight
    if total <= 0:
        raise ValidationError("no weighted patterns")
    entropy = 0.0
    for count in patterns.values():
        freq = count / total
        if freq > 0:
            entropy -= freq * math.log(freq)
    return entropy / math.log(c**m)
