"""Effect sizes, bootstrap intervals of effect-size differences, paired summaries.

Differences are always ``first - second``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import DegenerateDistributionsError, ValidationError

__all__ = [
    "EntropyDistribution",
    "EffectSizeEntry",
    "EffectSizeReport",
    "PairedDiffSummary",
    "hedges_g",
    "bootstrap_pairing",
    "bootstrap_effect_size_difference",
    "effect_size_report",
    "paired_difference_summary",
]


@dataclass(frozen=True, eq=False)
class EntropyDistribution:
    """Entropy values of one group (one value per analysis window) at one scale."""

    values: np.ndarray
    label: str = ""
    tau: int | None = None

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        if values.size == 0:
            raise ValidationError("distribution is empty")
        if not np.all(np.isfinite(values)):
            raise ValidationError("distribution contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size


def _values(dist) -> np.ndarray:
    if isinstance(dist, EntropyDistribution):
        return dist.values
    return EntropyDistribution(dist).values


def _hedges(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = a.size, b.size
    pooled = math.sqrt(((na - 1) * a.var(ddof=1) + (nb - 1) * b.var(ddof=1)) / (na + nb - 2))
    # Constant groups can leave a rounding-level variance; test spread directly.
    if not pooled > 0 or (np.ptp(a) == 0 and np.ptp(b) == 0):
        raise DegenerateDistributionsError("pooled standard deviation is zero")
    correction = 1.0 - 3.0 / (4.0 * (na + nb) - 9.0)
    return correction * (a.mean() - b.mean()) / pooled


def hedges_g(a, b) -> float:
    """Bias-corrected standardized mean difference, positive when ``mean(a) > mean(b)``.

    Uses the pooled sample standard deviation and the small-sample factor
    ``J = 1 - 3 / (4 (n_a + n_b) - 9)``.
    """
    a, b = _values(a), _values(b)
    if a.size < 2 or b.size < 2:
        raise ValidationError("hedges_g needs at least two values in each distribution")
    return float(_hedges(a, b))


@dataclass(frozen=True)
class EffectSizeEntry:
    tau: int | None
    baseline_g: float
    mean_diff: float
    ci_lo: float
    ci_hi: float
    n_used: int


@dataclass
class EffectSizeReport:
    entries: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def by_tau(self) -> dict:
        return {e.tau: e for e in self.entries}


def bootstrap_pairing(n_boot: int, seed: int) -> np.ndarray:
    """Random pairing of the ``n_boot`` resamples of the two groups.

    Entry ``i`` is the index of the second-group resample paired with the
    ``i``-th first-group resample. Reuse the same array across variants to
    keep comparisons consistent.
    """
    if n_boot < 2:
        raise ValidationError("need at least two bootstrap realizations")
    rng = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(0,)))
    return rng.permutation(n_boot)


def bootstrap_effect_size_difference(
    a,
    b,
    baseline_g: float,
    n_boot: int = 40,
    seed: int = 0,
    pairing: np.ndarray | None = None,
    confidence: float = 0.95,
    tau: int | None = None,
) -> EffectSizeEntry:
    """Bootstrap the difference ``g(a*, b*) - baseline_g``.

    ``a`` and ``b`` are each resampled ``n_boot`` times with replacement.
    Resamples are paired by ``pairing`` (default :func:`bootstrap_pairing`
    of ``seed``), Hedges' g is computed per pair and ``baseline_g`` is
    subtracted. Returns the mean difference and a percentile interval.
    Pairs whose pooled standard deviation is zero are dropped with a
    warning.
    """
    a, b = _values(a), _values(b)
    if a.size < 2 or b.size < 2:
        raise ValidationError("bootstrap needs at least two values in each distribution")
    if n_boot < 2:
        raise ValidationError("need at least two bootstrap realizations")
    if pairing is None:
        pairing = bootstrap_pairing(n_boot, seed)
    pairing = np.asarray(pairing)
    if sorted(pairing.tolist()) != list(range(n_boot)):
        raise ValidationError(f"pairing must be a permutation of range({n_boot})")
    rng_a = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(1,)))
    rng_b = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(2,)))
    idx_a = rng_a.integers(0, a.size, size=(n_boot, a.size))
    idx_b = rng_b.integers(0, b.size, size=(n_boot, b.size))
    diffs = []
    for i in range(n_boot):
        try:
            g = _hedges(a[idx_a[i]], b[idx_b[pairing[i]]])
        except DegenerateDistributionsError:
            continue
        diffs.append(g - baseline_g)
    if not diffs:
        raise DegenerateDistributionsError("every bootstrap pair had zero pooled standard deviation")
    if len(diffs) < n_boot:
        warnings.warn(f"{n_boot - len(diffs)} of {n_boot} bootstrap pairs dropped (zero pooled sd)")
    diffs = np.array(diffs)
    alpha = (1.0 - confidence) / 2.0
    lo, hi = np.percentile(diffs, [100 * alpha, 100 * (1 - alpha)])
    mean = float(diffs.mean())
    # Keep lo <= mean <= hi when the percentile grid straddles the mean.
    return EffectSizeEntry(tau, float(baseline_g), mean, float(min(lo, mean)), float(max(hi, mean)), diffs.size)


def effect_size_report(
    a_by_tau: Mapping,
    b_by_tau: Mapping,
    baseline_a_by_tau: Mapping | None = None,
    baseline_b_by_tau: Mapping | None = None,
    n_boot: int = 40,
    seed: int = 0,
) -> EffectSizeReport:
    """Per-scale bootstrap report against a baseline algorithm.

    The baseline effect size at each scale is Hedges' g of the baseline
    distributions (not bootstrapped); without baseline distributions it is 0
    and the report describes the variant's own effect size.
    """
    if set(a_by_tau) != set(b_by_tau):
        raise ValidationError("both groups must cover the same scales")
    if (baseline_a_by_tau is None) != (baseline_b_by_tau is None):
        raise ValidationError("give both baseline distributions or neither")
    pairing = bootstrap_pairing(n_boot, seed)
    report = EffectSizeReport()
    for tau in sorted(a_by_tau):
        base = 0.0
        if baseline_a_by_tau is not None:
            base = hedges_g(baseline_a_by_tau[tau], baseline_b_by_tau[tau])
        report.entries.append(
            bootstrap_effect_size_difference(
                a_by_tau[tau], b_by_tau[tau], base, n_boot, seed, pairing=pairing, tau=tau
            )
        )
    return report


@dataclass(frozen=True)
class PairedDiffSummary:
    mean_abs_diff: float
    improved_count: int
    positive_count: int
    n_pairs: int


def paired_difference_summary(pairs: Sequence, baseline_pairs: Sequence) -> PairedDiffSummary:
    """Summarize ``state1 - state2`` differences against a baseline algorithm.

    ``improved_count`` counts pairs whose absolute difference exceeds the
    baseline's; ``positive_count`` counts pairs with ``state1 > state2``.
    """
    pairs = np.asarray(pairs, dtype=np.float64)
    base = np.asarray(baseline_pairs, dtype=np.float64)
    if pairs.ndim != 2 or pairs.shape[1] != 2 or pairs.shape[0] < 1:
        raise ValidationError("pairs must be a non-empty sequence of (state1, state2)")
    if base.shape != pairs.shape:
        raise ValidationError(f"{len(pairs)} pairs but {len(base)} baseline pairs")
    diff = pairs[:, 0] - pairs[:, 1]
    base_diff = base[:, 0] - base[:, 1]
    return PairedDiffSummary(
        mean_abs_diff=float(np.mean(np.abs(diff))),
        improved_count=int(np.count_nonzero(np.abs(diff) > np.abs(base_diff))),
        positive_count=int(np.count_nonzero(diff > 0)),
        n_pairs=int(diff.size),
    )
