"""Multivariate multiscale dispersion entropy and its stratified variants.

The pipeline for one scale factor is::

    coarse_grain -> ncdf_map -> quantize -> dispersion_histogram -> normalized_shannon

``dispersion_histogram`` is where the variants differ. Every size-``m``
subset of positions in the concatenated embedded vector (length ``m * p``)
yields one dispersion pattern per embedded vector. mvMDE counts all of them
equally; the stratified variants weight each subset by how many of its
positions fall inside designated (core) channels:

========  ==========================================
variant   weight of a subset with ``h`` core samples
========  ==========================================
MVMDE     1
T         1 if ``h >= t`` else 0
ST        1 if ``h >= t`` else ``w``
P         ``h / m``
========  ==========================================

Channel indices are zero based throughout the Python API.
"""
from __future__ import annotations

import enum
import itertools
import math
import numbers
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import ndtr

from .errors import (
    ContractViolationError,
    DegenerateChannelError,
    EmptyHistogramError,
    InvalidScaleError,
    ScaleError,
    SmvmdeError,
    ThresholdError,
    ValidationError,
    WindowTooShortError,
)

__all__ = [
    "Variant",
    "MultiChannelSeries",
    "EntropyParams",
    "StrataAllocation",
    "WeightedSubvectorScheme",
    "DispersionHistogram",
    "MultiscaleProfile",
    "ShortWindowWarning",
    "PARAMETER_PRESETS",
    "coarse_grain",
    "channel_stats",
    "ncdf_map",
    "quantize",
    "enumerate_weighted_subvectors",
    "dispersion_histogram",
    "normalized_shannon",
    "quantized_entropy",
    "dispersion_entropy",
    "multiscale_profile",
    "multiscale_profiles",
    "minimum_window_length",
]

# Largest double strictly below 1 and smallest positive double; keeps the
# NCDF output inside the open unit interval in the far tails.
_UPPER = float(np.nextafter(1.0, 0.0))
_LOWER = float(np.nextafter(0.0, 1.0))


def _is_int(value) -> bool:
    return isinstance(value, numbers.Integral) and not isinstance(value, bool)


class ShortWindowWarning(UserWarning):
    """Window shorter than the recommended minimum for stratified analysis."""


class Variant(str, enum.Enum):
    MVMDE = "mvmde"
    T = "t"
    ST = "st"
    P = "p"

    @classmethod
    def parse(cls, value: "str | Variant") -> "Variant":
        if isinstance(value, Variant):
            return value
        key = str(value).strip().lower().replace("_", "-")
        aliases = {
            "mvmde": cls.MVMDE,
            "t": cls.T,
            "t-smvmde": cls.T,
            "threshold": cls.T,
            "st": cls.ST,
            "st-smvmde": cls.ST,
            "soft-threshold": cls.ST,
            "p": cls.P,
            "p-smvmde": cls.P,
            "proportional": cls.P,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValidationError(f"unknown variant {value!r}") from None

    @property
    def label(self) -> str:
        return {"mvmde": "mvMDE", "t": "T", "st": "ST", "p": "P"}[self.value]

    @property
    def stratified(self) -> bool:
        return self is not Variant.MVMDE


@dataclass(frozen=True, eq=False)
class MultiChannelSeries:
    """A ``p x L`` block of equally long, finite, named channels."""

    data: np.ndarray
    names: tuple[str, ...] = ()

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64, copy=True)
        if data.ndim == 1:
            data = data[np.newaxis, :]
        if data.ndim != 2:
            raise ValidationError(f"expected a 2-D (channels, samples) array, got shape {data.shape}")
        p, length = data.shape
        if p < 1 or length < 1:
            raise ValidationError("series needs at least one channel and one sample")
        if not np.all(np.isfinite(data)):
            raise ValidationError("series contains NaN or infinite samples")
        names = tuple(self.names) if self.names else tuple(f"ch{k + 1}" for k in range(p))
        if len(names) != p:
            raise ValidationError(f"{len(names)} channel names for {p} channels")
        if len(set(names)) != p:
            raise ValidationError("channel names must be unique")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "names", names)

    @classmethod
    def from_channels(cls, channels: Mapping[str, Sequence[float]] | Sequence[Sequence[float]]):
        if isinstance(channels, Mapping):
            names = tuple(channels)
            rows = [np.asarray(channels[n], dtype=np.float64) for n in names]
        else:
            names = ()
            rows = [np.asarray(ch, dtype=np.float64) for ch in channels]
        if len({len(r) for r in rows}) > 1:
            raise ValidationError("all channels must have the same length")
        return cls(np.vstack(rows) if rows else np.empty((0, 0)), names)

    @property
    def p(self) -> int:
        return self.data.shape[0]

    @property
    def length(self) -> int:
        return self.data.shape[1]

    def __len__(self):
        return self.length

    def index_of(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise ValidationError(f"no channel named {name!r}; have {list(self.names)}") from None

    def reorder(self, order: Sequence[int]) -> "MultiChannelSeries":
        order = list(order)
        return MultiChannelSeries(self.data[order], tuple(self.names[k] for k in order))

    def __eq__(self, other):
        if not isinstance(other, MultiChannelSeries):
            return NotImplemented
        return self.names == other.names and np.array_equal(self.data, other.data)

    __hash__ = None


@dataclass(frozen=True)
class EntropyParams:
    """Embedding dimension ``m``, class count ``c``, delay ``d`` and largest scale."""

    m: int = 2
    c: int = 5
    d: int = 1
    tau_max: int = 20

    def __post_init__(self):
        for name, low in (("m", 2), ("c", 2), ("d", 1), ("tau_max", 1)):
            value = getattr(self, name)
            if not _is_int(value) or value < low:
                raise ValidationError(f"{name} must be an integer >= {low}, got {value!r}")
            object.__setattr__(self, name, int(value))

    @property
    def n_patterns(self) -> int:
        return self.c**self.m

    @property
    def taus(self) -> range:
        return range(1, self.tau_max + 1)


@dataclass(frozen=True)
class StrataAllocation:
    """Which variant to run and how channels are split into core and periphery.

    ``designated`` holds zero-based indices of the core channels. ``t`` is
    read by T and ST only, ``w`` by ST only.
    """

    variant: Variant = Variant.MVMDE
    designated: frozenset = frozenset()
    t: int | None = None
    w: float | None = None

    def __post_init__(self):
        variant = Variant.parse(self.variant)
        object.__setattr__(self, "variant", variant)
        designated = frozenset(int(k) for k in self.designated)
        object.__setattr__(self, "designated", designated)
        if any(k < 0 for k in designated):
            raise ValidationError("designated channel indices must be >= 0")
        if variant is Variant.MVMDE:
            return
        if not designated:
            raise ValidationError(f"{variant.label} needs at least one designated channel")
        if variant in (Variant.T, Variant.ST):
            if not _is_int(self.t) or self.t < 1:
                raise ValidationError(f"threshold t must be an integer >= 1, got {self.t!r}")
            object.__setattr__(self, "t", int(self.t))
        if variant is Variant.ST:
            if not isinstance(self.w, numbers.Real) or isinstance(self.w, bool) or not 0.0 <= self.w <= 1.0:
                raise ValidationError(f"reduced weight w must lie in [0, 1], got {self.w!r}")
            object.__setattr__(self, "w", float(self.w))

    @classmethod
    def mvmde(cls) -> "StrataAllocation":
        return cls(Variant.MVMDE)

    @classmethod
    def threshold(cls, designated: Iterable[int], t: int) -> "StrataAllocation":
        return cls(Variant.T, frozenset(designated), t=t)

    @classmethod
    def soft_threshold(cls, designated: Iterable[int], t: int, w: float) -> "StrataAllocation":
        return cls(Variant.ST, frozenset(designated), t=t, w=w)

    @classmethod
    def proportional(cls, designated: Iterable[int]) -> "StrataAllocation":
        return cls(Variant.P, frozenset(designated))

    def with_designated(self, designated: Iterable[int]) -> "StrataAllocation":
        return StrataAllocation(self.variant, frozenset(designated), self.t, self.w)

    def validate_for(self, m: int, p: int) -> None:
        if self.variant is Variant.MVMDE:
            return
        if max(self.designated) >= p:
            raise ValidationError(
                f"designated channel index {max(self.designated)} out of range for {p} channels"
            )
        if self.variant in (Variant.T, Variant.ST) and self.t > m:
            raise ThresholdError(f"threshold t={self.t} exceeds embedding dimension m={m}")

    def describe(self) -> str:
        parts = [self.variant.label]
        if self.variant.stratified:
            parts.append("designated=" + "+".join(str(k) for k in sorted(self.designated)))
        if self.t is not None and self.variant in (Variant.T, Variant.ST):
            parts.append(f"t={self.t}")
        if self.variant is Variant.ST:
            parts.append(f"w={self.w:g}")
        return " ".join(parts)


# Standard settings for synthetic noise, physiological waveforms and their
# first derivatives.
PARAMETER_PRESETS = {
    "synthetic": {"params": EntropyParams(m=2, c=5, d=1, tau_max=20), "t": 1, "w": 0.5},
    "waveform": {"params": EntropyParams(m=3, c=6, d=1, tau_max=10), "t": 2, "w": 0.5},
    "derivative": {"params": EntropyParams(m=3, c=4, d=1, tau_max=1), "t": 2, "w": 0.5},
}


@dataclass(frozen=True, eq=False)
class WeightedSubvectorScheme:
    """All size-``m`` position subsets of the embedded vector with their weights.

    Positions are zero based; channel ``k`` owns positions ``k*m .. k*m + m - 1``.
    ``core_counts[i]`` is the number of positions of ``combos[i]`` that lie in
    designated channels.
    """

    m: int
    p: int
    combos: tuple[tuple[int, ...], ...]
    weights: np.ndarray
    core_counts: np.ndarray

    @property
    def total_weight(self) -> float:
        return float(math.fsum(self.weights))

    def __len__(self):
        return len(self.combos)

    def weight_of(self, combo: Sequence[int]) -> float:
        return float(self.weights[self.combos.index(tuple(combo))])


@dataclass(frozen=True, eq=False)
class DispersionHistogram:
    """Weighted pattern counts; index ``sum((v_i - 1) * c**i)`` for pattern ``v``."""

    counts: np.ndarray
    total: float
    c: int
    m: int

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.total

    def as_dict(self) -> dict[tuple[int, ...], float]:
        """Nonzero counts keyed by pattern tuple with 1-based class labels."""
        out = {}
        for index in np.flatnonzero(self.counts):
            labels = []
            rest = int(index)
            for _ in range(self.m):
                rest, digit = divmod(rest, self.c)
                labels.append(digit + 1)
            out[tuple(labels)] = float(self.counts[index])
        return out


@dataclass(frozen=True)
class MultiscaleProfile:
    values: dict

    @property
    def taus(self) -> list[int]:
        return sorted(self.values)

    def as_array(self) -> np.ndarray:
        return np.array([self.values[tau] for tau in self.taus])

    def __getitem__(self, tau):
        return self.values[tau]


def coarse_grain(series: MultiChannelSeries, tau: int) -> MultiChannelSeries:
    """Average non-overlapping blocks of ``tau`` samples in every channel.

    Trailing ``L mod tau`` samples are discarded.
    """
    if not _is_int(tau) or tau < 1:
        raise InvalidScaleError(f"scale factor must be an integer >= 1, got {tau!r}")
    tau = int(tau)
    n = series.length // tau
    if n < 1:
        raise InvalidScaleError(f"scale factor {tau} exceeds series length {series.length}")
    if tau == 1:
        return series
    blocks = series.data[:, : n * tau].reshape(series.p, n, tau)
    return MultiChannelSeries(blocks.mean(axis=2), series.names)


def channel_stats(series: MultiChannelSeries) -> tuple[np.ndarray, np.ndarray]:
    """Per-channel mean and sample standard deviation (``ddof=1``).

    A single-sample series has no spread and is reported as degenerate by
    :func:`ncdf_map`.
    """
    mu = series.data.mean(axis=1)
    if series.length < 2:
        return mu, np.zeros(series.p)
    return mu, series.data.std(axis=1, ddof=1)


def ncdf_map(series: MultiChannelSeries, stats: tuple[np.ndarray, np.ndarray]) -> MultiChannelSeries:
    """Map every sample through the normal CDF of its channel.

    ``stats`` must come from the original (scale 1) series so that the
    mapping stays the same at every scale.
    """
    mu, sigma = (np.asarray(s, dtype=np.float64).reshape(-1) for s in stats)
    if mu.shape != (series.p,) or sigma.shape != (series.p,):
        raise ValidationError(f"stats must provide one mean and one std per channel ({series.p})")
    bad = np.flatnonzero(~(sigma > 0) | ~np.isfinite(sigma))
    if bad.size:
        names = [series.names[k] for k in bad]
        raise DegenerateChannelError(f"zero or invalid standard deviation in channel(s) {names}")
    z = (series.data - mu[:, None]) / sigma[:, None]
    y = np.clip(ndtr(z), _LOWER, _UPPER)
    return MultiChannelSeries(y, series.names)


def quantize(mapped: MultiChannelSeries | np.ndarray, c: int) -> np.ndarray:
    """Assign mapped samples in ``(0, 1)`` to classes ``1..c``.

    Uses ``round(c*y + 0.5)`` with halves rounded up, clamped to ``[1, c]``.
    Returns an integer array of shape ``(p, N)``.
    """
    if not _is_int(c) or c < 2:
        raise ValidationError(f"c must be an integer >= 2, got {c!r}")
    y = mapped.data if isinstance(mapped, MultiChannelSeries) else np.asarray(mapped, dtype=np.float64)
    if not np.all((y > 0.0) & (y < 1.0)):
        raise ContractViolationError("quantize expects samples strictly inside (0, 1)")
    labels = np.floor(c * y + 1.0).astype(np.int64)
    return np.clip(labels, 1, int(c))


def enumerate_weighted_subvectors(m: int, p: int, allocation: StrataAllocation) -> WeightedSubvectorScheme:
    """Enumerate the ``C(m*p, m)`` position subsets and weight them per variant."""
    if m < 2 or p < 1:
        raise ValidationError(f"need m >= 2 and p >= 1, got m={m}, p={p}")
    allocation.validate_for(m, p)
    combos = tuple(itertools.combinations(range(m * p), m))
    core = allocation.designated
    h = np.array([sum(1 for q in combo if q // m in core) for combo in combos], dtype=np.int64)
    variant = allocation.variant
    if variant is Variant.MVMDE:
        weights = np.ones(len(combos))
    elif variant is Variant.T:
        weights = np.where(h >= allocation.t, 1.0, 0.0)
    elif variant is Variant.ST:
        weights = np.where(h >= allocation.t, 1.0, allocation.w)
    else:
        weights = h / m
    weights.setflags(write=False)
    h.setflags(write=False)
    return WeightedSubvectorScheme(m, p, combos, weights, h)


def _as_labels(quantized, c: int | None) -> np.ndarray:
    u = np.asarray(quantized)
    if u.ndim == 1:
        u = u[np.newaxis, :]
    if u.ndim != 2:
        raise ValidationError(f"quantized series must be 2-D (channels, samples), got shape {u.shape}")
    if not np.issubdtype(u.dtype, np.integer):
        if not np.all(np.isfinite(u)) or not np.array_equal(u, np.round(u)):
            raise ValidationError("quantized series must hold integer class labels")
        u = u.astype(np.int64)
    if u.size and u.min() < 1:
        raise ValidationError("class labels start at 1")
    if c is not None and u.size and u.max() > c:
        raise ValidationError(f"class label {u.max()} exceeds c={c}")
    return u.astype(np.int64, copy=False)


def _embedded_positions(u: np.ndarray, m: int, d: int) -> np.ndarray:
    """Rows of zero-based labels, one per position of the concatenated vector."""
    p, n = u.shape
    n_vec = n - (m - 1) * d
    if n_vec < 1:
        raise WindowTooShortError(
            f"{n} samples per channel cannot form an embedded vector with m={m}, d={d}"
        )
    rows = np.empty((p * m, n_vec), dtype=np.int64)
    for k in range(p):
        for i in range(m):
            rows[k * m + i] = u[k, i * d : i * d + n_vec] - 1
    return rows


def _combination_counts(rows: np.ndarray, m: int, c: int, combos, selected) -> dict[int, np.ndarray]:
    """Integer pattern counts for every selected combination index."""
    n_patterns = c**m
    scaled = [rows * (c**i) for i in range(m)]
    out = {}
    for idx in selected:
        combo = combos[idx]
        code = scaled[0][combo[0]].copy()
        for i in range(1, m):
            code += scaled[i][combo[i]]
        out[idx] = np.bincount(code, minlength=n_patterns)
    return out


def _weighted_histogram(per_combo, scheme, n_vec, c, m) -> DispersionHistogram:
    counts = np.zeros(c**m)
    for idx, weight in enumerate(scheme.weights):
        if weight != 0.0:
            counts += weight * per_combo[idx]
    return DispersionHistogram(counts, n_vec * scheme.total_weight, c, m)


def dispersion_histogram(quantized, m: int, d: int, scheme: WeightedSubvectorScheme, c: int) -> DispersionHistogram:
    """Accumulate weighted dispersion patterns over all embedded vectors.

    ``quantized`` holds class labels ``1..c`` with shape ``(p, N)``.
    Subsets with zero weight are skipped entirely.
    """
    u = _as_labels(quantized, c)
    if u.shape[0] != scheme.p or scheme.m != m:
        raise ValidationError(
            f"scheme built for m={scheme.m}, p={scheme.p} but got m={m}, p={u.shape[0]}"
        )
    if not _is_int(d) or d < 1:
        raise ValidationError(f"d must be an integer >= 1, got {d!r}")
    rows = _embedded_positions(u, m, d)
    selected = np.flatnonzero(scheme.weights)
    per_combo = _combination_counts(rows, m, c, scheme.combos, selected)
    return _weighted_histogram(per_combo, scheme, rows.shape[1], c, m)


def normalized_shannon(hist: DispersionHistogram, c: int | None = None, m: int | None = None) -> float:
    """Shannon entropy of the pattern frequencies divided by ``ln(c**m)``."""
    c = hist.c if c is None else c
    m = hist.m if m is None else m
    if not hist.total > 0:
        raise EmptyHistogramError("histogram has no weighted pattern instances")
    freq = hist.counts / hist.total
    freq = freq[freq > 0]
    value = -float(np.sum(freq * np.log(freq))) / (m * math.log(c))
    return min(max(value, 0.0), 1.0)


def quantized_entropy(quantized, m: int, c: int, d: int, allocation: StrataAllocation) -> float:
    """Entropy of an already quantized series (skips coarse graining and mapping)."""
    u = _as_labels(quantized, c)
    scheme = enumerate_weighted_subvectors(m, u.shape[0], allocation)
    return normalized_shannon(dispersion_histogram(u, m, d, scheme, c), c, m)


def minimum_window_length(params: EntropyParams, p: int, stratified: bool = True) -> float:
    """Lower bound on ``L``: ``c**m * tau_max``, divided by ``C(m*p, m)`` for plain mvMDE."""
    bound = params.n_patterns * params.tau_max
    if stratified:
        return float(bound)
    return bound / math.comb(params.m * p, params.m)


def _check_window(series, params, allocations):
    if any(a.variant.stratified for a in allocations):
        bound = minimum_window_length(params, series.p, stratified=True)
        if series.length <= bound:
            warnings.warn(
                f"window length {series.length} <= c^m * tau_max = {bound:g}; "
                "stratified outputs may overlap between channel allocations",
                ShortWindowWarning,
                stacklevel=3,
            )


def dispersion_entropy(
    series: MultiChannelSeries,
    params: EntropyParams,
    allocation: StrataAllocation,
    tau: int = 1,
    stats: tuple[np.ndarray, np.ndarray] | None = None,
) -> float:
    """Entropy of ``series`` at scale ``tau``.

    ``stats`` defaults to :func:`channel_stats` of ``series`` itself, which is
    the scale-1 series the mapping must be anchored to.
    """
    if stats is None:
        stats = channel_stats(series)
    mapped = ncdf_map(coarse_grain(series, tau), stats)
    u = quantize(mapped, params.c)
    scheme = enumerate_weighted_subvectors(params.m, series.p, allocation)
    return normalized_shannon(dispersion_histogram(u, params.m, params.d, scheme, params.c))


def multiscale_profiles(
    series: MultiChannelSeries,
    params: EntropyParams,
    allocations: Sequence[StrataAllocation],
) -> list[MultiscaleProfile]:
    """Profiles for several allocations over ``tau = 1..tau_max``.

    Per-subset pattern counts are computed once per scale and reused by every
    allocation, so running all variants costs little more than the most
    expensive one.
    """
    allocations = list(allocations)
    m, c, d = params.m, params.c, params.d
    schemes = [enumerate_weighted_subvectors(m, series.p, a) for a in allocations]
    _check_window(series, params, allocations)
    needed = sorted(set().union(*(np.flatnonzero(s.weights).tolist() for s in schemes))) if schemes else []
    stats = channel_stats(series)
    combos = schemes[0].combos if schemes else ()
    values = [dict() for _ in allocations]
    for tau in params.taus:
        try:
            u = quantize(ncdf_map(coarse_grain(series, tau), stats), c)
            rows = _embedded_positions(u, m, d)
            per_combo = _combination_counts(rows, m, c, combos, needed)
            for out, scheme in zip(values, schemes):
                hist = _weighted_histogram(per_combo, scheme, rows.shape[1], c, m)
                out[tau] = normalized_shannon(hist)
        except SmvmdeError as exc:
            raise ScaleError(tau, exc) from exc
    return [MultiscaleProfile(v) for v in values]


def multiscale_profile(
    series: MultiChannelSeries, params: EntropyParams, allocation: StrataAllocation
) -> MultiscaleProfile:
    """Entropy at every scale ``tau = 1..params.tau_max``."""
    return multiscale_profiles(series, params, [allocation])[0]
