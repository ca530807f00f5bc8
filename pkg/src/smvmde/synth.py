"""Seeded white Gaussian and 1/f noise, and the six three-channel test setups."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import MultiChannelSeries
from .errors import ValidationError

__all__ = [
    "NoiseKind",
    "NoiseSpec",
    "SetupSpec",
    "STRATIFIED_SETUPS",
    "MVMDE_SETUPS",
    "derive_seed",
    "gen_wgn",
    "gen_pink",
    "generate",
    "build_setup",
]


class NoiseKind(str, enum.Enum):
    WGN = "wgn"
    PINK = "pink"

    @property
    def label(self) -> str:
        return "WGN" if self is NoiseKind.WGN else "1/f"


@dataclass(frozen=True)
class NoiseSpec:
    kind: NoiseKind
    length: int
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "kind", NoiseKind(self.kind))
        if isinstance(self.length, bool) or int(self.length) != self.length or self.length < 2:
            raise ValidationError(f"noise length must be an integer >= 2, got {self.length!r}")
        object.__setattr__(self, "length", int(self.length))


def derive_seed(master: int, *keys: int) -> int:
    """Mix a master seed with integer keys into an independent 64-bit seed."""
    seq = np.random.SeedSequence(int(master), spawn_key=tuple(int(k) for k in keys))
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def gen_wgn(spec: NoiseSpec) -> np.ndarray:
    if spec.kind is not NoiseKind.WGN:
        raise ValidationError(f"gen_wgn called with kind {spec.kind.value}")
    return np.random.default_rng(spec.seed).standard_normal(spec.length)


def gen_pink(spec: NoiseSpec) -> np.ndarray:
    """1/f noise by spectral shaping of white noise.

    Bin amplitudes are scaled by ``1/sqrt(f)`` so power falls as ``1/f``; the
    DC bin is zeroed and the result is rescaled to unit sample variance.
    """
    if spec.kind is not NoiseKind.PINK:
        raise ValidationError(f"gen_pink called with kind {spec.kind.value}")
    white = np.random.default_rng(spec.seed).standard_normal(spec.length)
    spectrum = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(spec.length)
    scale = np.zeros_like(freqs)
    scale[1:] = 1.0 / np.sqrt(freqs[1:])
    pink = np.fft.irfft(spectrum * scale, n=spec.length)
    pink -= pink.mean()
    return pink / pink.std(ddof=1)


def generate(spec: NoiseSpec) -> np.ndarray:
    return gen_wgn(spec) if spec.kind is NoiseKind.WGN else gen_pink(spec)


@dataclass(frozen=True)
class SetupSpec:
    """One three-channel experimental input.

    ``designated`` is the index of the core channel, or ``None`` when every
    channel is of the same kind and any choice is equivalent.
    """

    setup_id: int
    kinds: tuple[NoiseKind, ...]
    designated: int | None
    family: str = "stratified"

    @property
    def description(self) -> str:
        n_wgn = sum(k is NoiseKind.WGN for k in self.kinds)
        n_pink = len(self.kinds) - n_wgn
        text = f"{n_wgn}xWGN+{n_pink}x1/f"
        if self.designated is not None:
            text += f" ({self.kinds[self.designated].label} designated)"
        return text

    @property
    def designated_kind(self) -> NoiseKind | None:
        return None if self.designated is None else self.kinds[self.designated]


_W, _P = NoiseKind.WGN, NoiseKind.PINK

STRATIFIED_SETUPS = {
    1: SetupSpec(1, (_W, _W, _W), None),
    2: SetupSpec(2, (_W, _W, _P), 0),
    3: SetupSpec(3, (_W, _P, _P), 0),
    4: SetupSpec(4, (_W, _W, _P), 2),
    5: SetupSpec(5, (_W, _P, _P), 1),
    6: SetupSpec(6, (_P, _P, _P), None),
}

MVMDE_SETUPS = {
    1: SetupSpec(1, (_W, _W, _W), None, "mvmde"),
    2: SetupSpec(2, (_W, _W, _P), None, "mvmde"),
    3: SetupSpec(3, (_W, _P, _P), None, "mvmde"),
    4: SetupSpec(4, (_P, _P, _P), None, "mvmde"),
}


def _resolve(spec) -> SetupSpec:
    if isinstance(spec, SetupSpec):
        return spec
    try:
        return STRATIFIED_SETUPS[int(spec)]
    except (KeyError, TypeError, ValueError):
        raise ValidationError(f"unknown setup {spec!r}; expected 1..6") from None


def build_setup(spec: SetupSpec | int, length: int, seed: int) -> tuple[MultiChannelSeries, frozenset]:
    """Build the series for one realization of a setup.

    Channel ``k`` of kind ``K`` is seeded from ``(seed, k, K)``, so setups
    with the same channel composition (2 and 4, 3 and 5) share their data
    and differ only in which channel is designated. Setups without a
    required designation designate channel 0.
    """
    spec = _resolve(spec)
    channels, names, counters = [], [], {}
    for k, kind in enumerate(spec.kinds):
        counters[kind] = counters.get(kind, 0) + 1
        code = 0 if kind is NoiseKind.WGN else 1
        channels.append(generate(NoiseSpec(kind, length, derive_seed(seed, k, code))))
        names.append(f"{kind.value}{counters[kind]}")
    designated = frozenset({0 if spec.designated is None else spec.designated})
    return MultiChannelSeries(np.vstack(channels), tuple(names)), designated
