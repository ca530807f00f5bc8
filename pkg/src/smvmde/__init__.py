"""Multivariate multiscale dispersion entropy (mvMDE) and stratified variants.

The stratified variants prioritize designated (core) channels over the
remaining (periphery) channels when counting dispersion patterns:

* ``T``: drop subvectors with fewer than ``t`` core samples,
* ``ST``: down-weight them by ``w`` instead,
* ``P``: weight every subvector by its share of core samples.
"""
from .core import (
    PARAMETER_PRESETS,
    DispersionHistogram,
    EntropyParams,
    MultiChannelSeries,
    MultiscaleProfile,
    ShortWindowWarning,
    StrataAllocation,
    Variant,
    WeightedSubvectorScheme,
    channel_stats,
    coarse_grain,
    dispersion_entropy,
    dispersion_histogram,
    enumerate_weighted_subvectors,
    multiscale_profile,
    multiscale_profiles,
    ncdf_map,
    normalized_shannon,
    quantize,
    quantized_entropy,
)
from .errors import SmvmdeError

__version__ = "0.1.0"
