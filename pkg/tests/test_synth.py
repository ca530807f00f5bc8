import numpy as np
import pytest
from scipy.signal import welch

from smvmde.errors import ValidationError
from smvmde.synth import (
    MVMDE_SETUPS,
    STRATIFIED_SETUPS,
    NoiseKind,
    NoiseSpec,
    build_setup,
    derive_seed,
    gen_pink,
    gen_wgn,
)


def _psd_slope(x):
    f, power = welch(x, fs=1.0, nperseg=1024)
    band = (f >= 0.005) & (f <= 0.25)
    return np.polyfit(np.log(f[band]), np.log(power[band]), 1)[0]


class TestWgn:
    def test_deterministic(self):
        spec = NoiseSpec(NoiseKind.WGN, 500, 42)
        np.testing.assert_array_equal(gen_wgn(spec), gen_wgn(spec))

    def test_moments(self):
        x = gen_wgn(NoiseSpec(NoiseKind.WGN, 100_000, 7))
        assert abs(x.mean()) < 0.02
        assert abs(x.var(ddof=1) - 1.0) < 0.02

    def test_seeds_uncorrelated(self):
        a = gen_wgn(NoiseSpec(NoiseKind.WGN, 100_000, 1))
        b = gen_wgn(NoiseSpec(NoiseKind.WGN, 100_000, 2))
        assert abs(np.corrcoef(a, b)[0, 1]) < 0.02

    def test_flat_spectrum(self):
        assert abs(_psd_slope(gen_wgn(NoiseSpec(NoiseKind.WGN, 15_000, 3)))) < 0.15

    @pytest.mark.parametrize("length", [0, 1, -4])
    def test_invalid_length(self, length):
        with pytest.raises(ValidationError):
            NoiseSpec(NoiseKind.WGN, length, 0)

    def test_wrong_kind(self):
        with pytest.raises(ValidationError):
            gen_wgn(NoiseSpec(NoiseKind.PINK, 10, 0))


class TestPink:
    @pytest.mark.parametrize("seed", range(5))
    def test_spectral_slope(self, seed):
        assert _psd_slope(gen_pink(NoiseSpec(NoiseKind.PINK, 15_000, seed))) == pytest.approx(-1.0, abs=0.15)

    def test_deterministic(self):
        spec = NoiseSpec(NoiseKind.PINK, 1001, 9)
        np.testing.assert_array_equal(gen_pink(spec), gen_pink(spec))

    @pytest.mark.parametrize("length", [2, 3, 300, 15_000])
    def test_unit_variance(self, length):
        x = gen_pink(NoiseSpec(NoiseKind.PINK, length, 5))
        assert x.shape == (length,)
        assert x.var(ddof=1) == pytest.approx(1.0, abs=1e-9)

    def test_wrong_kind(self):
        with pytest.raises(ValidationError):
            gen_pink(NoiseSpec(NoiseKind.WGN, 10, 0))


class TestSetups:
    def test_six_stratified_setups(self):
        compositions = {
            sid: (sum(k is NoiseKind.WGN for k in s.kinds), s.designated_kind)
            for sid, s in STRATIFIED_SETUPS.items()
        }
        assert compositions == {
            1: (3, None),
            2: (2, NoiseKind.WGN),
            3: (1, NoiseKind.WGN),
            4: (2, NoiseKind.PINK),
            5: (1, NoiseKind.PINK),
            6: (0, None),
        }

    def test_mvmde_setups(self):
        assert [sum(k is NoiseKind.WGN for k in s.kinds) for s in MVMDE_SETUPS.values()] == [3, 2, 1, 0]

    def test_setup_4_designates_pink(self):
        series, designated = build_setup(4, 200, 0)
        (core,) = designated
        assert series.names[core].startswith("pink")
        assert [n[:3] for n in series.names] == ["wgn", "wgn", "pin"]

    def test_setup_1_and_6(self):
        s1, _ = build_setup(1, 200, 0)
        s6, _ = build_setup(6, 200, 0)
        assert all(n.startswith("wgn") for n in s1.names)
        assert all(n.startswith("pink") for n in s6.names)

    def test_reproducible(self):
        a, _ = build_setup(3, 300, 123)
        b, _ = build_setup(3, 300, 123)
        assert a == b
        c, _ = build_setup(3, 300, 124)
        assert not np.array_equal(a.data, c.data)

    def test_channels_independent(self):
        series, _ = build_setup(1, 15_000, 77)
        r = np.corrcoef(series.data)
        assert np.all(np.abs(r[np.triu_indices(3, 1)]) < 0.05)

    def test_unknown_setup(self):
        with pytest.raises(ValidationError):
            build_setup(7, 100, 0)

    def test_derive_seed_distinct(self):
        seeds = {derive_seed(0, r, k) for r in range(20) for k in range(3)}
        assert len(seeds) == 60
        assert derive_seed(5, 1, 2) == derive_seed(5, 1, 2)
