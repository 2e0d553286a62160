import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from trawlspec import (
    Binomial,
    MixedPoisson,
    Poisson,
    RandomLine,
    UnsupportedSeedError,
    sample_seed_at,
    seed_cov,
    seed_cumulant,
    seed_mean,
    seed_spec_from_config,
)
from trawlspec.seeds import sample_seed_values

ALL_SPECS = [
    RandomLine(innovation_variance=1.3),
    Poisson(),
    MixedPoisson(zeta_shape=2.0, zeta_rate=3.0),
    Binomial(trials=10),
]

COUNTING = ALL_SPECS[1:]


def rng(seed=0):
    return np.random.default_rng(seed)


class TestConstruction:
    def test_from_config_round_trip(self):
        assert seed_spec_from_config({"seed": "poisson"}) == Poisson()
        assert seed_spec_from_config({"seed": "binomial", "trials": 10}) == Binomial(10)
        assert seed_spec_from_config({"seed": "mixed_poisson", "shape": 2, "rate": 3}) == MixedPoisson(2, 3)
        assert seed_spec_from_config({"seed": "random_line", "variance": 1.3}) == RandomLine(1.3)

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            RandomLine(innovation_variance=0.0)
        with pytest.raises(ValueError):
            MixedPoisson(zeta_shape=-1.0, zeta_rate=1.0)
        with pytest.raises(ValueError):
            Binomial(trials=0)


class TestMoments:
    def test_mean_examples(self):
        assert seed_mean(Poisson(), 0.0) == 0.0
        assert seed_mean(Binomial(10), 2.0) == 10.0
        assert seed_mean(MixedPoisson(2.0, 4.0), 0.5) == pytest.approx(0.25)

    def test_mean_negative_level(self):
        with pytest.raises(ValueError):
            seed_mean(Poisson(), -0.1)

    def test_cov_examples(self):
        assert seed_cov(Poisson(), 0.3, 0.7) == pytest.approx(0.3)
        assert seed_cov(Binomial(10), 1.0, 1.0) == pytest.approx(0.0)
        assert seed_cov(MixedPoisson(1.0, 1.0), 1.0, 1.0) == pytest.approx(2.0)

    @given(
        u=st.floats(0.0, 5.0),
        v=st.floats(0.0, 5.0),
        which=st.integers(0, len(ALL_SPECS) - 1),
    )
    @settings(max_examples=200, deadline=None)
    def test_cov_symmetric_and_psd_diagonal(self, u, v, which):
        spec = ALL_SPECS[which]
        assert seed_cov(spec, u, v) == pytest.approx(seed_cov(spec, v, u), abs=1e-12)
        assert seed_cov(spec, u, u) >= -1e-12

    def test_small_level_covariance_scaling(self):
        # cov(u,u)/u approaches a positive constant for the counting seeds
        for spec in COUNTING:
            r3 = seed_cov(spec, 1e-3, 1e-3) / 1e-3
            r4 = seed_cov(spec, 1e-4, 1e-4) / 1e-4
            assert r3 > 0 and r4 > 0
            assert r4 == pytest.approx(r3, rel=2e-3)


class TestCumulants:
    def test_poisson_cumulants(self):
        assert seed_cumulant(Poisson(), 4, 2.0) == pytest.approx(2.0)
        assert seed_cumulant(Poisson(), 1, 0.5) == pytest.approx(0.5)

    def test_unsupported_families(self):
        with pytest.raises(UnsupportedSeedError):
            seed_cumulant(Binomial(10), 4, 0.5)
        with pytest.raises(ValueError):
            seed_cumulant(Poisson(), 5, 0.5)


class TestSampling:
    def test_empty_levels(self):
        draw = sample_seed_at(Poisson(), [], rng())
        assert draw.values.size == 0

    def test_binomial_saturated_levels(self):
        draw = sample_seed_at(Binomial(10), [2.0, 1.5], rng())
        assert list(draw.values) == [10.0, 10.0]

    def test_unsorted_levels_rejected(self):
        with pytest.raises(ValueError):
            sample_seed_at(Poisson(), [0.5, 1.0], rng())

    def test_counting_draws_monotone_integer(self):
        levels = np.array([0.9, 0.5, 0.5, 0.2, 0.0])
        for spec in COUNTING:
            vals = sample_seed_values(spec, levels, rng(1), size=200)
            assert np.all(vals == np.floor(vals))
            assert np.all(vals >= 0)
            assert np.all(np.diff(vals, axis=1) <= 0)

    def test_poisson_monte_carlo_example(self):
        vals = sample_seed_values(Poisson(), [1.0, 0.5], rng(7), size=10**6)
        assert vals[:, 0].mean() == pytest.approx(1.0, abs=3e-3)
        cov = np.cov(vals[:, 0], vals[:, 1])[0, 1]
        assert cov == pytest.approx(0.5, abs=5e-3)

    def test_moment_matching_all_variants(self):
        levels = np.array([0.9, 0.5, 0.2])
        reps = 10**5
        for i, spec in enumerate(ALL_SPECS):
            vals = sample_seed_values(spec, levels, rng(100 + i), size=reps)
            for j, u in enumerate(levels):
                mu = seed_mean(spec, u)
                se = vals[:, j].std(ddof=1) / np.sqrt(reps)
                assert abs(vals[:, j].mean() - mu) <= 4 * max(se, 1e-12), (spec, u)
            for j in range(3):
                for k in range(j, 3):
                    target = seed_cov(spec, levels[j], levels[k])
                    a = vals[:, j] - vals[:, j].mean()
                    b = vals[:, k] - vals[:, k].mean()
                    prod = a * b
                    se = prod.std(ddof=1) / np.sqrt(reps)
                    assert abs(prod.mean() - target) <= 4 * max(se, 1e-12), (spec, j, k)
