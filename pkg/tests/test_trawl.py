import io
import math

import numpy as np
import pytest
from scipy import special

from trawlspec import (
    ArfimaMatched,
    Binomial,
    Explicit,
    Geometric,
    MixedPoisson,
    Poisson,
    Power,
    RandomLine,
    ResourceLimitError,
    SimulationConfig,
    TimeSeries,
    TrawlModel,
    arfima_acv,
    model_from_config,
    sequence_tail_sum,
    sequence_value,
    simulate,
    spectral_params,
    theoretical_acv,
    theoretical_mean,
    truncation_index,
)
from trawlspec.trawl import model_config, sequence_values


class TestSequences:
    def test_power_first_value(self):
        assert sequence_value(Power(c=10.0, alpha=1.5), 0) == pytest.approx(10.0)

    def test_geometric_value(self):
        assert sequence_value(Geometric(c=1.0, rho=0.5), 3) == pytest.approx(0.125)

    def test_arfima_matched_first_value(self):
        # a_0 = r(0) - r(1) = r(0) * (1 - d/(1-d)) at d = 0.25
        r = arfima_acv(0.25, 1)
        assert sequence_value(ArfimaMatched(c=1.0, d=0.25), 0) == pytest.approx(r[0] * (1 - 1.0 / 3.0))

    def test_tail_sums(self):
        assert sequence_tail_sum(Geometric(c=1.0, rho=0.5), 3) == pytest.approx(0.25)
        assert sequence_tail_sum(ArfimaMatched(c=2.0, d=0.25), 0) == pytest.approx(2.0 * arfima_acv(0.25, 0)[0])
        assert sequence_tail_sum(Power(c=1.0, alpha=2.0), 0) == pytest.approx(math.pi**2 / 6.0)

    def test_explicit_beyond_list(self):
        seq = Explicit([1.0, 0.5])
        assert sequence_value(seq, 5) == 0.0
        assert sequence_tail_sum(seq, 1) == pytest.approx(0.5)

    @pytest.mark.parametrize("d", [0.05, 0.25, 0.45])
    def test_telescoping_identity(self, d):
        seq = ArfimaMatched(c=1.7, d=d)
        r = arfima_acv(d, 200)
        for k in range(0, 201, 8):
            assert sequence_tail_sum(seq, k) == pytest.approx(1.7 * r[k], rel=1e-10)


class TestArfimaAcv:
    def test_white_noise(self):
        assert arfima_acv(0.0, 3) == pytest.approx([1.0, 0.0, 0.0, 0.0])

    def test_ratio_recursion(self):
        r = arfima_acv(0.25, 1)
        assert r[1] / r[0] == pytest.approx(1.0 / 3.0)

    def test_r0_gamma_oracle(self):
        # independent evaluation through the gamma function
        want = math.sqrt(math.pi) / special.gamma(0.75) ** 2
        assert arfima_acv(0.25, 0)[0] == pytest.approx(want, rel=1e-12)
        assert want == pytest.approx(1.18034, abs=5e-6)

    def test_domain(self):
        with pytest.raises(ValueError):
            arfima_acv(0.5, 3)


class TestTruncation:
    def test_geometric_example(self):
        model = TrawlModel(Poisson(), Geometric(c=1.0, rho=0.5))
        assert truncation_index(model, 0.25) == 2

    def test_loose_tolerance(self):
        model = TrawlModel(Poisson(), Geometric(c=1.0, rho=0.5))
        assert truncation_index(model, 0.999) <= 1

    def test_power_tolerance_verified_by_direct_summation(self):
        model = TrawlModel(Poisson(), Power(c=10.0, alpha=1.5))
        J = truncation_index(model, 1e-3)
        # brute-force check over 10J terms plus an integral bound for the rest
        j = np.arange(10 * J, dtype=float)
        a = 10.0 * (j + 1.0) ** -1.5
        total = a.sum() + 10.0 * 2.0 * (10.0 * J) ** -0.5
        tail_J = a[J:].sum() + 10.0 * 2.0 * (10.0 * J) ** -0.5
        tail_Jm1 = tail_J + a[J - 1]
        assert tail_J <= 1e-3 * total
        assert tail_Jm1 > 1e-3 * total


class TestTheory:
    def test_mean_examples(self):
        assert theoretical_mean(TrawlModel(RandomLine(1.0), Power(c=1.0, alpha=1.5))) == 0.0
        assert theoretical_mean(TrawlModel(Poisson(), Geometric(c=1.0, rho=0.5))) == pytest.approx(2.0)
        want = 10.0 * special.zeta(1.5, 1)
        assert theoretical_mean(TrawlModel(Binomial(10), Power(c=1.0, alpha=1.5))) == pytest.approx(want)

    def test_acv_poisson_geometric(self):
        model = TrawlModel(Poisson(), Geometric(c=1.0, rho=0.5))
        r = theoretical_acv(model, 4)
        assert r == pytest.approx([2.0 ** (1 - k) for k in range(5)])

    def test_acv_poisson_power_direct_sum_oracle(self):
        model = TrawlModel(Poisson(), Power(c=10.0, alpha=1.5))
        r0 = theoretical_acv(model, 0)[0]
        j = np.arange(2 * 10**7, dtype=float)
        brute = (10.0 * (j + 1.0) ** -1.5).sum()
        # integral remainder of the brute-force sum
        brute += 10.0 * 2.0 * (2 * 10**7) ** -0.5
        assert r0 == pytest.approx(brute, rel=1e-6)

    def test_acv_binomial_explicit(self):
        model = TrawlModel(Binomial(10), Explicit([0.5]))
        assert theoretical_acv(model, 0)[0] == pytest.approx(2.5)

    def test_acv_mixed_poisson_matches_series(self):
        spec = MixedPoisson(zeta_shape=2.0, zeta_rate=3.0)
        model = TrawlModel(spec, Power(c=2.0, alpha=1.6))
        r = theoretical_acv(model, 3)
        K = 2 * 10**6
        j = np.arange(K, dtype=float)
        a = 2.0 * (j + 1.0) ** -1.6
        min_tail = 2.0 * K ** (1.0 - 1.6) / 0.6  # integral remainder of sum a_j beyond K
        for k in range(4):
            brute = spec.zeta_mean * (np.minimum(a[: a.size - k], a[k:]).sum() + min_tail)
            brute += spec.zeta_var * (a[: a.size - k] * a[k:]).sum()
            assert r[k] == pytest.approx(brute, rel=1e-4)

    def test_acv_randomline_geometric_closed_form(self):
        model = TrawlModel(RandomLine(1.5), Geometric(c=2.0, rho=0.5))
        r = theoretical_acv(model, 2)
        want = [1.5 * 4.0 * 0.5**k / (1 - 0.25) for k in range(3)]
        assert r == pytest.approx(want, rel=1e-12)

    def test_acv_nonincreasing_and_nonnegative(self):
        for seed in (Poisson(), Binomial(10), MixedPoisson(1.0, 1.0)):
            seq = Power(c=1.0, alpha=1.5) if isinstance(seed, Binomial) else Power(c=10.0, alpha=1.5)
            r = theoretical_acv(TrawlModel(seed, seq), 10)
            assert np.all(r >= 0)
            if isinstance(seed, Poisson):
                assert np.all(np.diff(r) <= 1e-12)

    @pytest.mark.parametrize("alpha", [1.3, 1.7])
    def test_loglog_slope_matches_exponent(self, alpha):
        model = TrawlModel(Poisson(), Power(c=10.0, alpha=alpha))
        ks = np.unique(np.geomspace(64, 1024, 12).astype(int))
        r = theoretical_acv(model, int(ks.max()))[ks]
        slope = np.polyfit(np.log(ks), np.log(r), 1)[0]
        assert slope == pytest.approx(1.0 - alpha, abs=0.05)

    def test_spectral_params(self):
        assert spectral_params(TrawlModel(Poisson(), Power(c=10.0, alpha=1.5))) == (1.5, 0.25)
        a, d = spectral_params(TrawlModel(Poisson(), ArfimaMatched(c=1.0, d=0.1)))
        assert (a, d) == (pytest.approx(1.8), pytest.approx(0.1))
        a, d = spectral_params(TrawlModel(Poisson(), Geometric(c=1.0, rho=0.5)))
        assert math.isinf(a) and d == 0.0


class TestSimulation:
    def test_randomline_single_term_is_white_noise(self):
        model = TrawlModel(RandomLine(1.0), Explicit([1.0]))
        x = simulate(model, SimulationConfig(n=20000, rng_seed=5)).values
        n = x.size
        assert abs(x.mean()) <= 4.0 / math.sqrt(n)
        assert x.var() == pytest.approx(1.0, abs=0.05)
        lag1 = np.dot(x[:-1] - x.mean(), x[1:] - x.mean()) / n
        assert abs(lag1) <= 4.0 / math.sqrt(n)

    def test_poisson_power_mean_recovery(self):
        model = TrawlModel(Poisson(), Power(c=10.0, alpha=1.5))
        x = simulate(model, SimulationConfig(n=5000, rng_seed=11, max_terms=200_000)).values
        r = theoretical_acv(model, 4999)
        var_mean = (r[0] + 2.0 * np.sum((1.0 - np.arange(1, 5000) / 5000.0) * r[1:])) / 5000.0
        assert abs(x.mean() - 10.0 * special.zeta(1.5, 1)) <= 4.0 * math.sqrt(var_mean)

    def test_binomial_counts_are_integers(self):
        model = TrawlModel(Binomial(10), Power(c=1.0, alpha=1.3))
        x = simulate(model, SimulationConfig(n=5000, rng_seed=3, max_terms=50_000)).values
        assert np.all(x >= 0)
        assert np.all(x == np.round(x))

    def test_determinism(self):
        model = TrawlModel(Poisson(), Power(c=10.0, alpha=1.5))
        cfg = SimulationConfig(n=2000, rng_seed=99, max_terms=20_000)
        x1 = simulate(model, cfg).values
        x2 = simulate(model, cfg).values
        assert np.array_equal(x1, x2)

    def test_engines_agree_in_law(self):
        model = TrawlModel(Poisson(), Geometric(c=2.0, rho=0.6))
        r_theory = theoretical_acv(model, 2)
        mu = theoretical_mean(model)
        for engine in ("direct", "events"):
            cfg = SimulationConfig(n=40000, rng_seed=17, engine=engine, truncation_tol=1e-6)
            x = simulate(model, cfg).values
            assert abs(x.mean() - mu) < 0.1
            assert abs(x.var() - r_theory[0]) < 0.2

    def test_memory_guard(self):
        model = TrawlModel(Poisson(), Power(c=10.0, alpha=1.3))
        with pytest.raises(ResourceLimitError, match="truncation_tol"):
            simulate(model, SimulationConfig(n=5000, rng_seed=0))

    def test_mixed_poisson_simulation_moments(self):
        spec = MixedPoisson(zeta_shape=2.0, zeta_rate=2.0)
        model = TrawlModel(spec, Geometric(c=1.0, rho=0.5))
        x = simulate(model, SimulationConfig(n=60000, rng_seed=21, truncation_tol=1e-8)).values
        assert x.mean() == pytest.approx(theoretical_mean(model), abs=0.1)
        assert x.var() == pytest.approx(theoretical_acv(model, 0)[0], rel=0.08)


class TestSerialization:
    def test_csv_round_trip(self):
        ts = TimeSeries(values=np.array([1.0, -2.5, 3.25]))
        buf = io.StringIO()
        ts.to_csv(buf)
        buf.seek(0)
        assert buf.getvalue().splitlines()[0] == "x"
        back = TimeSeries.from_csv(io.StringIO(buf.getvalue()))
        assert np.array_equal(back.values, ts.values)

    def test_model_config_round_trip(self):
        cfg = {
            "seed": {"seed": "binomial", "trials": 10},
            "sequence": {"kind": "power", "c": 1.0, "alpha": 1.3},
        }
        model = model_from_config(cfg)
        assert model.seed == Binomial(10)
        assert model_config(model) == cfg

    def test_sequence_values_vectorized(self):
        seq = ArfimaMatched(c=1.0, d=0.3)
        vals = sequence_values(seq, 50)
        assert np.all(np.diff(vals) <= 0)
        assert vals[7] == pytest.approx(sequence_value(seq, 7))
