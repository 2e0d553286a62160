"""Independent brute-force validators: empirical joint cumulants, decay scans,
quadrature cross-checks, and an exact Gaussian ARFIMA sampler.

These routines deliberately avoid the code paths they validate: the ARFIMA
check integrates the spectral density by adaptive quadrature instead of the
gamma-function recursion, the cumulant check estimates moments from raw
simulation output, and the decay scans measure empirical-covariance
fluctuations against the truncated model's exact autocovariances.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import seeds as seeds_mod
from .spectral import empirical_acv
from .seeds import Poisson, UnsupportedSeedError
from .trawl import (
    Explicit,
    TrawlModel,
    arfima_acv,
    sequence_tail_sum,
    sequence_values,
    theoretical_acv,
    theoretical_mean,
    truncation_index,
    _is_nonincreasing,
)

__all__ = [
    "DecayScanReport",
    "empirical_cum4",
    "levy_cum4",
    "sample_at_lags",
    "empcov_fluctuation_scan",
    "acv_error_rate_scan",
    "arfima_quadrature_check",
    "simulate_arfima_gaussian",
    "replication_rng",
]


def replication_rng(base_seed: int, index: int) -> np.random.Generator:
    """Independent stream for one replication: Philox(base_seed) jumped `index` times."""
    return np.random.Generator(np.random.Philox(key=np.uint64(base_seed)).jumped(index))


# ---------------------------------------------------------------------------
# cumulants
# ---------------------------------------------------------------------------

def empirical_cum4(samples) -> float:
    """Plug-in fourth joint cumulant of columns (A, B, C, D).

    Columns are centered by their empirical means; then
    cum4 = E[ABCD] - E[AB]E[CD] - E[AC]E[BD] - E[AD]E[BC].
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim != 2 or x.shape[1] != 4:
        raise ValueError("samples must be an (R, 4) array")
    if x.shape[0] < 1000:
        warnings.warn("fewer than 1000 samples: cum4 estimate will be imprecise", stacklevel=2)
    xc = x - x.mean(axis=0)
    a, b, c, d = xc.T
    return float(
        np.mean(a * b * c * d)
        - np.mean(a * b) * np.mean(c * d)
        - np.mean(a * c) * np.mean(b * d)
        - np.mean(a * d) * np.mean(b * c)
    )


def levy_cum4(model: TrawlModel, lags) -> float:
    """Exact cum(X_{t1},...,X_{t4}) for the Poisson-seed model: tail sum at t4 - t1."""
    t = sorted(int(v) for v in lags)
    if len(t) != 4:
        raise ValueError("need exactly four lags")
    if not isinstance(model.seed, Poisson):
        raise UnsupportedSeedError("closed-form joint cumulants require the Poisson seed")
    if not _is_nonincreasing(model.sequence):
        raise ValueError("closed-form joint cumulants require a nonincreasing sequence")
    return sequence_tail_sum(model.sequence, t[3] - t[0])


def sample_at_lags(model: TrawlModel, lags, reps: int, rng: np.random.Generator,
                   truncation_tol: float = 1e-3, max_terms: int | None = None) -> np.ndarray:
    """`reps` independent draws of (X_{t} : t in lags) from the truncated model.

    Exact joint sampling: every seed copy in the truncation window is drawn
    jointly (via level increments) at the handful of heights it contributes.
    Returns shape (reps, len(lags)).
    """
    lags = [int(v) for v in lags]
    J = truncation_index(model, truncation_tol)
    if max_terms is not None:
        J = min(J, int(max_terms))
    J = max(J, 1)
    t_lo, t_hi = min(lags) - J + 1, max(lags)
    out = np.zeros((reps, len(lags)))
    for t in range(t_lo, t_hi + 1):
        idx = [i for i, lag in enumerate(lags) if 0 <= lag - t < J]
        if not idx:
            continue
        levels = np.array([float(sequence_values(model.sequence, lags[i] - t + 1)[lags[i] - t]) for i in idx])
        order = np.argsort(-levels, kind="stable")
        vals = seeds_mod.sample_seed_values(model.seed, levels[order], rng, size=reps)
        inv = np.empty_like(order)
        inv[order] = np.arange(order.size)
        out[:, idx] += vals[:, inv]
    return out


# ---------------------------------------------------------------------------
# decay scans
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecayScanReport:
    n_grid: tuple
    values: tuple
    stderrs: tuple
    slope: float
    slope_stderr: float
    reps: int

    def to_csv(self, path_or_buf) -> None:
        buf = path_or_buf if hasattr(path_or_buf, "write") else open(path_or_buf, "w")
        try:
            buf.write("n,statistic,stderr\n")
            for n, v, s in zip(self.n_grid, self.values, self.stderrs):
                buf.write(f"{n},{v:.10g},{s:.10g}\n")
        finally:
            if buf is not path_or_buf:
                buf.close()

    def to_json(self) -> str:
        return json.dumps(
            {
                "n_grid": list(self.n_grid),
                "values": list(self.values),
                "stderrs": list(self.stderrs),
                "slope": self.slope,
                "slope_stderr": self.slope_stderr,
                "reps": self.reps,
            }
        )


def _fit_loglog_slope(n_grid, values) -> tuple[float, float]:
    x = np.log(np.asarray(n_grid, dtype=float))
    y = np.log(np.maximum(np.abs(np.asarray(values, dtype=float)), 1e-300))
    xc = x - x.mean()
    slope = float(np.sum(xc * y) / np.sum(xc * xc))
    resid = y - y.mean() - slope * xc
    dof = max(len(x) - 2, 1)
    se = float(np.sqrt(np.sum(resid**2) / dof / np.sum(xc * xc)))
    return slope, se


def _effective_model(model: TrawlModel, J: int) -> TrawlModel:
    return TrawlModel(seed=model.seed, sequence=Explicit(sequence_values(model.sequence, J)))


def empcov_fluctuation_scan(model: TrawlModel, k: int, ell: int, n_grid, reps: int,
                            rng_seed: int = 0, truncation_tol: float = 1e-2,
                            max_terms: int | None = 100_000, n_batches: int = 20) -> DecayScanReport:
    """Monte Carlo decay of cov(rtilde_n(k), rtilde_n(ell)) across sample sizes.

    rtilde is the non-centered estimator applied to the exactly-centered
    series (the truncated model's mean is known in closed form).
    """
    if reps < 2 * n_batches:
        raise ValueError("reps too small for batching")
    J = min(truncation_index(model, truncation_tol), max_terms or 2**62)
    mu = theoretical_mean(_effective_model(model, max(J, 1)))
    values, stderrs = [], []
    stream = 0
    for n in n_grid:
        n = int(n)
        prods_k = np.empty(reps)
        prods_l = np.empty(reps)
        for r in range(reps):
            rng = replication_rng(rng_seed, stream)
            stream += 1
            x = _simulate_with_rng(model, n, J, rng) - mu
            prods_k[r] = np.dot(x[: n - k], x[k:]) / n
            prods_l[r] = np.dot(x[: n - ell], x[ell:]) / n
        batches = np.array_split(np.arange(reps), n_batches)
        covs = np.array([np.cov(prods_k[b], prods_l[b])[0, 1] for b in batches])
        values.append(float(np.mean(covs)))
        stderrs.append(float(np.std(covs, ddof=1) / math.sqrt(n_batches)))
    slope, se = _fit_loglog_slope(n_grid, values)
    return DecayScanReport(tuple(int(v) for v in n_grid), tuple(values), tuple(stderrs), slope, se, reps)


def acv_error_rate_scan(model: TrawlModel, kmax: int, n_grid, reps: int,
                        rng_seed: int = 0, truncation_tol: float = 1e-2,
                        max_terms: int | None = 100_000, n_batches: int = 20) -> DecayScanReport:
    """Monte Carlo decay of max_{k<=kmax} E|rhat_n(k) - r(k)| across sample sizes."""
    if reps < 2 * n_batches:
        raise ValueError("reps too small for batching")
    J = min(truncation_index(model, truncation_tol), max_terms or 2**62)
    r_true = theoretical_acv(_effective_model(model, max(J, 1)), kmax)
    values, stderrs = [], []
    stream = 0
    for n in n_grid:
        n = int(n)
        errs = np.empty((reps, kmax + 1))
        for r in range(reps):
            rng = replication_rng(rng_seed, stream)
            stream += 1
            x = _simulate_with_rng(model, n, J, rng)
            errs[r] = np.abs(empirical_acv(x, kmax) - r_true)
        batches = np.array_split(np.arange(reps), n_batches)
        stats = np.array([np.max(errs[b].mean(axis=0)) for b in batches])
        values.append(float(np.max(errs.mean(axis=0))))
        stderrs.append(float(np.std(stats, ddof=1) / math.sqrt(n_batches)))
    slope, se = _fit_loglog_slope(n_grid, values)
    return DecayScanReport(tuple(int(v) for v in n_grid), tuple(values), tuple(stderrs), slope, se, reps)


def _simulate_with_rng(model: TrawlModel, n: int, J: int, rng: np.random.Generator) -> np.ndarray:
    """Simulation core with an externally supplied generator (scan plumbing)."""
    from . import trawl as trawl_mod

    if isinstance(model.seed, seeds_mod.RandomLine):
        return trawl_mod._simulate_randomline(model, n, J, rng)
    if _is_nonincreasing(model.sequence) and not isinstance(model.seed, seeds_mod.RandomLine):
        return trawl_mod._simulate_events(model, n, J, rng)
    return trawl_mod._simulate_direct(model, n, J, rng)


# ---------------------------------------------------------------------------
# quadrature cross-check
# ---------------------------------------------------------------------------

def arfima_quadrature_check(d: float, kmax: int) -> float:
    """max_k |recursion ACV - quadrature ACV| for ARFIMA(0,d,0), k <= kmax.

    The integral (1/pi) int_0^pi (2 sin(l/2))^{-2d} cos(k l) dl is split at a
    small cut: below it the |l|^{-2d} endpoint singularity is removed by the
    substitution l = u^{1/(1-2d)}; above it an oscillatory-weight adaptive
    rule handles cos(k l).
    """
    if not abs(d) <= 0.45:
        raise ValueError("need |d| <= 0.45")
    rec = arfima_acv(d, kmax)
    cut = 0.25
    err = 0.0
    expo = 1.0 / (1.0 - 2.0 * d)

    def density(lam):
        return (2.0 * np.sin(lam / 2.0)) ** (-2.0 * d)

    u_cut = cut ** (1.0 - 2.0 * d)
    for k in range(kmax + 1):
        def low(u, kk=k):
            lam = u**expo
            return density(lam) * np.cos(kk * lam) * expo * u ** (expo - 1.0)

        i_low, _ = integrate.quad(low, 0.0, u_cut, limit=200, epsabs=1e-12, epsrel=1e-12)
        if k == 0:
            i_high, _ = integrate.quad(density, cut, math.pi, limit=200, epsabs=1e-12, epsrel=1e-12)
        else:
            i_high, _ = integrate.quad(density, cut, math.pi, weight="cos", wvar=k, limit=200,
                                       epsabs=1e-12, epsrel=1e-12)
        quad_val = (i_low + i_high) / math.pi
        err = max(err, abs(quad_val - rec[k]))
    return err


# ---------------------------------------------------------------------------
# Gaussian ARFIMA sampler (circulant embedding)
# ---------------------------------------------------------------------------

def simulate_arfima_gaussian(d: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Exact stationary Gaussian ARFIMA(0,d,0) sample of length n (Davies-Harte)."""
    L = 1
    while L < 2 * n:
        L *= 2
    r = arfima_acv(d, L)
    circ = np.concatenate([r, r[-2:0:-1]])
    lam = np.fft.fft(circ).real
    lam = np.maximum(lam, 0.0)
    M = circ.size
    z = np.empty(M, dtype=complex)
    half = M // 2
    a = rng.standard_normal(half + 1)
    b = rng.standard_normal(half + 1)
    z[0] = a[0] * math.sqrt(2.0)
    z[half] = a[half] * math.sqrt(2.0)
    z[1:half] = a[1:half] + 1j * b[1:half]
    z[half + 1 :] = np.conj(z[1:half][::-1])
    y = np.fft.fft(np.sqrt(lam / (2.0 * M)) * z)
    return y[:n].real
