"""Trawl height sequences, truncated simulation, and exact second-order theory.

The process is X_k = sum_{j>=0} gamma_{k-j}(a_j) with iid seed copies gamma_i
and a nonnegative height sequence (a_j).  Simulation truncates the sum at J
terms chosen so the discarded tail variance is a small fraction of the total;
means, autocovariances and the long-memory parameters (alpha*, d*) are
computed in closed form or with certified numerical tails.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy import signal, special

from . import seeds as seeds_mod
from .seeds import (
    Binomial,
    MixedPoisson,
    Poisson,
    RandomLine,
    SeedSpec,
    sample_seed_at,
    seed_mean,
    seed_spec_from_config,
    seed_config,
)

__all__ = [
    "Power",
    "Geometric",
    "ArfimaMatched",
    "Explicit",
    "TrawlSequence",
    "TrawlModel",
    "SimulationConfig",
    "TimeSeries",
    "ResourceLimitError",
    "sequence_value",
    "sequence_values",
    "sequence_tail_sum",
    "sequence_sq_tail_sum",
    "arfima_acv",
    "truncation_index",
    "simulate",
    "theoretical_mean",
    "theoretical_acv",
    "spectral_params",
    "model_from_config",
    "model_config",
    "rng_from_seed",
]

_PRODUCT_RTOL = 1e-11


class ResourceLimitError(RuntimeError):
    """Simulation would exceed the configured memory/work budget."""


# ---------------------------------------------------------------------------
# sequences
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Power:
    """a_j = c * (j+1)^(-alpha), alpha > 1."""

    c: float
    alpha: float

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("c must be > 0")
        if not self.alpha > 1:
            raise ValueError("alpha must be > 1 for summability")


@dataclass(frozen=True)
class Geometric:
    """a_j = c * rho^j, rho in (0, 1)."""

    c: float
    rho: float

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("c must be > 0")
        if not 0 < self.rho < 1:
            raise ValueError("rho must be in (0, 1)")


@dataclass(frozen=True)
class ArfimaMatched:
    """a_j = c * (r_d(j) - r_d(j+1)) with r_d the unit-innovation ARFIMA(0,d,0) ACV.

    The tail sums telescope to c * r_d(k), so a Levy (Poisson) seed yields a
    trawl process with exactly the ARFIMA(0,d,0) autocovariance shape.
    """

    c: float
    d: float

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("c must be > 0")
        if not 0 < self.d < 0.5:
            raise ValueError("d must be in (0, 1/2)")


@dataclass(frozen=True)
class Explicit:
    """Finite explicit list of heights; zero beyond the list."""

    values: tuple

    def __init__(self, values):
        vals = tuple(float(v) for v in values)
        if any(v < 0 for v in vals):
            raise ValueError("heights must be nonnegative")
        object.__setattr__(self, "values", vals)

    @property
    def nonincreasing(self) -> bool:
        return all(a >= b for a, b in zip(self.values, self.values[1:]))


TrawlSequence = Union[Power, Geometric, ArfimaMatched, Explicit]


def arfima_acv(d: float, kmax: int) -> np.ndarray:
    """ACV r_d(0..kmax) of ARFIMA(0,d,0) with unit innovation variance.

    Uses r_d(0) = Gamma(1-2d)/Gamma(1-d)^2 and the ratio recursion
    r_d(k+1) = r_d(k) * (k+d)/(k+1-d).
    """
    if not abs(d) < 0.5:
        raise ValueError("d must satisfy |d| < 1/2")
    if kmax < 0:
        raise ValueError("kmax must be >= 0")
    r0 = math.exp(special.gammaln(1.0 - 2.0 * d) - 2.0 * special.gammaln(1.0 - d))
    if kmax == 0:
        return np.array([r0])
    k = np.arange(kmax, dtype=float)
    ratios = (k + d) / (k + 1.0 - d)
    out = np.empty(kmax + 1)
    out[0] = r0
    out[1:] = r0 * np.cumprod(ratios)
    return out


def sequence_value(seq: TrawlSequence, j: int) -> float:
    """Height a_j."""
    if j < 0:
        raise ValueError("j must be >= 0")
    return float(sequence_values(seq, j + 1)[j])


def sequence_values(seq: TrawlSequence, count: int) -> np.ndarray:
    """Vector (a_0, ..., a_{count-1})."""
    j = np.arange(count, dtype=float)
    if isinstance(seq, Power):
        return seq.c * (j + 1.0) ** (-seq.alpha)
    if isinstance(seq, Geometric):
        return seq.c * seq.rho**j
    if isinstance(seq, ArfimaMatched):
        r = arfima_acv(seq.d, count)
        return seq.c * (r[:-1] - r[1:]) if count else np.zeros(0)
    if isinstance(seq, Explicit):
        out = np.zeros(count)
        m = min(count, len(seq.values))
        out[:m] = seq.values[:m]
        return out
    raise TypeError(f"not a TrawlSequence: {seq!r}")


def sequence_tail_sum(seq: TrawlSequence, k: int) -> float:
    """sum_{j>=k} a_j, exact where a closed form exists."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if isinstance(seq, Power):
        return seq.c * float(special.zeta(seq.alpha, k + 1))
    if isinstance(seq, Geometric):
        return seq.c * seq.rho**k / (1.0 - seq.rho)
    if isinstance(seq, ArfimaMatched):
        return seq.c * float(arfima_acv(seq.d, k)[k])
    if isinstance(seq, Explicit):
        return float(np.sum(seq.values[k:]))
    raise TypeError(f"not a TrawlSequence: {seq!r}")


def sequence_sq_tail_sum(seq: TrawlSequence, k: int) -> float:
    """sum_{j>=k} a_j^2 (needed for variance tails)."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if isinstance(seq, Power):
        return seq.c**2 * float(special.zeta(2.0 * seq.alpha, k + 1))
    if isinstance(seq, Geometric):
        return seq.c**2 * seq.rho ** (2 * k) / (1.0 - seq.rho**2)
    if isinstance(seq, ArfimaMatched):
        return _product_tail(seq, 0, j0=k)
    if isinstance(seq, Explicit):
        v = np.asarray(seq.values[k:])
        return float(np.sum(v * v))
    raise TypeError(f"not a TrawlSequence: {seq!r}")


def _threshold_index(seq: TrawlSequence) -> int:
    """Number of leading heights with a_j >= 1 (nonincreasing sequences)."""
    if isinstance(seq, Power):
        if seq.c < 1.0:
            return 0
        t = seq.c ** (1.0 / seq.alpha)
        j1 = int(math.floor(t))
        # a_{j1-1} = c * j1^(-alpha) >= 1 iff j1 <= c^(1/alpha); guard rounding
        while j1 > 0 and seq.c * j1 ** (-seq.alpha) < 1.0:
            j1 -= 1
        while seq.c * (j1 + 1.0) ** (-seq.alpha) >= 1.0:
            j1 += 1
        return j1
    if isinstance(seq, Geometric):
        if seq.c < 1.0:
            return 0
        j1 = int(math.floor(math.log(seq.c) / math.log(1.0 / seq.rho))) + 1
        while j1 > 0 and seq.c * seq.rho ** (j1 - 1) < 1.0:
            j1 -= 1
        while seq.c * seq.rho**j1 >= 1.0:
            j1 += 1
        return j1
    if isinstance(seq, ArfimaMatched):
        j1 = 0
        while sequence_value(seq, j1) >= 1.0:
            j1 += 1
        return j1
    if isinstance(seq, Explicit):
        return sum(1 for v in seq.values if v >= 1.0)
    raise TypeError(f"not a TrawlSequence: {seq!r}")


def _product_tail(seq: TrawlSequence, k: int, j0: int = 0) -> float:
    """sum_{j>=j0} a_j * a_{j+k} with certified relative accuracy ~1e-11."""
    if isinstance(seq, Explicit):
        a = np.asarray(seq.values, dtype=float)
        n = a.size
        if j0 >= n or j0 + k >= n:
            return 0.0
        lead = a[j0 : n - k] if k <= n else a[:0]
        return float(np.sum(lead * a[j0 + k : n]))
    if isinstance(seq, Geometric):
        return seq.c**2 * seq.rho ** (k + 2 * j0) / (1.0 - seq.rho**2)
    if isinstance(seq, Power):
        c2, al = seq.c**2, seq.alpha
        K = max(4096, 8 * (k + 1), 2 * j0)
        while True:
            j = np.arange(j0, K, dtype=float)
            head = float(np.sum((j + 1.0) ** (-al) * (j + k + 1.0) ** (-al)))
            hi = float(special.zeta(2 * al, K + 1))
            lo = float(special.zeta(2 * al, K + k + 1))
            est = head + 0.5 * (hi + lo)
            if hi - lo <= 2 * _PRODUCT_RTOL * max(est, 1e-300) or K > 5e7:
                return c2 * est
            K *= 4
    if isinstance(seq, ArfimaMatched):
        K = max(4096, 8 * (k + 1), 2 * j0)
        while True:
            a = sequence_values(seq, K + k)
            head = float(np.sum(a[j0:K] * a[j0 + k : K + k]))
            # tail <= a_{K+k} * sum_{j>=K} a_j = a_{K+k} * c * r_d(K)
            bound = float(a[-1]) * sequence_tail_sum(seq, K)
            est = head + 0.5 * bound
            if bound <= 2 * _PRODUCT_RTOL * max(est, 1e-300) or K > 5e7:
                return est
            K *= 4
    raise TypeError(f"not a TrawlSequence: {seq!r}")


def _min_sum(seq: TrawlSequence, k: int, thresholded: bool) -> float:
    """sum_j min(~a_j, ~a_{j+k}) where ~a_j = a_j (or a_j 1{a_j<1} if thresholded)."""
    if isinstance(seq, Explicit) and not seq.nonincreasing:
        a = np.asarray(seq.values, dtype=float)
        if thresholded:
            a = np.where(a < 1.0, a, 0.0)
        if k >= a.size:
            return 0.0
        lead = a[: a.size - k]
        return float(np.sum(np.minimum(lead, a[k:])))
    j1 = _threshold_index(seq) if thresholded else 0
    return sequence_tail_sum(seq, j1 + k)


def _is_nonincreasing(seq: TrawlSequence) -> bool:
    return not isinstance(seq, Explicit) or seq.nonincreasing


# ---------------------------------------------------------------------------
# model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrawlModel:
    """Seed family + height sequence; owns the exact second-order theory."""

    seed: SeedSpec
    sequence: TrawlSequence

    def __post_init__(self):
        total = _var_tail(self, 0)
        mean_total = abs(theoretical_mean(self))
        if not (math.isfinite(total) and math.isfinite(mean_total)):
            raise ValueError("summability condition fails: infinite mean or variance sum")


def _var_tail(model: TrawlModel, J: int) -> float:
    """sum_{j>=J} Var gamma(a_j)."""
    seed, seq = model.seed, model.sequence
    if isinstance(seed, Poisson):
        return sequence_tail_sum(seq, J)
    if isinstance(seed, RandomLine):
        return seed.innovation_variance * sequence_sq_tail_sum(seq, J)
    if isinstance(seed, MixedPoisson):
        return seed.zeta_mean * sequence_tail_sum(seq, J) + seed.zeta_var * sequence_sq_tail_sum(seq, J)
    if isinstance(seed, Binomial):
        if isinstance(seq, Explicit) and not seq.nonincreasing:
            a = np.asarray(seq.values[J:], dtype=float)
            a = np.where(a < 1.0, a, 0.0)
            return seed.trials * float(np.sum(a - a * a))
        j1 = max(J, _threshold_index(seq))
        return seed.trials * (sequence_tail_sum(seq, j1) - sequence_sq_tail_sum(seq, j1))
    raise TypeError(f"not a SeedSpec: {seed!r}")


def truncation_index(model: TrawlModel, tol: float) -> int:
    """Smallest J with tail variance <= tol * total variance."""
    if not 0 < tol < 1:
        raise ValueError("tol must be in (0, 1)")
    total = _var_tail(model, 0)
    if total == 0.0:
        return 0
    target = tol * total
    if isinstance(model.sequence, Explicit):
        hi = len(model.sequence.values)
    else:
        hi = 1
        while _var_tail(model, hi) > target:
            hi *= 2
            if hi > 2**62:
                raise ResourceLimitError("truncation index exceeds 2^62; raise truncation_tol")
    lo = 0
    while lo < hi:
        mid = (lo + hi) // 2
        if _var_tail(model, mid) <= target:
            hi = mid
        else:
            lo = mid + 1
    return lo


def theoretical_mean(model: TrawlModel) -> float:
    """sum_j E gamma(a_j)."""
    seed, seq = model.seed, model.sequence
    if isinstance(seed, RandomLine):
        return 0.0
    s1 = sequence_tail_sum(seq, 0)
    if isinstance(seed, Poisson):
        return s1
    if isinstance(seed, MixedPoisson):
        return seed.zeta_mean * s1
    if isinstance(seed, Binomial):
        if isinstance(seq, Explicit) and not seq.nonincreasing:
            return seed.trials * float(np.sum(np.minimum(seq.values, 1.0)))
        j1 = _threshold_index(seq)
        return seed.trials * (j1 + sequence_tail_sum(seq, j1))
    raise TypeError(f"not a SeedSpec: {seed!r}")


def theoretical_acv(model: TrawlModel, kmax: int) -> np.ndarray:
    """Exact autocovariances (r(0), ..., r(kmax)) of the infinite-sum model."""
    if kmax < 0:
        raise ValueError("kmax must be >= 0")
    seed, seq = model.seed, model.sequence
    ks = range(kmax + 1)
    if isinstance(seed, Poisson):
        return np.array([_min_sum(seq, k, thresholded=False) for k in ks])
    if isinstance(seed, RandomLine):
        return np.array([seed.innovation_variance * _product_tail(seq, k) for k in ks])
    if isinstance(seed, MixedPoisson):
        return np.array(
            [seed.zeta_mean * _min_sum(seq, k, False) + seed.zeta_var * _product_tail(seq, k) for k in ks]
        )
    if isinstance(seed, Binomial):
        if isinstance(seq, Explicit) and not seq.nonincreasing:
            thr = Explicit(tuple(v if v < 1.0 else 0.0 for v in seq.values))
            return np.array(
                [seed.trials * (_min_sum(seq, k, True) - _product_tail(thr, k)) for k in ks]
            )
        j1 = _threshold_index(seq)
        return np.array(
            [seed.trials * (sequence_tail_sum(seq, j1 + k) - _product_tail(seq, k, j0=j1)) for k in ks]
        )
    raise TypeError(f"not a SeedSpec: {seed!r}")


def spectral_params(model: TrawlModel) -> tuple[float, float]:
    """(alpha*, d*) with d* = 1 - alpha*/2; short-memory sequences report (inf, 0)."""
    seq = model.sequence
    if isinstance(seq, Power):
        if 1.0 < seq.alpha < 2.0:
            return seq.alpha, 1.0 - seq.alpha / 2.0
        return seq.alpha, 0.0
    if isinstance(seq, ArfimaMatched):
        return 2.0 * (1.0 - seq.d), seq.d
    return math.inf, 0.0


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimulationConfig:
    n: int
    truncation_tol: float = 1e-3
    rng_seed: int = 0
    max_terms: int | None = None
    cell_budget: int = 2**33
    engine: str = "auto"

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if not 0 < self.truncation_tol < 1:
            raise ValueError("truncation_tol must be in (0, 1)")
        if self.engine not in ("auto", "direct", "events"):
            raise ValueError("engine must be one of auto|direct|events")


@dataclass(frozen=True)
class TimeSeries:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(v)):
            raise ValueError("series must be finite")
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    def to_csv(self, path_or_buf) -> None:
        buf = path_or_buf if hasattr(path_or_buf, "write") else open(path_or_buf, "w")
        try:
            buf.write("x\n")
            for v in self.values:
                buf.write(f"{v:.17g}\n")
        finally:
            if buf is not path_or_buf:
                buf.close()

    @classmethod
    def from_csv(cls, path_or_buf) -> "TimeSeries":
        buf = path_or_buf if hasattr(path_or_buf, "read") else open(path_or_buf)
        try:
            header = buf.readline().strip()
            if header != "x":
                raise ValueError(f"expected single-column CSV with header 'x', got {header!r}")
            vals = np.array([float(line) for line in buf if line.strip()])
        finally:
            if buf is not path_or_buf:
                buf.close()
        return cls(values=vals)


def rng_from_seed(seed: int) -> np.random.Generator:
    """Counter-based generator stream for a 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


def _effective_terms(model: TrawlModel, config: SimulationConfig) -> int:
    J = truncation_index(model, config.truncation_tol)
    if config.max_terms is not None:
        J = min(J, int(config.max_terms))
    return max(J, 1)


def _level_counts(seq: TrawlSequence, e: np.ndarray, J: int) -> np.ndarray:
    """M(e) = #{j < J : a_j >= e} for nonincreasing sequences, vectorized."""
    e = np.maximum(e, 1e-300)
    if isinstance(seq, Power):
        m = np.floor((seq.c / e) ** (1.0 / seq.alpha))
    elif isinstance(seq, Geometric):
        t = np.log(seq.c / e) / np.log(1.0 / seq.rho)
        m = np.where(t >= 0, np.floor(t) + 1.0, 0.0)
    else:
        a = sequence_values(seq, J)
        return (np.searchsorted(-a, -e, side="right")).astype(np.int64)
    return np.minimum(m, float(J)).astype(np.int64)


def _simulate_events(model: TrawlModel, n: int, J: int, rng: np.random.Generator) -> np.ndarray:
    """Exact counting-seed path via event runs on a difference array."""
    seed, seq = model.seed, model.sequence
    ncop = n + J - 1
    a0 = sequence_value(seq, 0)
    if isinstance(seed, Poisson):
        counts = rng.poisson(a0, size=ncop)
        e = rng.uniform(0.0, a0, size=int(counts.sum()))
    elif isinstance(seed, MixedPoisson):
        zeta = rng.gamma(seed.zeta_shape, 1.0 / seed.zeta_rate, size=ncop)
        counts = rng.poisson(zeta * a0)
        e = rng.uniform(0.0, a0, size=int(counts.sum()))
    elif isinstance(seed, Binomial):
        counts = np.full(ncop, seed.trials, dtype=np.int64)
        e = rng.uniform(0.0, 1.0, size=ncop * seed.trials)
    else:
        raise TypeError("event engine requires a counting seed")
    m = _level_counts(seq, e, J)
    birth = np.repeat(np.arange(ncop, dtype=np.int64), counts) - (J - 1)
    start = np.maximum(birth, 1)
    stop = np.minimum(birth + m - 1, n)
    keep = stop >= start
    diff = np.bincount(start[keep], minlength=n + 2) - np.bincount(stop[keep] + 1, minlength=n + 2)
    return np.cumsum(diff)[1 : n + 1].astype(float)


def _simulate_direct(model: TrawlModel, n: int, J: int, rng: np.random.Generator) -> np.ndarray:
    """Literal truncated sum: one joint seed draw per copy at levels a_0..a_{J-1}."""
    levels = sequence_values(model.sequence, J)
    order = np.argsort(-levels, kind="stable")
    lv_sorted = levels[order]
    inv = np.empty_like(order)
    inv[order] = np.arange(J)
    x = np.zeros(n)
    for t in range(1 - J, n + 1):
        vals = seeds_mod.sample_seed_values(model.seed, lv_sorted, rng)[inv]
        k0 = max(t, 1)
        k1 = min(t + J - 1, n)
        if k0 <= k1:
            x[k0 - 1 : k1] += vals[k0 - t : k1 - t + 1]
    return x


def _simulate_randomline(model: TrawlModel, n: int, J: int, rng: np.random.Generator) -> np.ndarray:
    a = sequence_values(model.sequence, J)
    eps = rng.normal(0.0, math.sqrt(model.seed.innovation_variance), size=n + J - 1)
    return signal.fftconvolve(eps, a, mode="valid")


def simulate(model: TrawlModel, config: SimulationConfig) -> TimeSeries:
    """Simulate (X_1, ..., X_n), deterministic given config.rng_seed.

    The truncation level J keeps the discarded tail variance below
    truncation_tol of the total (optionally capped by max_terms).  Counting
    seeds use an exact event-run engine when n*J is large; the law is the
    same as the direct per-copy evaluation.
    """
    n = config.n
    J = _effective_terms(model, config)
    if config.max_terms is None and n * J > config.cell_budget:
        raise ResourceLimitError(
            f"n*J = {n * J:.3g} exceeds the cell budget {config.cell_budget:.3g}; "
            "raise truncation_tol or set max_terms"
        )
    rng = rng_from_seed(config.rng_seed)
    engine = config.engine
    if engine == "auto":
        if isinstance(model.seed, RandomLine):
            engine = "randomline"
        elif (n + J) * J <= 2**23 or not _is_nonincreasing(model.sequence):
            engine = "direct"
        else:
            engine = "events"
    if engine == "events":
        if isinstance(model.seed, RandomLine):
            engine = "randomline"
        elif not _is_nonincreasing(model.sequence):
            raise ValueError("event engine requires a nonincreasing sequence")
    if engine == "direct" and (n + J) * J > 2**31:
        raise ResourceLimitError("direct engine budget exceeded; use engine='events' or raise tol")

    if engine == "randomline":
        x = _simulate_randomline(model, n, J, rng)
    elif engine == "direct":
        x = _simulate_direct(model, n, J, rng)
    else:
        x = _simulate_events(model, n, J, rng)
    return TimeSeries(values=x)


# ---------------------------------------------------------------------------
# configuration records
# ---------------------------------------------------------------------------

def _sequence_from_config(cfg: dict) -> TrawlSequence:
    kind = cfg.get("kind")
    if kind == "power":
        return Power(c=float(cfg["c"]), alpha=float(cfg["alpha"]))
    if kind == "geometric":
        return Geometric(c=float(cfg["c"]), rho=float(cfg["rho"]))
    if kind == "arfima":
        return ArfimaMatched(c=float(cfg["c"]), d=float(cfg["d"]))
    if kind == "explicit":
        return Explicit(values=cfg["values"])
    raise ValueError(f"unknown sequence kind: {kind!r}")


def _sequence_config(seq: TrawlSequence) -> dict:
    if isinstance(seq, Power):
        return {"kind": "power", "c": seq.c, "alpha": seq.alpha}
    if isinstance(seq, Geometric):
        return {"kind": "geometric", "c": seq.c, "rho": seq.rho}
    if isinstance(seq, ArfimaMatched):
        return {"kind": "arfima", "c": seq.c, "d": seq.d}
    if isinstance(seq, Explicit):
        return {"kind": "explicit", "values": list(seq.values)}
    raise TypeError(f"not a TrawlSequence: {seq!r}")


def model_from_config(cfg: dict) -> TrawlModel:
    """Build a TrawlModel from the JSON document's 'seed'/'sequence' entries."""
    return TrawlModel(seed=seed_spec_from_config(cfg["seed"]), sequence=_sequence_from_config(cfg["sequence"]))


def model_config(model: TrawlModel) -> dict:
    return {"seed": seed_config(model.seed), "sequence": _sequence_config(model.sequence)}
