"""Seed-process families and joint sampling at finite level sets.

A seed process gamma drives the trawl sum: independent copies are evaluated
at the trawl heights a_0 >= a_1 >= ...  Four families are supported:

* ``RandomLine``  -- gamma(t) = t * eps with eps centered Gaussian,
* ``Poisson``     -- homogeneous unit-intensity counting process,
* ``MixedPoisson``-- gamma(t) = N(zeta * t) with zeta ~ Gamma(shape, rate),
* ``Binomial``    -- gamma(t) = #{i <= trials : U_i <= t}, U_i iid U(0,1).

Every family exposes exact first/second moments; the Poisson family also has
closed-form joint cumulants of any order (all equal the evaluated level).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "RandomLine",
    "Poisson",
    "MixedPoisson",
    "Binomial",
    "SeedSpec",
    "SeedDraw",
    "UnsupportedSeedError",
    "seed_spec_from_config",
    "seed_mean",
    "seed_cov",
    "seed_var",
    "seed_cumulant",
    "sample_seed_at",
    "sample_seed_values",
]


class UnsupportedSeedError(ValueError):
    """Raised when an operation has no closed form for the given seed family."""


@dataclass(frozen=True)
class RandomLine:
    """gamma(t) = t * eps, eps ~ N(0, innovation_variance)."""

    innovation_variance: float = 1.0

    def __post_init__(self):
        if not self.innovation_variance > 0:
            raise ValueError("innovation_variance must be > 0")


@dataclass(frozen=True)
class Poisson:
    """Unit-intensity homogeneous Poisson counting process."""


@dataclass(frozen=True)
class MixedPoisson:
    """gamma(t) = N(zeta * t), zeta ~ Gamma(zeta_shape, rate=zeta_rate)."""

    zeta_shape: float
    zeta_rate: float

    def __post_init__(self):
        if not (self.zeta_shape > 0 and self.zeta_rate > 0):
            raise ValueError("zeta_shape and zeta_rate must be > 0")

    @property
    def zeta_mean(self) -> float:
        return self.zeta_shape / self.zeta_rate

    @property
    def zeta_var(self) -> float:
        return self.zeta_shape / self.zeta_rate**2


@dataclass(frozen=True)
class Binomial:
    """gamma(t) = number of `trials` iid U(0,1) points below t."""

    trials: int

    def __post_init__(self):
        if not (isinstance(self.trials, (int, np.integer)) and self.trials >= 1):
            raise ValueError("trials must be an integer >= 1")


SeedSpec = Union[RandomLine, Poisson, MixedPoisson, Binomial]

COUNTING_SEEDS = (Poisson, MixedPoisson, Binomial)


def seed_spec_from_config(cfg: dict) -> SeedSpec:
    """Build a SeedSpec from a configuration record.

    Accepted forms: ``{"seed": "poisson"}``, ``{"seed": "binomial", "trials": 10}``,
    ``{"seed": "mixed_poisson", "shape": s, "rate": r}``,
    ``{"seed": "random_line", "variance": v}``.
    """
    kind = cfg.get("seed")
    if kind == "poisson":
        return Poisson()
    if kind == "binomial":
        return Binomial(trials=int(cfg["trials"]))
    if kind == "mixed_poisson":
        return MixedPoisson(zeta_shape=float(cfg["shape"]), zeta_rate=float(cfg["rate"]))
    if kind == "random_line":
        return RandomLine(innovation_variance=float(cfg.get("variance", 1.0)))
    raise ValueError(f"unknown seed family: {kind!r}")


def seed_config(spec: SeedSpec) -> dict:
    """Inverse of :func:`seed_spec_from_config`."""
    if isinstance(spec, Poisson):
        return {"seed": "poisson"}
    if isinstance(spec, Binomial):
        return {"seed": "binomial", "trials": spec.trials}
    if isinstance(spec, MixedPoisson):
        return {"seed": "mixed_poisson", "shape": spec.zeta_shape, "rate": spec.zeta_rate}
    if isinstance(spec, RandomLine):
        return {"seed": "random_line", "variance": spec.innovation_variance}
    raise TypeError(f"not a SeedSpec: {spec!r}")


@dataclass(frozen=True)
class SeedDraw:
    """One joint realization gamma(levels[j]) of a single seed copy."""

    levels: np.ndarray
    values: np.ndarray


def _check_levels(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise ValueError("levels must be nonnegative")
    return u


def seed_mean(spec: SeedSpec, u):
    """Exact E gamma(u) for level(s) u >= 0."""
    u = _check_levels(u)
    if isinstance(spec, RandomLine):
        return np.zeros_like(u) if u.ndim else 0.0
    if isinstance(spec, Poisson):
        return u if u.ndim else float(u)
    if isinstance(spec, MixedPoisson):
        out = u * spec.zeta_mean
        return out if u.ndim else float(out)
    if isinstance(spec, Binomial):
        out = spec.trials * np.minimum(u, 1.0)
        return out if u.ndim else float(out)
    raise TypeError(f"not a SeedSpec: {spec!r}")


def seed_cov(spec: SeedSpec, u, v):
    """Exact cov(gamma(u), gamma(v)) for levels u, v >= 0."""
    u = _check_levels(u)
    v = _check_levels(v)
    if isinstance(spec, RandomLine):
        out = u * v * spec.innovation_variance
    elif isinstance(spec, Poisson):
        out = np.minimum(u, v)
    elif isinstance(spec, MixedPoisson):
        out = np.minimum(u, v) * spec.zeta_mean + u * v * spec.zeta_var
    elif isinstance(spec, Binomial):
        uu = np.minimum(u, 1.0)
        vv = np.minimum(v, 1.0)
        out = spec.trials * (np.minimum(uu, vv) - uu * vv)
    else:
        raise TypeError(f"not a SeedSpec: {spec!r}")
    return out if np.ndim(out) else float(out)


def seed_var(spec: SeedSpec, u):
    """Var gamma(u), vectorized in u."""
    return seed_cov(spec, u, u)


def seed_cumulant(spec: SeedSpec, order: int, u: float) -> float:
    """q-th cumulant of gamma(u) for the Levy (Poisson) family.

    For a Levy seed the cumulants are linear in the level; for the unit-rate
    Poisson every cumulant equals the level itself.  Other families raise
    :class:`UnsupportedSeedError` so oracle code falls back to empirical
    cumulants.
    """
    if order not in (1, 2, 3, 4):
        raise ValueError("order must be in {1, 2, 3, 4}")
    if u < 0:
        raise ValueError("level must be nonnegative")
    if isinstance(spec, Poisson):
        return float(u)
    raise UnsupportedSeedError(
        f"closed-form cumulants only exist for the Poisson (Levy) seed, got {type(spec).__name__}"
    )


def _check_nonincreasing(levels: np.ndarray):
    if levels.size >= 2 and np.any(np.diff(levels) > 0):
        raise ValueError("levels must be nonincreasing")


def sample_seed_values(spec: SeedSpec, levels, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Jointly sample gamma at nonincreasing `levels` for one copy (or `size` copies).

    Returns shape ``(len(levels),)`` when size is None, else ``(size, len(levels))``.
    The joint law is exact: counting seeds are built from increments/counts of
    one underlying path, never from independent marginals.
    """
    levels = _check_levels(levels)
    _check_nonincreasing(levels)
    squeeze = size is None
    nrep = 1 if size is None else int(size)
    J = levels.size
    if J == 0:
        out = np.zeros((nrep, 0))
        return out[0] if squeeze else out

    if isinstance(spec, RandomLine):
        eps = rng.normal(0.0, np.sqrt(spec.innovation_variance), size=nrep)
        out = np.outer(eps, levels)
    elif isinstance(spec, (Poisson, MixedPoisson)):
        # ascending levels -> independent Poisson increments over the gaps
        asc = levels[::-1]
        gaps = np.concatenate(([asc[0]], np.diff(asc)))
        if isinstance(spec, MixedPoisson):
            zeta = rng.gamma(spec.zeta_shape, 1.0 / spec.zeta_rate, size=nrep)
            lam = zeta[:, None] * gaps[None, :]
        else:
            lam = np.broadcast_to(gaps, (nrep, J))
        inc = rng.poisson(lam)
        out = np.cumsum(inc, axis=1)[:, ::-1].astype(float)
    elif isinstance(spec, Binomial):
        u = rng.uniform(0.0, 1.0, size=(nrep, spec.trials))
        out = (u[:, None, :] <= levels[None, :, None]).sum(axis=2).astype(float)
    else:
        raise TypeError(f"not a SeedSpec: {spec!r}")
    return out[0] if squeeze else out


def sample_seed_at(spec: SeedSpec, levels, rng: np.random.Generator) -> SeedDraw:
    """One joint draw of (gamma(levels[0]), ..., gamma(levels[J-1]))."""
    levels = _check_levels(levels)
    _check_nonincreasing(levels)
    values = sample_seed_values(spec, levels, rng)
    return SeedDraw(levels=levels, values=np.atleast_1d(values))
