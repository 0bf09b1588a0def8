"""Trader-belief price distributions.

Every distribution exposes ``pdf``, ``cdf``, ``sf`` (survival, ``1 - cdf``),
``quantile`` and the two hazard rates used by the virtual value functions.
All accessors are vectorised over numpy arrays and return numpy scalars for
scalar input.  Instances are immutable.

Non-compact supports (the exponential) keep their exact density and CDF; the
``truncation_quantile`` only fixes an effective upper bound ``hi`` so that
root brackets, grids and quadrature stay finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri

DENSITY_FLOOR = 1e-300
DEFAULT_TRUNCATION = 1.0 - 1e-9


class EndpointSingularity(ArithmeticError):
    """A hazard or virtual value was requested where its denominator vanishes."""


@dataclass(frozen=True)
class Support:
    lo: float
    hi: float  # may be math.inf
    truncation_quantile: float = 1.0

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"support needs lo < hi, got [{self.lo}, {self.hi}]")
        if not 0.0 < self.truncation_quantile <= 1.0:
            raise ValueError("truncation_quantile must lie in (0, 1]")
        if math.isinf(self.hi) and self.truncation_quantile >= 1.0:
            raise ValueError("an unbounded support needs truncation_quantile < 1")

    @property
    def bounded(self):
        return not math.isinf(self.hi)


def _arr(x):
    return np.asarray(x, dtype=float)


class PriceDistribution:
    """Base class; subclasses implement ``_pdf``, ``_cdf``, ``_sf``, ``_ppf``."""

    kind: str = ""

    # -- effective bounds -------------------------------------------------
    @property
    def support(self) -> Support:
        raise NotImplementedError

    # subclasses provide ``lo`` and ``hi`` (the effective, finite bounds)
    lo: float
    hi: float

    @property
    def mass(self) -> float:
        """Probability mass on ``[lo, hi]`` (1 unless truncated)."""
        return float(self.cdf(self.hi))

    # -- accessors --------------------------------------------------------
    def pdf(self, s):
        s = _arr(s)
        inside = (s >= self.support.lo) & (s <= self.support.hi)
        out = np.where(inside, self._pdf(np.clip(s, self.lo, None)), 0.0)
        return out[()]

    def cdf(self, s):
        s = _arr(s)
        out = np.where(s <= self.support.lo, 0.0,
                       np.where(s >= self.support.hi, 1.0,
                                self._cdf(np.clip(s, self.lo, None))))
        return np.clip(out, 0.0, 1.0)[()]

    def sf(self, s):
        s = _arr(s)
        out = np.where(s <= self.support.lo, 1.0,
                       np.where(s >= self.support.hi, 0.0,
                                self._sf(np.clip(s, self.lo, None))))
        return np.clip(out, 0.0, 1.0)[()]

    def quantile(self, q):
        q = _arr(q)
        top = self.support.truncation_quantile
        if np.any(q < 0.0) or np.any(q > top):
            raise ValueError(f"quantile level outside [0, {top}]")
        out = np.where(q <= 0.0, self.lo, self._ppf(np.clip(q, 0.0, top)))
        if self.support.bounded:
            out = np.where(q >= 1.0, self.support.hi, out)
        return out[()]

    def hazard_upper(self, s):
        """``f / (1 - F)``."""
        f = _arr(self.pdf(s))
        tail = _arr(self.sf(s))
        if np.any(tail <= 0.0) or np.any(f < DENSITY_FLOOR):
            raise EndpointSingularity("upper hazard undefined where 1 - F = 0")
        return (f / tail)[()]

    def hazard_lower(self, s):
        """``f / F``."""
        f = _arr(self.pdf(s))
        head = _arr(self.cdf(s))
        if np.any(head <= 0.0) or np.any(f < DENSITY_FLOOR):
            raise EndpointSingularity("lower hazard undefined where F = 0")
        return (f / head)[()]

    def sample(self, rng, size=None):
        """Inverse-transform draws restricted to ``[lo, hi]``."""
        u = rng.random(size) * self.mass
        return self.quantile(u)

    @property
    def kinks(self) -> tuple:
        """Interior prices where the density is not smooth (quadrature split points)."""
        return ()

    @property
    def mean(self) -> float:
        from .quadrature import integrate_pieces
        v, _ = integrate_pieces(lambda s: s * self.pdf(s), [self.lo, *self.kinks, self.hi],
                                abs_tol=1e-13)
        return v / self.mass

    def shifted(self, delta: float) -> "PriceDistribution":
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Uniform(PriceDistribution):
    lo: float
    hi: float
    kind = "uniform"

    def __post_init__(self):
        if not (self.lo >= 0.0 and self.lo < self.hi and math.isfinite(self.hi)):
            raise ValueError(f"uniform needs 0 <= lo < hi < inf, got ({self.lo}, {self.hi})")

    @property
    def support(self):
        return Support(self.lo, self.hi)

    def _pdf(self, s):
        return np.full_like(s, 1.0 / (self.hi - self.lo))

    def _cdf(self, s):
        return (s - self.lo) / (self.hi - self.lo)

    def _sf(self, s):
        return (self.hi - s) / (self.hi - self.lo)

    def _ppf(self, q):
        return self.lo + q * (self.hi - self.lo)

    @property
    def mean(self):
        return 0.5 * (self.lo + self.hi)

    def shifted(self, delta):
        return Uniform(self.lo + delta, self.hi + delta)

    def to_dict(self):
        return {"kind": self.kind, "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class Exponential(PriceDistribution):
    rate: float
    truncation_quantile: float = DEFAULT_TRUNCATION
    loc: float = 0.0
    kind = "exponential"

    def __post_init__(self):
        if not (self.rate > 0.0 and math.isfinite(self.rate)):
            raise ValueError(f"exponential rate must be positive, got {self.rate}")
        if not 0.0 < self.truncation_quantile < 1.0:
            raise ValueError("exponential truncation_quantile must lie in (0, 1)")
        if self.loc < 0.0:
            raise ValueError("exponential loc must be non-negative")

    @property
    def support(self):
        return Support(self.loc, math.inf, self.truncation_quantile)

    @property
    def lo(self):
        return self.loc

    @property
    def hi(self):
        return float(self._ppf(self.truncation_quantile))

    def _pdf(self, s):
        return self.rate * np.exp(-self.rate * (s - self.loc))

    def _cdf(self, s):
        return -np.expm1(-self.rate * (s - self.loc))

    def _sf(self, s):
        return np.exp(-self.rate * (s - self.loc))

    def _ppf(self, q):
        return self.loc - np.log1p(-q) / self.rate

    def hazard_upper(self, s):
        # memoryless: exact, no cancellation in f / (1 - F)
        s = _arr(s)
        if np.any(s < self.loc):
            raise EndpointSingularity("outside the exponential support")
        return np.full_like(s, self.rate)[()]

    @property
    def mean(self):
        # conditional on the truncated range [loc, hi]
        q = self.truncation_quantile
        t = self.hi - self.loc
        return self.loc + (1.0 / self.rate - (t + 1.0 / self.rate) * (1.0 - q)) / q

    def shifted(self, delta):
        return Exponential(self.rate, self.truncation_quantile, self.loc + delta)

    def to_dict(self):
        d = {"kind": self.kind, "rate": self.rate,
             "truncation_quantile": self.truncation_quantile}
        if self.loc:
            d["loc"] = self.loc
        return d


@dataclass(frozen=True)
class TruncatedNormal(PriceDistribution):
    mu: float
    sigma: float
    lo: float
    hi: float
    kind = "truncated_normal"

    def __post_init__(self):
        if not self.sigma > 0.0:
            raise ValueError("truncated_normal stdev must be positive")
        if not (0.0 <= self.lo < self.hi and math.isfinite(self.hi)):
            raise ValueError("truncated_normal needs 0 <= lo < hi < inf")
        if self._z_mass() <= 0.0:
            raise ValueError("truncation interval carries no normal mass")

    @property
    def support(self):
        return Support(self.lo, self.hi)

    @property
    def _alpha(self):
        return (self.lo - self.mu) / self.sigma

    @property
    def _beta(self):
        return (self.hi - self.mu) / self.sigma

    @property
    def _upper_tail(self):
        # work with survival probabilities when the window sits right of the mean
        return self._alpha > 0.0

    def _z_mass(self):
        if self._upper_tail:
            return ndtr(-self._alpha) - ndtr(-self._beta)
        return ndtr(self._beta) - ndtr(self._alpha)

    def _pdf(self, s):
        z = (s - self.mu) / self.sigma
        return np.exp(-0.5 * z * z) / (math.sqrt(2.0 * math.pi) * self.sigma * self._z_mass())

    def _cdf(self, s):
        z = (s - self.mu) / self.sigma
        if self._upper_tail:
            return (ndtr(-self._alpha) - ndtr(-z)) / self._z_mass()
        return (ndtr(z) - ndtr(self._alpha)) / self._z_mass()

    def _sf(self, s):
        z = (s - self.mu) / self.sigma
        if self._upper_tail:
            return (ndtr(-z) - ndtr(-self._beta)) / self._z_mass()
        return (ndtr(self._beta) - ndtr(z)) / self._z_mass()

    def _ppf(self, q):
        if self._upper_tail:
            z = -ndtri(ndtr(-self._alpha) - q * self._z_mass())
        else:
            z = ndtri(ndtr(self._alpha) + q * self._z_mass())
        return np.clip(self.mu + self.sigma * z, self.lo, self.hi)

    def shifted(self, delta):
        return TruncatedNormal(self.mu + delta, self.sigma, self.lo + delta, self.hi + delta)

    def to_dict(self):
        return {"kind": self.kind, "mean": self.mu, "stdev": self.sigma,
                "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class PiecewiseLinear(PriceDistribution):
    """Density linear between ``(price, density)`` knots, renormalised to unit mass."""

    knots: tuple
    kind = "piecewise_linear_pdf"

    def __post_init__(self):
        pts = tuple((float(p), float(d)) for p, d in self.knots)
        if len(pts) < 2:
            raise ValueError("piecewise_linear_pdf needs at least two knots")
        xs = np.array([p for p, _ in pts])
        ds = np.array([d for _, d in pts])
        if np.any(np.diff(xs) <= 0.0):
            raise ValueError("knot prices must be strictly increasing")
        if np.any(ds <= 0.0) or not np.all(np.isfinite(ds)):
            raise ValueError("knot densities must be positive and finite")
        if xs[0] < 0.0:
            raise ValueError("prices must be non-negative")
        area = np.sum(0.5 * (ds[1:] + ds[:-1]) * np.diff(xs))
        ds = ds / area
        cum = np.concatenate([[0.0], np.cumsum(0.5 * (ds[1:] + ds[:-1]) * np.diff(xs))])
        object.__setattr__(self, "knots", pts)
        object.__setattr__(self, "_xs", xs)
        object.__setattr__(self, "_ds", ds)
        object.__setattr__(self, "_slopes", np.diff(ds) / np.diff(xs))
        object.__setattr__(self, "_cum", cum / cum[-1])

    @property
    def support(self):
        return Support(self.lo, self.hi)

    @property
    def lo(self):
        return float(self._xs[0])

    @property
    def hi(self):
        return float(self._xs[-1])

    @property
    def kinks(self):
        return tuple(float(x) for x in self._xs[1:-1])

    def _seg(self, s):
        return np.clip(np.searchsorted(self._xs, s, side="right") - 1, 0, len(self._xs) - 2)

    def _pdf(self, s):
        return np.interp(s, self._xs, self._ds)

    def _cdf(self, s):
        i = self._seg(s)
        t = s - self._xs[i]
        return self._cum[i] + self._ds[i] * t + 0.5 * self._slopes[i] * t * t

    def _sf(self, s):
        return 1.0 - self._cdf(s)

    def _ppf(self, q):
        i = np.clip(np.searchsorted(self._cum, q, side="right") - 1, 0, len(self._xs) - 2)
        r = q - self._cum[i]
        d = self._ds[i]
        m = self._slopes[i]
        disc = np.sqrt(np.maximum(d * d + 2.0 * m * r, 0.0))
        return np.clip(self._xs[i] + 2.0 * r / (d + disc), self._xs[0], self._xs[-1])

    def shifted(self, delta):
        return PiecewiseLinear(tuple((p + delta, d) for p, d in self.knots))

    def to_dict(self):
        return {"kind": self.kind, "knots": [[p, d] for p, d in self.knots]}


_FIELDS = {
    "uniform": ({"lo", "hi"}, set()),
    "exponential": ({"rate"}, {"truncation_quantile", "loc"}),
    "truncated_normal": ({"mean", "stdev", "lo", "hi"}, set()),
    "piecewise_linear_pdf": ({"knots"}, set()),
}


def from_dict(obj: dict) -> PriceDistribution:
    """Build a distribution from its JSON object; unknown fields are rejected."""
    kind = obj.get("kind")
    if kind not in _FIELDS:
        raise ValueError(f"unknown distribution kind {kind!r}")
    required, optional = _FIELDS[kind]
    keys = set(obj) - {"kind"}
    if keys - required - optional:
        raise ValueError(f"unknown field(s) for {kind}: {sorted(keys - required - optional)}")
    if required - keys:
        raise ValueError(f"missing field(s) for {kind}: {sorted(required - keys)}")
    if kind == "uniform":
        return Uniform(float(obj["lo"]), float(obj["hi"]))
    if kind == "exponential":
        return Exponential(float(obj["rate"]),
                           float(obj.get("truncation_quantile", DEFAULT_TRUNCATION)),
                           float(obj.get("loc", 0.0)))
    if kind == "truncated_normal":
        return TruncatedNormal(float(obj["mean"]), float(obj["stdev"]),
                               float(obj["lo"]), float(obj["hi"]))
    return PiecewiseLinear(tuple(tuple(k) for k in obj["knots"]))
