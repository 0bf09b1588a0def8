"""Market-maker price update rules ``pi(p0, p_hat)``."""

from __future__ import annotations

from dataclasses import dataclass, asdict
from typing import Callable, Optional

import numpy as np

from .quadrature import integrate_pieces

KINDS = ("noise", "perfect_info", "linear", "custom")


@dataclass(frozen=True)
class UpdateRule:
    """Revised price estimate after observing a trader's report.

    ``noise`` keeps ``p0``; ``perfect_info`` adopts the report; ``linear``
    blends them as ``lam * p0 + (1 - lam) * p_hat``.  ``custom`` wraps any
    vectorised ``func(p0, p_hat)`` a caller wants to validate and solve with;
    it cannot be expressed in a config file.
    """

    kind: str
    lam: float = 1.0
    func: Optional[Callable] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown update rule kind {self.kind!r}")
        if self.kind == "linear" and not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"linear weight must lie in [0, 1], got {self.lam}")
        if self.kind == "custom" and self.func is None:
            raise ValueError("custom update rule needs func")

    @classmethod
    def noise(cls):
        return cls("noise")

    @classmethod
    def perfect_info(cls):
        return cls("perfect_info", lam=0.0)

    @classmethod
    def linear(cls, lam):
        return cls("linear", lam=float(lam))

    @classmethod
    def custom(cls, func):
        return cls("custom", lam=float("nan"), func=func)

    @property
    def weight(self) -> Optional[float]:
        """Equivalent linear weight, or None for custom rules."""
        return {"noise": 1.0, "perfect_info": 0.0, "linear": self.lam}.get(self.kind)

    def apply(self, p0, p_hat):
        p_hat = np.asarray(p_hat, dtype=float)
        if self.kind == "noise":
            out = np.full_like(p_hat, p0)
        elif self.kind == "perfect_info":
            out = p_hat.copy()
        elif self.kind == "linear":
            # written so that p_hat == p0 and lam in {0, 1} are exact in floating point
            if self.lam == 1.0:
                out = np.full_like(p_hat, p0)
            elif self.lam == 0.0:
                out = p_hat.copy()
            else:
                out = p_hat + self.lam * (p0 - p_hat)
        else:
            out = np.asarray(self.func(p0, p_hat), dtype=float)
        return out[()]

    def to_dict(self):
        if self.kind == "linear":
            return {"kind": "linear", "lambda": self.lam}
        if self.kind == "custom":
            raise ValueError("custom update rules are not serialisable")
        return {"kind": self.kind}


def from_dict(obj: dict) -> UpdateRule:
    kind = obj.get("kind")
    allowed = {"kind", "lambda"} if kind == "linear" else {"kind"}
    extra = set(obj) - allowed
    if extra:
        raise ValueError(f"unknown field(s) for update rule {kind!r}: {sorted(extra)}")
    if kind == "linear":
        if "lambda" not in obj:
            raise ValueError("linear update rule needs 'lambda'")
        return UpdateRule.linear(obj["lambda"])
    if kind in ("noise", "perfect_info"):
        return UpdateRule(kind) if kind == "noise" else UpdateRule.perfect_info()
    raise ValueError(f"unknown update rule kind {kind!r}")


def lambda_from_variances(sigma0_sq: float, sigma_eps_sq: float) -> float:
    """Posterior weight on the prior mean for a Gaussian prior and Gaussian report noise."""
    if not sigma0_sq > 0.0:
        raise ValueError("prior variance must be positive")
    if sigma_eps_sq < 0.0:
        raise ValueError("observation variance must be non-negative")
    return sigma_eps_sq / (sigma0_sq + sigma_eps_sq)


@dataclass
class Assumption1Report:
    betweenness: bool
    monotone: bool
    fixed_point: bool
    consistency: bool
    expected_update: float
    p0: float

    @property
    def passed(self):
        return self.betweenness and self.monotone and self.fixed_point and self.consistency

    def to_dict(self):
        d = asdict(self)
        d["passed"] = self.passed
        return d


def validate_assumption1(rule: UpdateRule, dist, p0: float, tol: float = 1e-6,
                         grid_n: int = 1001) -> Assumption1Report:
    """Check the four update-rule conditions numerically; failures are reported, not raised."""
    grid = np.linspace(dist.lo, dist.hi, grid_n)
    vals = np.asarray(rule.apply(p0, grid), dtype=float)
    lo = np.minimum(p0, grid) - tol
    hi = np.maximum(p0, grid) + tol
    between = bool(np.all((vals >= lo) & (vals <= hi)))
    monotone = bool(np.all(np.diff(vals) >= -tol))
    fixed = abs(float(rule.apply(p0, p0)) - p0) <= tol
    num, _ = integrate_pieces(lambda s: rule.apply(p0, s) * dist.pdf(s),
                              [dist.lo, *dist.kinks, dist.hi], abs_tol=1e-12)
    expected = float(num / dist.mass)
    return Assumption1Report(between, monotone, fixed, abs(expected - p0) <= tol,
                             expected, float(p0))
