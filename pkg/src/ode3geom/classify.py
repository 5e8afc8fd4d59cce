"""Shared classification plumbing: results, constancy checks, parameter
snapping, and constant-tuple comparison against canonical representatives."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .expr import (DEFAULT_CONFIG, Expr, SignConsistencyError, ZeroConfig,
                   values_on_samples)

JET = ("x", "y", "p", "q")


class InconclusiveError(ArithmeticError):
    """A zero verdict needed by the classifier came back inconclusive."""


@dataclass
class ClassificationResult:
    group: str                       # "contact" | "point"
    row: str                         # table row id or "general"
    dimension: Optional[int] = None
    parameters: dict = field(default_factory=dict)
    evidence: list = field(default_factory=list)
    inconclusive: bool = False
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "group": self.group,
            "row": self.row,
            "dimension": self.dimension,
            "parameters": {k: _jsonable(v) for k, v in self.parameters.items()},
            "evidence": list(self.evidence),
            "inconclusive": self.inconclusive,
            "diagnostics": {k: _jsonable(v) for k, v in
                            self.diagnostics.items()},
        }


def _jsonable(v):
    if isinstance(v, Fraction):
        return {"value": f"{v.numerator}/{v.denominator}"
                if v.denominator != 1 else str(v.numerator),
                "provenance": "symbolic"}
    if isinstance(v, Expr):
        return {"value": str(v), "provenance": "symbolic"}
    if isinstance(v, float):
        return {"value": v, "provenance": "sampled"}
    return v


def is_constant(e: Expr, config: ZeroConfig = DEFAULT_CONFIG) -> bool:
    """Rank-zero criterion: all four jet partials vanish under is_zero.

    The partials are tested through the Leibniz split so the quotient-rule
    combination is never assembled symbolically."""
    from .expr import partial_is_zero
    for v in JET:
        ver = partial_is_zero(e, v, config=config)
        if ver.status == "inconclusive":
            raise InconclusiveError(f"constancy of invariant in {v}")
        if ver.is_nonzero:
            return False
    return True


def const_value(e: Expr, config: ZeroConfig = DEFAULT_CONFIG,
                spread_tol: float = 1e-7) -> float:
    """Numeric value of an expression known to be constant on the box.

    Individual samples can lose all their digits to cancellation on large
    pulled-back invariants, so the value is the median of the agreeing
    majority rather than demanding every sample coincide."""
    rf = e._rf
    if rf is not None and rf.is_const():
        return float(rf.const_value())
    vals = values_on_samples(e, config, n=min(config.samples, 9))
    if not vals:
        raise InconclusiveError("no admissible samples for constant value")
    vals.sort()
    med = vals[len(vals) // 2]
    good = [v for v in vals if abs(v - med) <= spread_tol * (1.0 + abs(med))]
    if len(good) < max(3, (2 * len(vals)) // 3):
        raise SignConsistencyError(
            f"expected a constant, values spread over "
            f"[{vals[0]}, {vals[-1]}]")
    return good[len(good) // 2]


def exact_const(e: Expr) -> Optional[Fraction]:
    rf = e.rf
    if rf.is_const():
        return rf.const_value()
    return None


def snap_rational(x: float, max_den: int = 64,
                  tol: float = 1e-7) -> Optional[Fraction]:
    """Nearest small-denominator rational within tol, else None."""
    f = Fraction(x).limit_denominator(max_den)
    if abs(float(f) - x) <= tol * (1.0 + abs(x)):
        return f
    return None


def tuples_match(a, b, tol: float = 1e-6) -> bool:
    if len(a) != len(b):
        return False
    return all(abs(x - y) <= tol * (1.0 + abs(x) + abs(y))
               for x, y in zip(a, b))


def require(verdict, what: str) -> bool:
    """Map a ZeroVerdict to bool, raising on inconclusive."""
    if verdict.status == "inconclusive":
        raise InconclusiveError(f"{what}: {verdict.reason}")
    return verdict.is_zero
