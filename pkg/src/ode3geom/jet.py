"""Total derivative and the scalar invariants K, L, M, W, Z of an ODE
y''' = F(x, y, p, q), plus directional derivatives along a frame."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from .expr import (DEFAULT_CONFIG, Expr, ZeroConfig, is_zero, normalize,
                   parse, partial, var)

F3 = Fraction


def pd(e: Expr, *vs: str) -> Expr:
    """Iterated partial derivative, e.g. pd(F, "q", "q")."""
    for v in vs:
        e = partial(e, v)
    return e


def pdl(e: Expr, *vs: str) -> Expr:
    """Iterated partial derivative as an unexpanded Leibniz tree."""
    from .expr import partial_tree
    for v in vs:
        e = partial_tree(e, v)
    return e


def total_derivative_tree(e: Expr, ode: "Ode3") -> Expr:
    """D applied to e, left as an unexpanded tree."""
    from .expr import partial_tree, var as _var
    return (partial_tree(e, "x") + _var("p") * partial_tree(e, "y")
            + _var("q") * partial_tree(e, "p")
            + ode.F * partial_tree(e, "q"))


class WunschmannZeroError(ArithmeticError):
    """Z requested for an ODE with W = 0."""


@dataclass
class Ode3:
    """A validated right-hand side F with its singular-locus guards."""

    F: Expr
    guards: tuple = ()
    provenance: str = ""
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def from_text(cls, text: str, provenance: str = "") -> "Ode3":
        return cls(parse(text), provenance=provenance or text)

    def __post_init__(self):
        if not isinstance(self.F, Expr):
            self.F = parse(str(self.F))
        bad = self.F.free_vars() - {"x", "y", "p", "q"}
        if bad:
            raise ValueError(f"F contains non-jet variables: {sorted(bad)}")

    def check_guards(self, config: ZeroConfig = DEFAULT_CONFIG) -> bool:
        return all(is_zero(g, config=config).is_nonzero for g in self.guards)

    def D(self, e: Expr) -> Expr:
        return total_derivative(e, self)

    def cached(self, key, builder):
        got = self._cache.get(key)
        if got is None:
            got = builder()
            self._cache[key] = got
        return got


@dataclass(frozen=True)
class JetInvariants:
    K: Expr
    L: Expr
    M: Expr
    W: Expr
    Z: Optional[Expr]          # None when W == 0 on the domain
    z_guard: Optional[Expr]    # the recorded guard (W) for Z
    w_verdict: object


def total_derivative(e: Expr, ode: Union[Ode3, Expr]) -> Expr:
    """D = d/dx + p d/dy + q d/dp + F d/dq applied to e."""
    F = ode.F if isinstance(ode, Ode3) else ode
    out = (partial(e, "x") + var("p") * partial(e, "y")
           + var("q") * partial(e, "p") + F * partial(e, "q"))
    from .expr import from_rf
    return from_rf(out.rf)


def jet_invariants(ode: Ode3, config: ZeroConfig = DEFAULT_CONFIG) -> JetInvariants:
    def build():
        F = ode.F
        Fq = pd(F, "q")
        K = F3(1, 6) * ode.D(Fq) - F3(1, 9) * Fq * Fq - F3(1, 2) * pd(F, "p")
        K = normalize(K)
        Kq = pd(K, "q")
        L = (F3(1, 3) * pd(F, "q", "q") * K - F3(1, 3) * Fq * Kq
             - pd(K, "p") - F3(1, 3) * pd(F, "q", "y"))
        L = normalize(L)
        M = (2 * pd(K, "q", "q") * K - 2 * pd(K, "q", "y")
             + F3(1, 3) * pd(F, "q", "q") * L - F3(2, 3) * Fq * pd(L, "q")
             - 2 * pd(L, "p"))
        W = normalize(ode.D(K) - F3(2, 3) * Fq * K + pd(F, "y"))
        return K, L, normalize(M), W

    K, L, M, W = ode.cached("KLMW", build)
    wv = is_zero(W, config=config)
    Z = None
    if wv.is_nonzero:
        Z = ode.cached("Z", lambda: normalize(ode.D(W) / W - pd(ode.F, "q")))
    return JetInvariants(K=K, L=L, M=M, W=W, Z=Z,
                         z_guard=W if wv.is_nonzero else None, w_verdict=wv)


def zee(ode: Ode3, config: ZeroConfig = DEFAULT_CONFIG) -> Expr:
    """The invariant Z = DW/W - F_q; errors when W = 0."""
    inv = jet_invariants(ode, config)
    if inv.Z is None:
        raise WunschmannZeroError("Z undefined: Wunschmann invariant vanishes")
    return inv.Z


@dataclass(frozen=True)
class VectorField:
    """A derivation c_x d/dx + c_y d/dy + c_p d/dp + c_q d/dq."""

    cx: Expr
    cy: Expr
    cp: Expr
    cq: Expr

    def __call__(self, f: Expr) -> Expr:
        return (self.cx * partial(f, "x") + self.cy * partial(f, "y")
                + self.cp * partial(f, "p") + self.cq * partial(f, "q"))

    def components(self):
        return (self.cx, self.cy, self.cp, self.cq)


def frame_derivative(f: Expr, frame: Sequence[VectorField],
                     config: Optional[ZeroConfig] = None) -> tuple:
    """Coframe derivatives X_i(f) along the four frame fields.

    Pass a config to have the frame's nondegeneracy checked first."""
    if config is not None and not frame_nondegenerate(frame, config):
        raise ArithmeticError("frame degenerate on the sample domain")
    return tuple(Xi(f) for Xi in frame)


def frame_nondegenerate(frame: Sequence[VectorField],
                        config: ZeroConfig = DEFAULT_CONFIG) -> bool:
    from .forms import det4
    m = [list(Xi.components()) for Xi in frame]
    return is_zero(det4(m), config=config).is_nonzero
