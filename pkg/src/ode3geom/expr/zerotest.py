"""Randomised zero-testing and numeric evaluation on the sample box.

Zero equivalence for the mixed rational/transcendental expressions here is
undecidable in general; we settle it Schwartz-Zippel style.  An expression
counts as zero when its canonical numerator is literally 0 or when all
seeded samples on the guard-respecting box have relative residual below the
tolerance.  Verdicts are deterministic for a fixed seed.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from typing import Optional, Union

from . import poly as _p
from .nodes import Expr, eval_tree
from .poly import DomainError, SingularPointError

DEFAULT_BOX = {"x": (-1.0, 1.0), "y": (-1.0, 1.0),
               "p": (0.5, 2.0), "q": (0.5, 2.0)}


class SignConsistencyError(ArithmeticError):
    """An abs/sgn argument changes sign across the sample domain, so the
    region-dependent verdict is ill-posed on this box."""


@dataclass(frozen=True)
class JetPoint:
    x: float
    y: float
    p: float
    q: float

    def __post_init__(self):
        for c in (self.x, self.y, self.p, self.q):
            if not math.isfinite(c):
                raise ValueError("jet point coordinates must be finite")

    def env(self) -> dict:
        return {"x": self.x, "y": self.y, "p": self.p, "q": self.q}


@dataclass(frozen=True)
class ZeroVerdict:
    status: str                      # "zero" | "nonzero" | "inconclusive"
    witness: Optional[JetPoint] = None
    residual: float = 0.0
    reason: str = ""

    def __bool__(self):
        return self.status == "zero"

    @property
    def is_zero(self):
        return self.status == "zero"

    @property
    def is_nonzero(self):
        return self.status == "nonzero"


@dataclass(frozen=True)
class ZeroConfig:
    seed: int = 42
    samples: int = 16
    tol: float = 1e-9
    box: dict = field(default_factory=lambda: dict(DEFAULT_BOX))
    margin: float = 1e-7
    attempts: int = 1200
    extra_vars: dict = field(default_factory=dict)  # name -> (lo, hi)

    def with_seed(self, seed: int) -> "ZeroConfig":
        return replace(self, seed=seed)


DEFAULT_CONFIG = ZeroConfig()


def sample_points(cfg: ZeroConfig):
    rng = random.Random(cfg.seed)
    names = list(cfg.box) + list(cfg.extra_vars)
    ranges = dict(cfg.box)
    ranges.update(cfg.extra_vars)
    while True:
        yield {n: rng.uniform(*ranges[n]) for n in names}


def _admissible_samples(e: Expr, cfg: ZeroConfig):
    """Yield (env, residual, value-ish) for admissible points; raises
    SignConsistencyError when an abs/sgn argument flips sign."""
    rf = e.rf
    signed = _p.rf_signed_atoms(rf)
    signs: dict = {}
    gen = sample_points(cfg)
    found = 0
    for _ in range(cfg.attempts):
        env = next(gen)
        cache: dict = {}
        try:
            for arg in signed:
                v = _p.eval_rf(arg, env, cache, cfg.margin)
                s = 1 if v > 0 else (-1 if v < 0 else 0)
                prev = signs.get(arg)
                if prev is None:
                    signs[arg] = s
                elif prev != s and s != 0:
                    raise SignConsistencyError(
                        "abs/sgn argument changes sign on the sample box")
            res = _p.eval_rf_residual(rf, env, cache, cfg.margin)
        except SingularPointError:
            continue
        except DomainError:
            continue
        except OverflowError:
            continue
        found += 1
        yield env, res
        if found >= cfg.samples:
            return


def is_zero(e: Union[Expr, int], seed: Optional[int] = None,
            config: ZeroConfig = DEFAULT_CONFIG) -> ZeroVerdict:
    """Deterministic randomised zero test.

    Zero iff the canonical numerator is literally 0 or all admissible
    samples have relative residual <= tol; nonzero comes with a witness.
    """
    if isinstance(e, int):
        e = Expr._coerce(e)
    cfg = config if seed is None else config.with_seed(seed)
    if e.kind is not None and e._rf is None and _tree_weight(e) > 40:
        # large unexpanded tree: sample it without lowering
        return _is_zero_tree(e, cfg)
    rf = e.rf
    if rf.is_zero_poly():
        return ZeroVerdict("zero", reason="symbolic")
    if rf.is_const():
        v = rf.const_value()
        if v == 0:
            return ZeroVerdict("zero", reason="symbolic")
        return ZeroVerdict("nonzero", residual=abs(float(v)),
                           reason="constant")
    worst = 0.0
    count = 0
    try:
        for env, res in _admissible_samples(e, cfg):
            count += 1
            if res > cfg.tol:
                return ZeroVerdict("nonzero",
                                   witness=JetPoint(env.get("x", 0.0),
                                                    env.get("y", 0.0),
                                                    env.get("p", 1.0),
                                                    env.get("q", 1.0)),
                                   residual=res, reason="sampled")
            worst = max(worst, res)
    except SignConsistencyError as exc:
        return ZeroVerdict("inconclusive", reason=str(exc))
    if count < cfg.samples:
        return ZeroVerdict("inconclusive",
                           reason=f"only {count} admissible sample points")
    return ZeroVerdict("zero", residual=worst, reason="sampled")


def _tree_weight(e: Expr, cap: int = 48) -> int:
    stack = [e]
    n = 0
    while stack and n <= cap:
        t = stack.pop()
        n += 1
        if t.kind is not None:
            stack.extend(t.args)
    return n


def _is_zero_tree(e: Expr, cfg: ZeroConfig) -> ZeroVerdict:
    from .nodes import eval_tree_dual
    signed_rfs, signed_trees = _signed_parts(e)
    signs: dict = {}
    gen = sample_points(cfg)
    found = 0
    worst = 0.0
    for _ in range(cfg.attempts):
        env = next(gen)
        cache: dict = {}
        try:
            vals = [(("rf", a), _p.eval_rf(a, env, cache, cfg.margin))
                    for a in signed_rfs]
            vals += [(("tree", i),
                      eval_tree_dual(t, None, env, {}, cfg.margin)[0])
                     for i, t in enumerate(signed_trees)]
            for key, val in vals:
                s = 1 if val > 0 else (-1 if val < 0 else 0)
                prev = signs.get(key)
                if prev is None:
                    signs[key] = s
                elif prev != s and s != 0:
                    return ZeroVerdict("inconclusive",
                                       reason="abs/sgn argument changes "
                                              "sign on the sample box")
            val, _dv, mass, _dm = eval_tree_dual(e, None, env, {},
                                                 cfg.margin)
            res = abs(val) / (1.0 + mass)
        except (SingularPointError, DomainError, OverflowError):
            continue
        found += 1
        if res > cfg.tol:
            return ZeroVerdict("nonzero",
                               witness=JetPoint(env.get("x", 0.0),
                                                env.get("y", 0.0),
                                                env.get("p", 1.0),
                                                env.get("q", 1.0)),
                               residual=res, reason="sampled")
        worst = max(worst, res)
        if found >= cfg.samples:
            break
    if found < cfg.samples:
        return ZeroVerdict("inconclusive",
                           reason=f"only {found} admissible sample points")
    return ZeroVerdict("zero", residual=worst, reason="sampled")


def sign_on_domain(e: Expr, seed: Optional[int] = None,
                   config: ZeroConfig = DEFAULT_CONFIG) -> int:
    """Consistent sign of e on the box: +1, -1, or 0 (when is_zero says so).

    Raises SignConsistencyError if samples disagree.
    """
    cfg = config if seed is None else config.with_seed(seed)
    v = is_zero(e, config=cfg)
    if v.is_zero:
        return 0
    if v.status == "inconclusive":
        raise SignConsistencyError(v.reason)
    rf = e.rf
    sign = 0
    count = 0
    for env, _res in _admissible_samples(e, cfg):
        count += 1
        val = _p.eval_rf(rf, env, {}, cfg.margin)
        s = 1 if val > 0 else (-1 if val < 0 else 0)
        if s == 0:
            continue
        if sign == 0:
            sign = s
        elif sign != s:
            raise SignConsistencyError("expression changes sign on the box")
    if count < cfg.samples:
        raise SignConsistencyError("not enough admissible sample points")
    return sign


def _signed_parts(e: Expr):
    """abs/sgn argument expressions whose sign must stay consistent."""
    rfs = set()
    trees = []

    def walk(t: Expr):
        if t.kind is None:
            rfs.update(_p.rf_signed_atoms(t.rf))
            return
        if t.kind == "fun" and t.data in ("abs", "sgn"):
            trees.append(t.args[0])
        for a in t.args:
            walk(a)

    walk(e)
    return rfs, trees


def partial_is_zero(e: Expr, v: str, seed: Optional[int] = None,
                    config: ZeroConfig = DEFAULT_CONFIG) -> ZeroVerdict:
    """Verdict for d(e)/dv == 0 on the box, sampled by forward-mode dual
    evaluation so the derivative is never assembled symbolically."""
    from .nodes import eval_tree_dual
    cfg = config if seed is None else config.with_seed(seed)
    signed_rfs, signed_trees = _signed_parts(e)
    signs: dict = {}
    gen = sample_points(cfg)
    found = 0
    worst = 0.0
    for _ in range(cfg.attempts):
        env = next(gen)
        cache: dict = {}
        try:
            vals = [( ("rf", a), _p.eval_rf(a, env, cache, cfg.margin))
                    for a in signed_rfs]
            vals += [(("tree", i),
                      eval_tree_dual(t, None, env, {}, cfg.margin)[0])
                     for i, t in enumerate(signed_trees)]
            for key, val in vals:
                s = 1 if val > 0 else (-1 if val < 0 else 0)
                prev = signs.get(key)
                if prev is None:
                    signs[key] = s
                elif prev != s and s != 0:
                    return ZeroVerdict("inconclusive",
                                       reason="abs/sgn argument changes "
                                              "sign on the sample box")
            val, dval, _m, dmass = eval_tree_dual(e, v, env, {},
                                                  cfg.margin)
            res = abs(dval) / (1.0 + abs(val) + abs(dval) + dmass)
        except (SingularPointError, DomainError, OverflowError):
            continue
        found += 1
        if res > cfg.tol:
            return ZeroVerdict("nonzero",
                               witness=JetPoint(env.get("x", 0.0),
                                                env.get("y", 0.0),
                                                env.get("p", 1.0),
                                                env.get("q", 1.0)),
                               residual=res, reason="sampled")
        worst = max(worst, res)
        if found >= cfg.samples:
            break
    if found < cfg.samples:
        return ZeroVerdict("inconclusive",
                           reason=f"only {found} admissible sample points")
    return ZeroVerdict("zero", residual=worst, reason="sampled")


def eval_at(e: Expr, pt: Union[JetPoint, dict], margin: float = 1e-12) -> float:
    """IEEE double evaluation at a jet point; guards raise
    SingularPointError, domain violations raise DomainError."""
    env = pt.env() if isinstance(pt, JetPoint) else dict(pt)
    return eval_tree(e, env, margin)


def eval_with_bound(e: Expr, pt: Union[JetPoint, dict],
                    margin: float = 1e-12) -> tuple:
    """(value, error bound) from a naive directed-rounding interval pass.

    Every elementary operation widens the enclosure by one unit in the
    last place on each side, so the true real value lies within the
    returned bound of the returned double whenever evaluation succeeds.
    """
    env = pt.env() if isinstance(pt, JetPoint) else dict(pt)
    lo, hi = _eval_interval(e, env, margin)
    val = eval_tree(e, env, margin)
    return val, max(hi - val, val - lo, 0.0)


def _widen(lo: float, hi: float) -> tuple:
    return (math.nextafter(lo, -math.inf), math.nextafter(hi, math.inf))


def _iadd(a, b):
    return _widen(a[0] + b[0], a[1] + b[1])


def _imul(a, b):
    cands = (a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    return _widen(min(cands), max(cands))


def _eval_interval(e: Expr, env: dict, margin: float) -> tuple:
    from . import poly as _pp
    k = e.kind
    if k is None:
        e = e.materialize()
        k = e.kind
    if k == "num":
        v = e.data
        return _widen(float(v), float(v))
    if k == "var":
        v = float(env[e.data])
        return (v, v)
    if k == "add":
        out = (0.0, 0.0)
        for t in e.args:
            out = _iadd(out, _eval_interval(t, env, margin))
        return out
    if k == "mul":
        out = (1.0, 1.0)
        for t in e.args:
            out = _imul(out, _eval_interval(t, env, margin))
        return out
    if k == "pow":
        lo, hi = _eval_interval(e.args[0], env, margin)
        r = e.data
        if r < 0 and lo <= margin <= hi:
            raise SingularPointError("interval straddles a pole")
        if r.denominator % 2 == 0 and lo < 0 <= hi:
            raise DomainError("interval straddles an even-root branch")
        cands = sorted((_p.real_power(lo, r), _p.real_power(hi, r)))
        if lo < 0 < hi and r.denominator % 2 == 1 and r > 0:
            cands[0] = min(cands[0], 0.0)
        return _widen(cands[0], cands[1])
    # kernels: exp and atan are monotone; log monotone on its domain
    lo, hi = _eval_interval(e.args[0], env, margin)
    fn = e.data
    if fn == "exp":
        if hi > 700:
            raise DomainError("exp overflow")
        return _widen(math.exp(lo), math.exp(hi))
    if fn == "log":
        if lo <= 0:
            raise DomainError("log of non-positive interval")
        return _widen(math.log(lo), math.log(hi))
    if fn == "atan":
        return _widen(math.atan(lo), math.atan(hi))
    if fn == "abs":
        if lo >= 0:
            return (lo, hi)
        if hi <= 0:
            return (-hi, -lo)
        return (0.0, max(-lo, hi))
    # sgn
    if lo > 0:
        return (1.0, 1.0)
    if hi < 0:
        return (-1.0, -1.0)
    return (-1.0, 1.0)


def values_on_samples(e: Expr, config: ZeroConfig = DEFAULT_CONFIG,
                      n: Optional[int] = None) -> list:
    """Values of e at the first n admissible, well-conditioned samples."""
    from .nodes import eval_tree_dual
    cfg = config if n is None else replace(config, samples=n)
    signed_rfs, signed_trees = _signed_parts(e)
    signs: dict = {}
    out = []
    gen = sample_points(cfg)
    for _ in range(cfg.attempts):
        env = next(gen)
        cache: dict = {}
        try:
            vals = [(("rf", a), _p.eval_rf(a, env, cache, cfg.margin))
                    for a in signed_rfs]
            vals += [(("tree", i),
                      eval_tree_dual(t, None, env, {}, cfg.margin)[0])
                     for i, t in enumerate(signed_trees)]
            for key, val in vals:
                s = 1 if val > 0 else (-1 if val < 0 else 0)
                prev = signs.get(key)
                if prev is None:
                    signs[key] = s
                elif prev != s and s != 0:
                    raise SignConsistencyError(
                        "abs/sgn argument changes sign on the sample box")
            val, _dv, mass, _dm = eval_tree_dual(e, None, env, {},
                                                 cfg.margin)
            if val != 0.0 and abs(val) < 1e-9 * mass:
                raise SingularPointError("ill-conditioned evaluation point")
            out.append(val)
        except (SingularPointError, DomainError, OverflowError):
            continue
        if len(out) >= cfg.samples:
            break
    return out
