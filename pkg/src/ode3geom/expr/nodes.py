"""Immutable expression trees over the jet variables x, y, p, q.

Node kinds: exact rational constants, variables, n-ary sums and products,
powers with exact rational exponents, and the unary kernels exp, log, atan,
sqrt (stored as power 1/2), abs, sgn.  Every tree lowers to a canonical
rational form (poly.RF); trees built from an RF are materialised lazily.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Union

from . import poly as _p
from .poly import RF, RF_ONE, RF_ZERO, DomainError, SingularPointError

Rat = Union[int, Fraction]

NUM = "num"
VARK = "var"
ADD = "add"
MUL = "mul"
POW = "pow"
FUN = "fun"

JET_VARS = ("x", "y", "p", "q")


class Expr:
    """An immutable symbolic expression."""

    __slots__ = ("kind", "data", "args", "_rf", "_tree_hash")

    def __init__(self, kind, data=None, args=(), rf=None):
        self.kind = kind
        self.data = data
        self.args = args
        self._rf = rf
        self._tree_hash = None

    # --- lowering ----------------------------------------------------------

    @property
    def rf(self) -> RF:
        r = self._rf
        if r is None:
            r = _lower(self)
            self._rf = r
        return r

    # --- construction sugar --------------------------------------------------

    @staticmethod
    def _coerce(v) -> "Expr":
        if isinstance(v, Expr):
            return v
        if isinstance(v, (int, Fraction)):
            return num(v)
        raise TypeError(f"cannot use {type(v).__name__} as an expression")

    @staticmethod
    def _try(v):
        if isinstance(v, (Expr, int, Fraction)):
            return Expr._coerce(v)
        return None

    def __add__(self, other):
        o = Expr._try(other)
        return NotImplemented if o is None else add(self, o)

    def __radd__(self, other):
        o = Expr._try(other)
        return NotImplemented if o is None else add(o, self)

    def __sub__(self, other):
        o = Expr._try(other)
        return NotImplemented if o is None else add(self, neg(o))

    def __rsub__(self, other):
        o = Expr._try(other)
        return NotImplemented if o is None else add(o, neg(self))

    def __mul__(self, other):
        o = Expr._try(other)
        return NotImplemented if o is None else mul(self, o)

    def __rmul__(self, other):
        o = Expr._try(other)
        return NotImplemented if o is None else mul(o, self)

    def __truediv__(self, other):
        o = Expr._try(other)
        return NotImplemented if o is None else mul(self, pow_(o, Fraction(-1)))

    def __rtruediv__(self, other):
        o = Expr._try(other)
        return NotImplemented if o is None else mul(o, pow_(self, Fraction(-1)))

    def __pow__(self, e):
        return pow_(self, e)

    def __neg__(self):
        return neg(self)

    # --- identity ------------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Expr):
            return NotImplemented
        return _tree_eq(self, other)

    def __hash__(self):
        h = self._tree_hash
        if h is None:
            if self.kind is None:
                h = hash(("rf", self.rf))
            else:
                h = hash((self.kind, self.data, self.args))
            self._tree_hash = h
        return h

    def materialize(self) -> "Expr":
        """A concrete canonical tree for an RF-backed expression."""
        if self.kind is not None:
            return self
        return rf_to_tree(self.rf)

    def __str__(self):
        return to_str(self)

    def __repr__(self):
        return f"Expr({to_str(self)})"

    def free_vars(self) -> set:
        out = set()
        _collect_vars(self.rf, out)
        return out

    def subs(self, mapping: dict) -> "Expr":
        """Substitute expressions for variables (by name)."""
        env = {name: Expr._coerce(v) for name, v in mapping.items()}
        return from_rf(_subs_rf(self.rf, env))


def _tree_eq(a: Expr, b: Expr) -> bool:
    if a.kind is None or b.kind is None:
        return a.rf == b.rf
    if a.kind != b.kind or a.data != b.data or len(a.args) != len(b.args):
        return False
    return all(_tree_eq(x, y) for x, y in zip(a.args, b.args))


# ------------------------------------------------------------------ builders


def num(v: Rat) -> Expr:
    f = Fraction(v)
    return Expr(NUM, f, (), rf=_p.rf_const(f))


def var(name: str) -> Expr:
    return Expr(VARK, name, (), rf=_p.rf_var(name))


def add(*terms: Expr) -> Expr:
    flat = []
    for t in terms:
        t = Expr._coerce(t)
        if t.kind == ADD:
            flat.extend(t.args)
        else:
            flat.append(t)
    if not flat:
        return ZERO_E
    if len(flat) == 1:
        return flat[0]
    return Expr(ADD, None, tuple(flat))


def mul(*factors: Expr) -> Expr:
    flat = []
    for f in factors:
        f = Expr._coerce(f)
        if f.kind == MUL:
            flat.extend(f.args)
        else:
            flat.append(f)
    if not flat:
        return ONE_E
    if len(flat) == 1:
        return flat[0]
    return Expr(MUL, None, tuple(flat))


def neg(e: Expr) -> Expr:
    e = Expr._coerce(e)
    if e.kind == NUM:
        return num(-e.data)
    return mul(num(-1), e)


def pow_(base: Expr, expo: Rat) -> Expr:
    f = Fraction(expo)
    if f == 1:
        return Expr._coerce(base)
    return Expr(POW, f, (Expr._coerce(base),))


def fun(name: str, arg: Expr) -> Expr:
    if name == "sqrt":
        return pow_(arg, Fraction(1, 2))
    if name not in _p.KERNEL_NAMES:
        raise ValueError(f"unknown kernel {name!r}")
    return Expr(FUN, name, (Expr._coerce(arg),))


ZERO_E = num(0)
ONE_E = num(1)

X, Y, P, Q = var("x"), var("y"), var("p"), var("q")


def exp(e) -> Expr:
    return fun("exp", Expr._coerce(e))


def log(e) -> Expr:
    return fun("log", Expr._coerce(e))


def atan(e) -> Expr:
    return fun("atan", Expr._coerce(e))


def sqrt(e) -> Expr:
    return pow_(Expr._coerce(e), Fraction(1, 2))


def abs_(e) -> Expr:
    return fun("abs", Expr._coerce(e))


def sgn(e) -> Expr:
    return fun("sgn", Expr._coerce(e))


# ----------------------------------------------------------------- lowering


def _lower(e: Expr) -> RF:
    k = e.kind
    if k == NUM:
        return _p.rf_const(e.data)
    if k == VARK:
        return _p.rf_var(e.data)
    if k == ADD:
        out = RF_ZERO
        for t in e.args:
            out = out + t.rf
        return out
    if k == MUL:
        out = RF_ONE
        for f in e.args:
            out = out * f.rf
        return out
    if k == POW:
        return _p.rf_pow(e.args[0].rf, e.data)
    if k == FUN:
        return _p.rf_kernel(e.data, e.args[0].rf)
    raise AssertionError(k)


def from_rf(rf: RF) -> Expr:
    return Expr(None, rf=rf)


# --------------------------------------------------------------- un-lowering


def _atom_tree(aid: int, e: Fraction) -> Expr:
    kind, payload = _p._atom_payload[aid]
    if kind == _p.VAR:
        base = var(payload)
    elif kind == _p.PRIME:
        if isinstance(payload, int) and payload >= 10 ** 11:
            base = num(Fraction(payload // 10 ** 12, payload % 10 ** 12))
        else:
            base = num(payload)
    elif kind == _p.PBASE:
        base = _poly_tree(payload)
    else:
        fn, arg = payload
        base = Expr(FUN, fn, (rf_to_tree(arg),))
    if e == 1:
        return base
    return Expr(POW, e, (base,))


def _mono_tree(m: tuple, c) -> Expr:
    factors = []
    if c != 1 or not m:
        factors.append(num(c))
    for aid, e in m:
        factors.append(_atom_tree(aid, Fraction(e)))
    if len(factors) == 1:
        return factors[0]
    return Expr(MUL, None, tuple(factors))


def _poly_tree(p: dict, scale=1) -> Expr:
    if not p:
        return ZERO_E
    terms = [_mono_tree(m, Fraction(c) * scale)
             for m, c in sorted(p.items(), key=lambda it: _p.mono_key(it[0]))]
    if len(terms) == 1:
        return terms[0]
    return Expr(ADD, None, tuple(terms))


def rf_to_tree(rf: RF) -> Expr:
    nt = _poly_tree(rf.num, rf.c)
    if not rf.den or nt is ZERO_E:
        out = nt
    else:
        factors = [nt]
        for _k, f, e in rf.den:
            if len(f) == 1:
                (m, c), = f.items()
                factors.append(_mono_tree(
                    tuple((aid, -Fraction(ee) * e) for aid, ee in m),
                    Fraction(1) / (Fraction(c) ** e)))
            else:
                factors.append(Expr(POW, Fraction(-e), (_poly_tree(f),)))
        out = mul(*factors)
    out._rf = rf
    return out


def normalize(e: Expr) -> Expr:
    """Canonical form: expanded, cancelled, sorted operands.  The concrete
    tree materialises lazily (printing and structural comparison force it;
    comparison of two normalized expressions short-circuits on the
    canonical rational form)."""
    return Expr(None, rf=e.rf)


# ------------------------------------------------------------- differentiation


def partial(e: Expr, v: Union[str, Expr]) -> Expr:
    """Exact partial derivative with respect to a variable."""
    if isinstance(v, Expr):
        if v.kind != VARK:
            raise ValueError("can only differentiate with respect to a variable")
        v = v.data
    return from_rf(_p.drf(e.rf, _p.var_atom(v)))


def partial_tree(e: Expr, v: str) -> Expr:
    """Partial derivative as an unexpanded Leibniz tree.

    Equal to partial() after normalisation, but never combines the result
    over a common denominator; canonical-form leaves differentiate through
    the polynomial layer."""
    k = e.kind
    if k is None:
        return from_rf(_p.drf(e.rf, _p.var_atom(v)))
    if k == NUM:
        return ZERO_E
    if k == VARK:
        return ONE_E if e.data == v else ZERO_E
    if k == ADD:
        parts = [partial_tree(t, v) for t in e.args]
        parts = [t for t in parts if t is not ZERO_E]
        if not parts:
            return ZERO_E
        return parts[0] if len(parts) == 1 else add(*parts)
    if k == MUL:
        terms = []
        for i, f in enumerate(e.args):
            df = partial_tree(f, v)
            if df is ZERO_E:
                continue
            rest = e.args[:i] + e.args[i + 1:]
            terms.append(mul(df, *rest) if rest else df)
        if not terms:
            return ZERO_E
        return terms[0] if len(terms) == 1 else add(*terms)
    if k == POW:
        db = partial_tree(e.args[0], v)
        if db is ZERO_E:
            return ZERO_E
        r = e.data
        return mul(num(r), pow_(e.args[0], r - 1), db)
    # FUN
    du = partial_tree(e.args[0], v)
    if du is ZERO_E or e.data == "sgn":
        return ZERO_E
    u = e.args[0]
    if e.data == "exp":
        return mul(e, du)
    if e.data == "log":
        return mul(du, pow_(u, Fraction(-1)))
    if e.data == "atan":
        return mul(du, pow_(add(ONE_E, mul(u, u)), Fraction(-1)))
    # abs
    return mul(fun("sgn", u), du)


# ---------------------------------------------------------------- evaluation


def eval_tree(e: Expr, env: dict, margin: float = 0.0) -> float:
    """Faithful evaluation of the tree (no normalisation)."""
    k = e.kind
    if k is None:
        return _p.eval_rf(e.rf, env, {}, margin)
    if k == NUM:
        return float(e.data)
    if k == VARK:
        try:
            return float(env[e.data])
        except KeyError:
            raise DomainError(f"unbound variable {e.data!r}")
    if k == ADD:
        return sum(eval_tree(t, env, margin) for t in e.args)
    if k == MUL:
        out = 1.0
        for f in e.args:
            out *= eval_tree(f, env, margin)
        return out
    if k == POW:
        b = eval_tree(e.args[0], env, margin)
        if e.data < 0 and abs(b) <= margin:
            raise SingularPointError("power base vanishes at sample point")
        return _p.real_power(b, e.data)
    if k == FUN:
        import math
        u = eval_tree(e.args[0], env, margin)
        if e.data == "exp":
            if u > 700:
                raise DomainError("exp overflow")
            return math.exp(u)
        if e.data == "log":
            if u <= 0:
                raise DomainError("log of non-positive value")
            return math.log(u)
        if e.data == "atan":
            return math.atan(u)
        if e.data == "abs":
            return abs(u)
        return 0.0 if u == 0 else math.copysign(1.0, u)
    raise AssertionError(k)


def eval_tree_dual(e: Expr, v, env: dict, cache: dict,
                   margin: float = 0.0) -> tuple:
    """(value, d/dv value, value-mass, d-mass) without lowering the tree.

    rf-backed leaves evaluate through the polynomial layer; tree nodes
    combine dual numbers, so large invariant expressions never have to be
    expanded symbolically."""
    import math
    k = e.kind
    if k is None:
        return _p.eval_rf_dual(e.rf, v, env, cache, margin)
    if k == NUM:
        c = float(e.data)
        return c, 0.0, abs(c), 0.0
    if k == VARK:
        val = float(env[e.data])
        dv = 1.0 if e.data == v else 0.0
        return val, dv, abs(val), dv
    if k == ADD:
        tv = tdv = tm = tdm = 0.0
        for t in e.args:
            a, b, m, dm = eval_tree_dual(t, v, env, cache, margin)
            tv += a
            tdv += b
            tm += m
            tdm += dm
        return tv, tdv, tm, tdm
    if k == MUL:
        tv, tdv, tm, tdm = 1.0, 0.0, 1.0, 0.0
        for t in e.args:
            a, b, m, dm = eval_tree_dual(t, v, env, cache, margin)
            tv, tdv = tv * a, tv * b + tdv * a
            tm, tdm = tm * m, tm * dm + tdm * m
        return tv, tdv, tm, tdm
    if k == POW:
        a, b, m, _dm = eval_tree_dual(e.args[0], v, env, cache, margin)
        r = e.data
        if r < 0 and abs(a) <= margin * (1.0 + m):
            raise SingularPointError("power base vanishes at sample point")
        val = _p.real_power(a, r)
        if b == 0.0:
            return val, 0.0, abs(val), 0.0
        if a == 0.0:
            raise SingularPointError("zero base in dual evaluation")
        dval = float(r) * val * b / a
        return val, dval, abs(val), abs(dval)
    if k == FUN:
        a, b, _m, _dm = eval_tree_dual(e.args[0], v, env, cache, margin)
        fn = e.data
        if fn == "exp":
            if a > 700:
                raise DomainError("exp overflow")
            val = math.exp(a)
            return val, val * b, val, abs(val * b)
        if fn == "log":
            if a <= 0:
                raise DomainError("log of non-positive value")
            return math.log(a), b / a, abs(math.log(a)), abs(b / a)
        if fn == "atan":
            val = math.atan(a)
            dv = b / (1.0 + a * a)
            return val, dv, abs(val), abs(dv)
        if fn == "abs":
            s = math.copysign(1.0, a) if a != 0 else 0.0
            return abs(a), s * b, abs(a), abs(b)
        s = 0.0 if a == 0 else math.copysign(1.0, a)
        return s, 0.0, 1.0, 0.0
    raise AssertionError(k)


def _collect_vars(rf: RF, out: set) -> None:
    seen = set()

    def walk_poly(p):
        for m in p:
            for aid, _ in m:
                walk_atom(aid)

    def walk_atom(aid):
        if aid in seen:
            return
        seen.add(aid)
        kind, payload = _p._atom_payload[aid]
        if kind == _p.VAR:
            out.add(payload)
        elif kind == _p.KERN:
            walk_rf(payload[1])
        elif kind == _p.PBASE:
            walk_poly(payload)

    def walk_rf(r):
        walk_poly(r.num)
        for _k, f, _e in r.den:
            walk_poly(f)

    walk_rf(rf)


# -------------------------------------------------------------- substitution


def _subs_rf(rf: RF, env: dict) -> RF:
    cache: dict = {}

    def sub_atom(aid: int) -> RF:
        got = cache.get(aid)
        if got is not None:
            return got
        kind, payload = _p._atom_payload[aid]
        if kind == _p.VAR:
            out = env[payload].rf if payload in env else _p.rf_var(payload)
        elif kind == _p.PRIME:
            out = _p.rf_atom(aid)
        elif kind == _p.PBASE:
            out = sub_poly(payload)
        else:
            fn, arg = payload
            out = _p.rf_kernel(fn, sub_rf(arg))
        cache[aid] = out
        return out

    def sub_poly(p: dict) -> RF:
        total = RF_ZERO
        for m, c in p.items():
            term = _p.rf_const(c)
            for aid, e in m:
                term = term * _p.rf_pow(sub_atom(aid), e)
            total = total + term
        return total

    def sub_rf(r: RF) -> RF:
        out = sub_poly(r.num)
        for _k, f, e in r.den:
            out = out / sub_poly(f).intpow(e)
        if r.c != 1:
            out = _p.rf_const(r.c) * out
        return out

    return sub_rf(rf)


# ------------------------------------------------------------------ printing


def _needs_parens_in_product(e: Expr) -> bool:
    return e.kind == ADD or (e.kind == NUM and e.data < 0)


def _frac_str(f: Fraction) -> str:
    if f.denominator == 1:
        return str(f.numerator)
    return f"{f.numerator}/{f.denominator}"


def _pow_exp_str(f: Fraction) -> str:
    if f.denominator == 1 and f >= 0:
        return str(f.numerator)
    return f"({f.numerator}/{f.denominator})" if f.denominator != 1 \
        else f"({f.numerator})"


def to_str(e: Expr) -> str:
    e = e.materialize()
    k = e.kind
    if k == NUM:
        if e.data < 0:
            return f"(-{_frac_str(-e.data)})"
        return _frac_str(e.data)
    if k == VARK:
        return e.data
    if k == ADD:
        parts = []
        for i, t in enumerate(e.args):
            s = to_str(t)
            if i and s.startswith("(-") and s.endswith(")") and t.kind == NUM:
                parts.append(" - " + s[2:-1])
            elif i and s.startswith("-"):
                parts.append(" - " + s[1:])
            else:
                parts.append((" + " if i else "") + s)
        return "".join(parts)
    if k == MUL:
        parts = []
        for f in e.args:
            s = to_str(f)
            if _needs_parens_in_product(f) and not (s.startswith("(") and s.endswith(")")):
                s = f"({s})"
            parts.append(s)
        return "*".join(parts)
    if k == POW:
        b = e.args[0]
        bs = to_str(b)
        if b.kind in (ADD, MUL, POW, NUM) and not (bs.startswith("(") and bs.endswith(")")):
            bs = f"({bs})"
        return f"{bs}^{_pow_exp_str(e.data)}"
    if k == FUN:
        return f"{e.data}({to_str(e.args[0])})"
    raise AssertionError(k)
