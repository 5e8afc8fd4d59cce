"""Exact rational-function arithmetic over jet variables and opaque kernels.

Every expression is flattened to c * num / (f1^e1 * ... * fk^ek): an exact
rational prefactor, a primitive integer-coefficient numerator polynomial,
and a factored denominator of primitive integer polynomials.  Polynomial
"atoms" are jet variables, kernel applications (exp, log, atan, abs, sgn of
an inner rational form), fractional powers of multi-term polynomial bases,
and prime integers carrying fractional powers of rational constants.
Monomial exponents are ints or Fractions; integer powers of composite atoms
are spliced back into the polynomial so that q^(1/2)*q^(1/2) is q and
2^(1/2)*8^(1/2) is 4.

Keeping denominators factored makes the operations the invariant pipelines
hammer on cheap: differentiation bumps factor multiplicities by one instead
of squaring denominators, and cancellation is a few exact-division tests
instead of a multivariate gcd.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional, Union

Coeff = Union[int, Fraction]

VAR = "var"
KERN = "kern"
PBASE = "pbase"
PRIME = "prime"

KERNEL_NAMES = ("exp", "log", "atan", "abs", "sgn")


class DomainError(ArithmeticError):
    """Evaluation left the real domain (even root of a negative value, log
    of a non-positive value)."""


class SingularPointError(ArithmeticError):
    """A guard denominator vanished (or nearly vanished) at the point."""


class _CFrac(Fraction):
    """Fraction with a cached hash; instances are interned so that tuple
    comparisons hit the identity fast path."""

    __slots__ = ("_chash",)

    def __hash__(self):
        try:
            return self._chash
        except AttributeError:
            h = Fraction.__hash__(self)
            self._chash = h
            return h


_EXP_INTERN: dict = {}


def _exp_norm(e: Coeff) -> Coeff:
    if type(e) is int:
        return e
    if e.denominator == 1:
        return e.numerator
    key = (e.numerator, e.denominator)
    c = _EXP_INTERN.get(key)
    if c is None:
        c = _CFrac(e)
        _EXP_INTERN[key] = c
    return c


def _exp_den(e: Coeff) -> int:
    return 1 if type(e) is int else e.denominator


def _exp_num(e: Coeff) -> int:
    return e if type(e) is int else e.numerator


def _as_frac(c: Coeff) -> Fraction:
    return Fraction(c) if type(c) is int else c


# ----------------------------------------------------------------- atom table

_atom_payload: list = []     # index -> (kind, payload)
_atom_ids: dict = {}         # key -> index


def _intern_atom(kind, key, payload) -> int:
    aid = _atom_ids.get((kind, key))
    if aid is None:
        aid = len(_atom_payload)
        _atom_ids[(kind, key)] = aid
        _atom_payload.append((kind, payload))
    return aid


def atom_kind(aid: int) -> str:
    return _atom_payload[aid][0]


def atom_payload(aid: int):
    return _atom_payload[aid][1]


def var_atom(name: str) -> int:
    return _intern_atom(VAR, name, name)


def kern_atom(fn: str, arg: "RF") -> int:
    return _intern_atom(KERN, (fn, arg.key()), (fn, arg))


def pbase_atom(base: dict) -> int:
    return _intern_atom(PBASE, poly_key(base), base)


def prime_atom(p: int) -> int:
    return _intern_atom(PRIME, p, p)


# ---------------------------------------------------------------- monomials

# A monomial: tuple of (atom_id, exponent), sorted by atom id; exponents are
# ints when integral, Fractions otherwise.
MONE: tuple = ()


def mono_mul(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    out = []
    i = j = 0
    la, lb = len(a), len(b)
    while i < la and j < lb:
        ea = a[i]
        eb = b[j]
        if ea[0] < eb[0]:
            out.append(ea)
            i += 1
        elif ea[0] > eb[0]:
            out.append(eb)
            j += 1
        else:
            s = ea[1] + eb[1]
            if s:
                out.append((ea[0], _exp_norm(s)))
            i += 1
            j += 1
    if i < la:
        out.extend(a[i:])
    if j < lb:
        out.extend(b[j:])
    return tuple(out)


def mono_key(a: tuple):
    return tuple((aid, _exp_num(e), _exp_den(e)) for aid, e in a)


def mono_gcd(a: tuple, b: tuple) -> tuple:
    db = dict(b)
    out = {}
    for aid, e in a:
        eb = db.get(aid)
        if eb is not None:
            out[aid] = min(e, eb)
    return tuple(sorted(out.items()))


# -------------------------------------------------------------- polynomials

# A polynomial is a dict {monomial: coeff}, zero coefficients removed.
# Coefficients are ints in canonical polys; Fractions may appear transiently.


def poly_const(c: Coeff) -> dict:
    return {MONE: c} if c else {}


P_ONE = {MONE: 1}


def poly_add(a: dict, b: dict) -> dict:
    if not a:
        return b
    if not b:
        return a
    out = dict(a)
    for m, c in b.items():
        cur = out.get(m)
        if cur is None:
            out[m] = c
        else:
            s = cur + c
            if s:
                out[m] = s
            else:
                del out[m]
    return out


def poly_neg(a: dict) -> dict:
    return {m: -c for m, c in a.items()}


def poly_scale(a: dict, c: Coeff) -> dict:
    if not c:
        return {}
    if c == 1:
        return a
    return {m: cc * c for m, cc in a.items()}


def poly_mul(a: dict, b: dict) -> dict:
    if not a or not b:
        return {}
    if len(a) == 1:
        (ma, ca), = a.items()
        if not ma:
            return a if ca != 1 and not b else poly_scale(b, ca) \
                if ca != 1 else b
    if len(b) == 1:
        (mb, cb), = b.items()
        if not mb:
            return poly_scale(a, cb) if cb != 1 else a
    out: dict = {}
    get = out.get
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = mono_mul(ma, mb)
            c = ca * cb
            cur = get(m)
            if cur is None:
                out[m] = c
            else:
                s = cur + c
                if s:
                    out[m] = s
                else:
                    del out[m]
    return out


def poly_pow(a: dict, n: int) -> dict:
    if n == 0:
        return dict(P_ONE)
    if n == 1:
        return a
    half = poly_pow(a, n // 2)
    out = poly_mul(half, half)
    if n % 2:
        out = poly_mul(out, a)
    return out


def poly_key(a: dict):
    return tuple(sorted((mono_key(m), _exp_num(c), _exp_den(c))
                        for m, c in a.items()))


def poly_is_const(a: dict) -> bool:
    return not a or (len(a) == 1 and MONE in a)


def poly_atoms(a: dict) -> set:
    out = set()
    for m in a:
        for aid, _ in m:
            out.add(aid)
    return out


def poly_content(a: dict) -> Fraction:
    """Positive rational content of a mixed int/Fraction poly."""
    num_gcd = 0
    den_lcm = 1
    for c in a.values():
        num_gcd = math.gcd(num_gcd, abs(_exp_num(c)))
        d = _exp_den(c)
        den_lcm = den_lcm * d // math.gcd(den_lcm, d)
    return Fraction(num_gcd, den_lcm)


def poly_lead_mono(a: dict) -> tuple:
    return max(a, key=mono_key)


def poly_primitive(a: dict) -> tuple:
    """(c, b) with a == c*b, b integer, content-free, positive-leading."""
    if not a:
        return Fraction(0), {}
    c = poly_content(a)
    if a[poly_lead_mono(a)] < 0:
        c = -c
    if c == 1:
        return Fraction(1), {m: _exp_num(cc) for m, cc in a.items()}
    inv = 1 / c
    return c, {m: _exp_num(cc * inv) for m, cc in a.items()}


def poly_mono_content(a: dict) -> tuple:
    """Largest monomial dividing every term."""
    common: Optional[dict] = None
    for m in a:
        md = dict(m)
        if common is None:
            common = md
        else:
            for aid in list(common):
                e = md.get(aid)
                if e is None:
                    del common[aid]
                elif e < common[aid]:
                    common[aid] = e
        if not common:
            return MONE
    return tuple(sorted(common.items())) if common else MONE


_DIV_GUARD = 20000


def poly_div_exact(a: dict, b: dict) -> Optional[dict]:
    """Exact division a/b over the rationals, or None.  b nonzero.

    Uses a lexicographic order over the joint atom universe (a genuine
    monomial order), so reduction strictly decreases the lead term.
    """
    if not a:
        return {}
    if poly_is_const(b):
        c = b[MONE]
        return a if c == 1 else {m: _frac_c(cc, c) for m, cc in a.items()}
    if len(b) == 1:
        (mb, cb), = b.items()
        inv = tuple((aid, _exp_norm(-e)) for aid, e in mb)
        out = {}
        for m, c in a.items():
            mm = mono_mul(m, inv)
            for _aid, e in mm:
                if e < 0:
                    return None
            out[mm] = _frac_c(c, cb)
        return out
    import heapq
    universe = sorted(poly_atoms(a) | poly_atoms(b))
    uidx = {aid: i for i, aid in enumerate(universe)}
    nu = len(universe)

    def vec(m: tuple) -> tuple:
        v = [0] * nu
        for aid, e in m:
            v[uidx[aid]] = -e          # negated: min-heap pops the lead
        return tuple(v)

    lead_b = min(b, key=vec)
    cb = b[lead_b]
    lead_b_v = vec(lead_b)
    rem = dict(a)
    heap = [(vec(m), m) for m in rem]
    heapq.heapify(heap)
    quo: dict = {}
    guard = 0
    while rem:
        guard += 1
        if guard > _DIV_GUARD:
            return None
        lead_r = None
        while heap:
            v, m = heapq.heappop(heap)
            if m in rem:
                lead_r, lead_r_v = m, v
                break
        if lead_r is None:
            break
        qv = [lb - lr for lr, lb in zip(lead_r_v, lead_b_v)]
        for x in qv:
            if x < 0:
                return None
        qm = tuple((universe[i], _exp_norm(x))
                   for i, x in enumerate(qv) if x)
        qc = _frac_c(rem[lead_r], cb)
        quo[qm] = qc
        for mb2, cb2 in b.items():
            mm = mono_mul(qm, mb2)
            cur = rem.get(mm)
            nv = (cur if cur is not None else 0) - qc * cb2
            if nv:
                if cur is None:
                    heapq.heappush(heap, (vec(mm), mm))
                rem[mm] = nv
            else:
                if cur is not None:
                    del rem[mm]
    return quo if not rem else None


def _frac_c(a: Coeff, b: Coeff) -> Coeff:
    if type(a) is int and type(b) is int and b != 0 and a % b == 0:
        return a // b
    out = _as_frac(a) / _as_frac(b)
    return out.numerator if out.denominator == 1 else out


# ---------------------------------------------------------------- prime split

def _factorint(n: int) -> Optional[dict]:
    out: dict = {}
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    d = 53
    while d * d <= n and d < 100000:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 2
    if n > 1:
        if n < 10 ** 10:
            out[n] = out.get(n, 0) + 1
        else:
            return None
    return out


def _frac_pow_const_parts(c: Fraction, e: Fraction) -> tuple:
    """c**e for positive rational c: (rational coeff, extra mono entries)."""
    assert c > 0
    if _exp_den(e) == 1:
        return _as_frac(c) ** _exp_num(e), ()
    fn = _factorint(c.numerator)
    fd = _factorint(c.denominator)
    if fn is None or fd is None:
        aid = prime_atom(c.numerator * 10 ** 12 + c.denominator)
        return Fraction(1), ((aid, e),)
    powers: dict = dict(fn)
    for p, k in fd.items():
        powers[p] = powers.get(p, 0) - k
    coeff = Fraction(1)
    entries = []
    for p, k in sorted(powers.items()):
        tot = e * k
        n = math.floor(tot)
        rem = _exp_norm(tot - n)
        coeff *= Fraction(p) ** n
        if rem:
            entries.append((prime_atom(p), rem))
    return coeff, tuple(entries)


# ------------------------------------------------------------ canonical terms


def _canon_term(mono: tuple, coeff: Fraction):
    """Splice integer powers of composite atoms out of one monomial.

    Returns (coeff, mono, extras); extras lists (poly-or-RF, int exp)
    factors still to be multiplied in.
    """
    entries = []
    extras = []
    for aid, e in mono:
        kind, payload = _atom_payload[aid]
        if kind == VAR:
            entries.append((aid, e))
        elif kind == PRIME:
            n = math.floor(e)
            rem = _exp_norm(e - n)
            if isinstance(payload, int) and payload < 10 ** 11:
                coeff *= Fraction(payload) ** n
            else:
                coeff *= Fraction(payload // 10 ** 12, payload % 10 ** 12) ** n
            if rem:
                entries.append((aid, rem))
        elif kind == PBASE:
            n = math.floor(e)
            rem = _exp_norm(e - n)
            if n:
                extras.append((payload, n))
            if rem:
                entries.append((aid, rem))
        else:  # KERN
            fn = payload[0]
            if fn == "sgn" and _exp_den(e) == 1:
                if e % 2:
                    entries.append((aid, 1))
                continue
            if fn == "abs":
                arg = payload[1]
                simple = not arg.den and len(arg.num) == 1
                if not simple:
                    # leave |multi-term|^n alone: expanding the even part
                    # would reintroduce sign-unknown polynomial factors
                    entries.append((aid, e))
                    continue
                n2 = 2 * math.floor(e / 2)
                rem = _exp_norm(e - n2)
                if n2:
                    extras.append((arg, n2))
                if rem:
                    entries.append((aid, rem))
                continue
            entries.append((aid, e))
    return coeff, tuple(sorted(entries)), extras


def _needs_canon(num: dict) -> bool:
    for m in num:
        for aid, e in m:
            kind = _atom_payload[aid][0]
            if kind == VAR:
                continue
            if kind == PRIME or kind == PBASE:
                if _exp_den(e) == 1 or e >= 1 or e < 0:
                    return True
            else:
                fn, arg = _atom_payload[aid][1]
                if fn == "sgn" and e != 1:
                    return True
                if fn == "abs" and (e >= 2 or e < 0) \
                        and not arg.den and len(arg.num) == 1:
                    return True
    return False


def _canon_poly(a: dict) -> "RF":
    num: dict = {}
    groups: dict = {}   # den-key -> accumulated numerator poly (Fractions)
    dens: dict = {}
    for m, c in a.items():
        cc, mono, extras = _canon_term(m, _as_frac(c))
        if extras:
            term = RF._raw(cc, {mono: 1}, ())
            for fac, n in extras:
                if isinstance(fac, dict):
                    fc, fp = poly_primitive(fac)
                    term = term * RF._raw(fc ** n, poly_pow(fp, n), ()) \
                        if n > 0 else \
                        term / RF._raw(fc ** (-n), poly_pow(fp, -n), ())
                else:
                    term = term * fac.intpow(n)
            dk = _den_key(term.den)
            piece = poly_scale(term.num, term.c)
            if dk in groups:
                groups[dk] = poly_add(groups[dk], piece)
            else:
                groups[dk] = piece
                dens[dk] = term.den
            continue
        cur = num.get(mono)
        num[mono] = (cur + cc) if cur is not None else cc
        if not num[mono]:
            del num[mono]
    c, prim = poly_primitive(num)
    out = RF._raw(c, prim, ()) if prim else RF_ZERO
    for dk, numpart in groups.items():
        out = out + _make(Fraction(1), numpart, dens[dk])
    return out


# ------------------------------------------------------------------ the RF


def _den_key(den: tuple):
    return tuple((k, e) for k, _p2, e in den)


class RF:
    """c * num / product(f_i^e_i); num and the f_i primitive int polys."""

    __slots__ = ("c", "num", "den", "_key", "_hash")

    def __init__(self, c: Fraction, num: dict, den: tuple):
        self.c = c
        self.num = num
        self.den = den
        self._key = None
        self._hash = None

    @staticmethod
    def _raw(c: Fraction, num: dict, den: tuple) -> "RF":
        out = RF.__new__(RF)
        out.c = c
        out.num = num
        out.den = den
        out._key = None
        out._hash = None
        return out

    def key(self):
        k = self._key
        if k is None:
            k = (self.c, poly_key(self.num), _den_key(self.den))
            self._key = k
        return k

    def __hash__(self):
        h = self._hash
        if h is None:
            h = hash(self.key())
            self._hash = h
        return h

    def __eq__(self, other):
        return isinstance(other, RF) and self.key() == other.key()

    def is_zero_poly(self) -> bool:
        return not self.num

    def is_const(self) -> bool:
        return poly_is_const(self.num) and not self.den

    def const_value(self) -> Fraction:
        assert self.is_const()
        return self.c * self.num.get(MONE, 0)

    def den_poly(self) -> dict:
        out = dict(P_ONE)
        for _k, f, e in self.den:
            out = poly_mul(out, poly_pow(f, e))
        return out

    # arithmetic ------------------------------------------------------------

    def __add__(self, other: "RF") -> "RF":
        if not self.num:
            return other
        if not other.num:
            return self
        if self.den == other.den or _den_key(self.den) == _den_key(other.den):
            den = self.den
            n1, n2 = self.num, other.num
        else:
            den, co1, co2 = _den_lcm(self.den, other.den)
            n1 = self.num
            for _k, f, e in co1:
                n1 = poly_mul(n1, poly_pow(f, e))
            n2 = other.num
            for _k, f, e in co2:
                n2 = poly_mul(n2, poly_pow(f, e))
        c1, c2 = self.c, other.c
        if c1 == c2:
            return _make(c1, poly_add(n1, n2), den)
        g = Fraction(math.gcd(c1.numerator, c2.numerator),
                     (c1.denominator * c2.denominator
                      // math.gcd(c1.denominator, c2.denominator)))
        if c1 < 0 and c2 < 0:
            g = -g
        r1, r2 = c1 / g, c2 / g
        s = poly_add(poly_scale(n1, r1.numerator) if r1 != 1 else n1,
                     poly_scale(n2, r2.numerator) if r2 != 1 else n2)
        return _make(g, s, den)

    def __neg__(self) -> "RF":
        return RF._raw(-self.c, self.num, self.den)

    def __sub__(self, other: "RF") -> "RF":
        return self + (-other)

    def __mul__(self, other: "RF") -> "RF":
        if not self.num or not other.num:
            return RF_ZERO
        return _make(self.c * other.c, poly_mul(self.num, other.num),
                     _den_mul(self.den, other.den))

    def __truediv__(self, other: "RF") -> "RF":
        if other.is_zero_poly():
            raise ZeroDivisionError("division by symbolically zero expression")
        # cancel common denominator factors before anything expands
        sd = {k: (f, e) for k, f, e in self.den}
        extra_num = []
        for k, f, e in other.den:
            cur = sd.get(k)
            if cur is not None:
                m = min(e, cur[1])
                sd[k] = (cur[0], cur[1] - m)
                e -= m
            if e:
                extra_num.append((f, e))
        num = self.num
        for f, e in extra_num:
            num = poly_mul(num, poly_pow(f, e))
        den = tuple(sorted((k, f, e) for k, (f, e) in sd.items() if e))
        if poly_is_const(other.num):
            return _make(self.c / (other.c * other.num[MONE]), num, den)
        onum = other.num
        mc = poly_mono_content(onum)
        if mc:
            inv = tuple((aid, _exp_norm(-e)) for aid, e in mc)
            onum = poly_mul(onum, {inv: 1})
            num = poly_mul(num, {inv: 1})
        if poly_is_const(onum):
            return _make(self.c / (other.c * onum[MONE]), num, den)
        okey = poly_key(onum)
        return _make(self.c / other.c, num,
                     _den_mul(den, ((okey, onum, 1),)))

    def intpow(self, n: int) -> "RF":
        if n == 0:
            return RF_ONE
        if n == 1:
            return self
        if n > 0:
            return _make(self.c ** n, poly_pow(self.num, n),
                         tuple((k, f, e * n) for k, f, e in self.den))
        inv = RF_ONE / self
        return inv.intpow(-n)


def _den_mul(d1: tuple, d2: tuple) -> tuple:
    if not d1:
        return d2
    if not d2:
        return d1
    out = {k: (f, e) for k, f, e in d1}
    for k, f, e in d2:
        cur = out.get(k)
        out[k] = (f, e + cur[1]) if cur else (f, e)
    return tuple(sorted((k, f, e) for k, (f, e) in out.items() if e))


def _den_lcm(d1: tuple, d2: tuple) -> tuple:
    all_k = {k: (f, e) for k, f, e in d1}
    for k, f, e in d2:
        cur = all_k.get(k)
        if cur is None or cur[1] < e:
            all_k[k] = (f, e)
    lcm = tuple(sorted((k, f, e) for k, (f, e) in all_k.items()))
    d1m = {k: e for k, _f, e in d1}
    d2m = {k: e for k, _f, e in d2}
    co1 = tuple((k, f, e - d1m.get(k, 0)) for k, f, e in lcm
                if e - d1m.get(k, 0))
    co2 = tuple((k, f, e - d2m.get(k, 0)) for k, f, e in lcm
                if e - d2m.get(k, 0))
    return lcm, co1, co2


_CANCEL_NUM_CAP = 5000


def _make(c: Fraction, num: dict, den: tuple) -> "RF":
    """Normalise: splice composites, clear Laurent exponents, cancel."""
    if not num or not c:
        return RF_ZERO
    if _needs_canon(num):
        rf = _canon_poly(num)
        if rf.is_zero_poly():
            return RF_ZERO
        c = c * rf.c
        num = rf.num
        den = _den_mul(den, rf.den)
    # clear negative exponents in the numerator
    worst: dict = {}
    for m in num:
        for aid, e in m:
            if e < 0 and e < worst.get(aid, 0):
                worst[aid] = e
    if worst:
        shift = tuple(sorted((aid, _exp_norm(-e)) for aid, e in worst.items()))
        num = poly_mul(num, {shift: 1})
        den = _den_mul(den, tuple(
            (poly_key({((aid, _exp_norm(-e)),): 1}),
             {((aid, _exp_norm(-e)),): 1}, 1)
            for aid, e in sorted(worst.items())))
    # cancel numerator monomial content against monomial den factors
    mono_entries: dict = {}
    out_den = []
    for k, f, e in den:
        if len(f) == 1:
            (fm, fc), = f.items()
            assert fc == 1 or fm, "constant denominator factor"
            for aid, ee in fm:
                mono_entries[aid] = mono_entries.get(aid, 0) + ee * e
            if fc != 1:
                c = c / Fraction(fc) ** e
        else:
            out_den.append((k, f, e))
    if mono_entries:
        nc = poly_mono_content(num)
        ncd = dict(nc)
        inv = []
        for aid, ee in sorted(mono_entries.items()):
            ee = _exp_norm(ee)
            have = ncd.get(aid, 0)
            take = min(ee, have)
            if take > 0:
                inv.append((aid, -take))
                ee = _exp_norm(ee - take)
            if ee:
                fp = {((aid, ee),): 1}
                out_den.append((poly_key(fp), fp, 1))
        if inv:
            num = poly_mul(num, {tuple(inv): 1})
    den = tuple(sorted(out_den))
    # cancel multi-term factors by exact division
    if den and len(num) <= _CANCEL_NUM_CAP and not poly_is_const(num):
        changed = True
        while changed and not poly_is_const(num):
            changed = False
            new_den = []
            for k, f, e in den:
                while e > 0 and not poly_is_const(num):
                    q = poly_div_exact(num, f)
                    if q is None:
                        break
                    num = q
                    e -= 1
                    changed = True
                if e:
                    new_den.append((k, f, e))
            den = tuple(new_den)
    cc, num = poly_primitive(num)
    if not num:
        return RF_ZERO
    return RF._raw(c * cc, num, den)


RF_ZERO = RF._raw(Fraction(0), {}, ())
RF_ONE = RF._raw(Fraction(1), dict(P_ONE), ())


def rf_const(c: Fraction) -> RF:
    c = _as_frac(c)
    return RF._raw(c, dict(P_ONE), ()) if c else RF_ZERO


def rf_var(name: str) -> RF:
    return RF._raw(Fraction(1), {((var_atom(name), 1),): 1}, ())


def rf_atom(aid: int, e: Coeff = 1) -> RF:
    return _make(Fraction(1), {((aid, _exp_norm(e)),): 1}, ())


# ---------------------------------------------------------- fractional powers


def _mono_all_positive(m: tuple) -> bool:
    return all(_atom_positive(aid, e) for aid, e in m)


def _even_pow_safe(base: RF) -> bool:
    """May an even root be taken without routing through abs?

    Safe exactly when the representation does not split the power across
    independently-signed factors: a lone atom, a monomial of manifestly
    nonnegative atoms over such a denominator, or a single multi-term
    numerator with no monomial content and no denominator (it becomes one
    opaque power base with strict real semantics).
    """
    if base.c < 0:
        return False
    num = base.num
    if len(num) == 1:
        (m, _c), = num.items()
        if not (len(m) <= 1 and not base.den) \
                and not _mono_all_positive(m):
            return False
        for _k, f, _e in base.den:
            if len(f) != 1:
                return False
            (fm, fc), = f.items()
            if fc < 0 or not _mono_all_positive(fm):
                return False
        return True
    return not base.den and not poly_mono_content(num)


def rf_pow(base: RF, e: Fraction) -> RF:
    """base**e with an exact rational exponent.

    Odd roots are multiplicative over the reals and distribute factorwise;
    even roots of composite bases go through abs (exact wherever the whole
    base is nonnegative, i.e. wherever the expression is real at all)."""
    e = _as_frac(e)
    if e.denominator == 1:
        return base.intpow(e.numerator)
    if base.is_zero_poly():
        if e > 0:
            return RF_ZERO
        raise ZeroDivisionError("0 raised to a negative power")
    if e.denominator % 2 == 0 and not _even_pow_safe(base):
        return rf_pow(rf_kernel("abs", base), e)
    c, num = base.c, base.num
    if c < 0 and e.denominator % 2 == 0:
        # sign must stay inside the even root; push it into the poly part
        c, num = -c, poly_neg(num)
    out = _frac_power_const(c, e) * _frac_power_poly(num, e)
    for _k, f, fe in base.den:
        out = out * _frac_power_poly(f, -e * fe)
    return out


def _frac_power_poly(p: dict, e: Fraction) -> RF:
    """p**e for a nonzero polynomial p with integer coefficients."""
    if e.denominator == 1:
        n = e.numerator
        if n >= 0:
            return RF._raw(Fraction(1), poly_pow(p, n), ())
        return RF_ONE / RF._raw(Fraction(1), poly_pow(p, -n), ())
    if poly_is_const(p):
        return _frac_power_const(_as_frac(p[MONE]), e)
    if len(p) == 1:
        (m, cc), = p.items()
        if cc < 0 and e.denominator % 2 == 0:
            # e.g. (-y)^(1/2): keep the signed monomial as an opaque base
            aid = pbase_atom({m: -1})
            return _frac_power_const(Fraction(-cc), e) * rf_atom(aid, e)
        out = _frac_power_const(_as_frac(cc), e)
        mono = tuple(sorted((aid, _exp_norm(ee * e)) for aid, ee in m))
        return out * _make(Fraction(1), {mono: 1}, ())
    mc = poly_mono_content(p)
    if mc:
        # distribute over the monomial content (odd-root convention)
        inv = tuple((aid, _exp_norm(-ee)) for aid, ee in mc)
        phat = poly_mul(p, {inv: 1})
        mono = tuple(sorted((aid, _exp_norm(ee * e)) for aid, ee in mc))
        return _make(Fraction(1), {mono: 1}, ()) * _frac_power_poly(phat, e)
    cc, prim = poly_primitive(p)
    if cc < 0 and e.denominator % 2 == 0:
        # keep the sign inside the base: atom with negative leading sign
        aid = pbase_atom(poly_neg(prim))
        return _frac_power_const(-cc, e) * rf_atom(aid, e)
    out = _frac_power_const(cc, e)
    return out * rf_atom(pbase_atom(prim), e)


def _frac_power_const(c: Fraction, e: Fraction) -> RF:
    if c == 1:
        return RF_ONE
    if c == 0:
        return RF_ZERO
    sign = 1
    if c < 0:
        if e.denominator % 2 == 1:
            sign = 1 if e.numerator % 2 == 0 else -1
            c = -c
        else:
            raise DomainError("even root of a negative constant")
    coeff, extra = _frac_pow_const_parts(c, e)
    return RF._raw(sign * coeff, {extra: 1}, ())


def _unit_rf(aid: int) -> RF:
    return RF._raw(Fraction(1), {((aid, 1),): 1}, ())


def _atom_positive(aid: int, e: Coeff) -> bool:
    """Is atom^e manifestly nonnegative (odd-root semantics)?"""
    kind, payload = _atom_payload[aid]
    if kind == PRIME:
        return True
    if kind == KERN and payload[0] in ("exp", "abs"):
        return True
    return _exp_num(e) % 2 == 0


def _abs_atom_pow(aid: int, e: Coeff) -> RF:
    kind, payload = _atom_payload[aid]
    if kind == KERN and payload[0] == "sgn":
        return RF_ONE
    if _atom_positive(aid, e):
        return rf_atom(aid, e)
    if kind == PBASE:
        return rf_atom(kern_atom("abs", RF._raw(Fraction(1), payload, ())), e)
    return rf_atom(kern_atom("abs", _unit_rf(aid)), e)


def _sgn_atom_pow(aid: int, e: Coeff) -> RF:
    kind, payload = _atom_payload[aid]
    if kind == KERN and payload[0] == "sgn":
        return rf_atom(aid) if _exp_num(e) % 2 else RF_ONE
    if _atom_positive(aid, e):
        return RF_ONE
    if kind == PBASE:
        return rf_atom(kern_atom("sgn", RF._raw(Fraction(1), payload, ())))
    return rf_atom(kern_atom("sgn", _unit_rf(aid)))


def _abs_den_entry(aid: int, e: Coeff) -> tuple:
    """(atom, exponent) for |atom^e| in a denominator; None drops it."""
    kind, payload = _atom_payload[aid]
    if kind == KERN and payload[0] == "sgn":
        return None
    if _atom_positive(aid, e):
        return (aid, e)
    if kind == PBASE:
        return (kern_atom("abs", RF._raw(Fraction(1), payload, ())), e)
    return (kern_atom("abs", _unit_rf(aid)), e)


def _abs_rf(arg: RF) -> RF:
    out = rf_const(abs(arg.c))
    rest = arg.num
    mc = poly_mono_content(rest)
    if mc:
        inv = tuple((aid, _exp_norm(-e)) for aid, e in mc)
        rest = poly_mul(rest, {inv: 1})
        for aid, e in mc:
            out = out * _abs_atom_pow(aid, e)
    if not poly_is_const(rest):
        out = out * rf_atom(kern_atom("abs", RF._raw(Fraction(1), rest, ())))
    elif rest.get(MONE, 1) != 1:
        out = out * rf_const(abs(Fraction(rest[MONE])))
    # denominator factors are wrapped in place (no splice-backs that would
    # reintroduce sign-unknown polynomial factors)
    den_extra = []
    for _k, f, e in arg.den:
        if len(f) == 1:
            (fm, _fc), = f.items()
            for aid, ee in fm:
                entry = _abs_den_entry(aid, _exp_norm(ee * e))
                if entry is not None:
                    fp = {((entry[0], _exp_norm(entry[1])),): 1}
                    den_extra.append((poly_key(fp), fp, 1))
            continue
        aid = kern_atom("abs", RF._raw(Fraction(1), f, ()))
        fp = {((aid, e),): 1}
        den_extra.append((poly_key(fp), fp, 1))
    if den_extra:
        out = RF._raw(out.c, out.num,
                      _den_mul(out.den, tuple(sorted(den_extra))))
    return out


def _sgn_rf(arg: RF) -> RF:
    out = rf_const(Fraction(1 if arg.c > 0 else -1))
    rest = arg.num
    mc = poly_mono_content(rest)
    if mc:
        inv = tuple((aid, _exp_norm(-e)) for aid, e in mc)
        rest = poly_mul(rest, {inv: 1})
        for aid, e in mc:
            out = out * _sgn_atom_pow(aid, e)
    if not poly_is_const(rest):
        out = out * rf_atom(kern_atom("sgn", RF._raw(Fraction(1), rest, ())))
    elif rest.get(MONE, 1) < 0:
        out = -out
    for _k, f, e in arg.den:
        if len(f) == 1:
            (fm, _fc), = f.items()
            for aid, ee in fm:
                out = out * _sgn_atom_pow(aid, _exp_norm(ee * e))
            continue
        if e % 2:
            out = out * rf_atom(kern_atom("sgn", RF._raw(Fraction(1), f, ())))
    return out


def rf_kernel(fn: str, arg: RF) -> RF:
    """Apply a unary kernel.  Only direct composition cancellations plus
    distribution of abs/sgn over monomial factors of known sign."""
    if fn == "abs":
        if arg.is_zero_poly():
            return RF_ZERO
        if arg.is_const():
            return rf_const(abs(arg.const_value()))
        return _abs_rf(arg)
    if fn == "sgn":
        if arg.is_zero_poly():
            return RF_ZERO
        if arg.is_const():
            return rf_const(Fraction(1 if arg.const_value() > 0 else -1))
        return _sgn_rf(arg)
    if fn == "log":
        u = _single_kern_arg(arg, "exp")
        if u is not None:
            return u
        if arg.is_const() and arg.const_value() == 1:
            return RF_ZERO
    if fn == "exp":
        if arg.is_zero_poly():
            return RF_ONE
        u = _single_kern_arg(arg, "log")
        if u is not None:
            return u
    if fn == "atan":
        if arg.is_zero_poly():
            return RF_ZERO
    return rf_atom(kern_atom(fn, arg))


def _single_kern_arg(arg: RF, fn: str) -> Optional[RF]:
    if not arg.den and arg.c == 1 and len(arg.num) == 1:
        (m, c), = arg.num.items()
        if c == 1 and len(m) == 1 and m[0][1] == 1:
            kind, payload = _atom_payload[m[0][0]]
            if kind == KERN and payload[0] == fn:
                return payload[1]
    return None


# ------------------------------------------------------------ differentiation

_datom_cache: dict = {}


def datom_ratio(aid: int, v: int) -> RF:
    """d(atom)/dv divided by the atom itself (closed in the atom span)."""
    key = (aid, v)
    out = _datom_cache.get(key)
    if out is not None:
        return out
    kind, payload = _atom_payload[aid]
    if kind == VAR:
        out = (RF_ONE / rf_var(payload)) if aid == v else RF_ZERO
    elif kind == PRIME:
        out = RF_ZERO
    elif kind == PBASE:
        dfb = dpoly(payload, v)
        out = RF_ZERO if dfb.is_zero_poly() else \
            dfb / RF._raw(Fraction(1), payload, ())
    else:
        fn, arg = payload
        da = drf(arg, v)
        if da.is_zero_poly():
            out = RF_ZERO
        elif fn == "exp":
            out = da
        elif fn == "log":
            out = (da / arg) / rf_atom(aid)
        elif fn == "atan":
            out = (da / (RF_ONE + arg * arg)) / rf_atom(aid)
        elif fn == "abs":
            out = (rf_kernel("sgn", arg) * da) / rf_atom(aid)
        else:  # sgn
            out = RF_ZERO
    _datom_cache[key] = out
    return out


def dpoly(p: dict, v: int) -> RF:
    """Derivative of an integer polynomial with respect to var-atom v."""
    groups: dict = {}
    dens: dict = {}
    for m, c in p.items():
        for aid, e in m:
            ratio = datom_ratio(aid, v)
            if ratio.is_zero_poly():
                continue
            piece = poly_mul({m: c * e * ratio.c}, ratio.num)
            dk = _den_key(ratio.den)
            if dk in groups:
                groups[dk] = poly_add(groups[dk], piece)
            else:
                groups[dk] = piece
                dens[dk] = ratio.den
    total = RF_ZERO
    for dk, numpart in groups.items():
        total = total + _make(Fraction(1), numpart, dens[dk])
    return total


_drf_cache: dict = {}


def drf(rf: RF, v: int) -> RF:
    key = (rf.key(), v)
    out = _drf_cache.get(key)
    if out is not None:
        return out
    dn = dpoly(rf.num, v)
    if rf.den:
        inv_den = RF._raw(Fraction(1), dict(P_ONE), rf.den)
        out = dn * inv_den
        num_rf = RF._raw(Fraction(1), rf.num, ())
        for k, f, e in rf.den:
            dfac = dpoly(f, v)
            if dfac.is_zero_poly():
                continue
            term = num_rf * dfac * inv_den / RF._raw(Fraction(1), f, ())
            out = out + RF._raw(term.c * (-e), term.num, term.den)
    else:
        out = dn
    if rf.c != 1 and not out.is_zero_poly():
        out = RF._raw(out.c * rf.c, out.num, out.den)
    _drf_cache[key] = out
    return out


# ----------------------------------------------------------------- evaluation


def eval_atom(aid: int, env: dict, cache: dict, margin: float) -> float:
    got = cache.get(aid)
    if got is not None:
        return got
    kind, payload = _atom_payload[aid]
    if kind == VAR:
        try:
            val = float(env[payload])
        except KeyError:
            raise DomainError(f"unbound variable {payload!r}")
    elif kind == PRIME:
        if isinstance(payload, int) and payload >= 10 ** 11:
            val = (payload // 10 ** 12) / (payload % 10 ** 12)
        else:
            val = float(payload)
    elif kind == PBASE:
        val = eval_poly(payload, env, cache, margin)
    else:
        fn, arg = payload
        u = eval_rf(arg, env, cache, margin)
        if fn == "exp":
            if u > 700:
                raise DomainError("exp overflow")
            val = math.exp(u)
        elif fn == "log":
            if u <= 0:
                raise DomainError("log of non-positive value")
            val = math.log(u)
        elif fn == "atan":
            val = math.atan(u)
        elif fn == "abs":
            val = abs(u)
        else:
            val = 0.0 if u == 0 else math.copysign(1.0, u)
    cache[aid] = val
    return val


def real_power(base: float, e: Coeff) -> float:
    if _exp_den(e) == 1:
        return base ** int(e)
    if base > 0:
        return base ** float(e)
    if base == 0:
        if e > 0:
            return 0.0
        raise SingularPointError("zero base with negative exponent")
    if e.denominator % 2 == 1:
        mag = (-base) ** float(e)
        return -mag if e.numerator % 2 else mag
    raise DomainError("even root of a negative value")


def eval_mono(m: tuple, env: dict, cache: dict, margin: float) -> float:
    out = 1.0
    for aid, e in m:
        out *= real_power(eval_atom(aid, env, cache, margin), e)
    return out


def eval_poly(p: dict, env: dict, cache: dict, margin: float) -> float:
    total = 0.0
    for m, c in p.items():
        total += c * eval_mono(m, env, cache, margin)
    return total


def eval_poly_mass(p: dict, env: dict, cache: dict, margin: float) -> tuple:
    total = 0.0
    mass = 0.0
    for m, c in p.items():
        t = c * eval_mono(m, env, cache, margin)
        total += t
        mass += abs(t)
    return total, mass


def _eval_den(rf: RF, env: dict, cache: dict, margin: float) -> float:
    dv = 1.0
    for _k, f, e in rf.den:
        fv, fmass = eval_poly_mass(f, env, cache, margin)
        if abs(fv) <= margin * (1.0 + fmass):
            raise SingularPointError("denominator factor vanishes at point")
        dv *= fv ** e
    if dv == 0.0 or math.isinf(dv):
        raise SingularPointError("denominator under/overflow at point")
    return dv


def eval_rf(rf: RF, env: dict, cache: dict, margin: float) -> float:
    dv = _eval_den(rf, env, cache, margin)
    nv = eval_poly(rf.num, env, cache, margin)
    return float(rf.c) * nv / dv


def eval_rf_residual(rf: RF, env: dict, cache: dict, margin: float) -> float:
    """Relative residual of the numerator: |num| / (1 + sum |num terms|)."""
    _eval_den(rf, env, cache, margin)
    nv, nmass = eval_poly_mass(rf.num, env, cache, margin)
    return abs(nv) / (1.0 + nmass)


def eval_rf_conditioned(rf: RF, env: dict, cache: dict, margin: float,
                        cond: float = 1e-9) -> float:
    """Like eval_rf but rejects points where catastrophic cancellation
    leaves fewer than ~ -log10(cond) trustworthy digits."""
    dv = _eval_den(rf, env, cache, margin)
    nv, nmass = eval_poly_mass(rf.num, env, cache, margin)
    if nv != 0.0 and abs(nv) < cond * nmass:
        raise SingularPointError("ill-conditioned evaluation point")
    return float(rf.c) * nv / dv


# -------------------------------------------- forward-mode dual evaluation


def eval_atom_d(aid: int, v: str, env: dict, cache: dict,
                margin: float) -> tuple:
    """(value, d value / d v) for one atom."""
    got = cache.get(aid)
    if got is not None:
        return got
    kind, payload = _atom_payload[aid]
    if kind == VAR:
        out = (float(env[payload]), 1.0 if payload == v else 0.0)
    elif kind == PRIME:
        if isinstance(payload, int) and payload >= 10 ** 11:
            out = ((payload // 10 ** 12) / (payload % 10 ** 12), 0.0)
        else:
            out = (float(payload), 0.0)
    elif kind == PBASE:
        val, dval, _dm, _vm = eval_poly_d(payload, v, env, cache, margin)
        out = (val, dval)
    else:
        fn, arg = payload
        u, du = eval_rf_d(arg, v, env, cache, margin)
        if fn == "exp":
            if u > 700:
                raise DomainError("exp overflow")
            val = math.exp(u)
            out = (val, val * du)
        elif fn == "log":
            if u <= 0:
                raise DomainError("log of non-positive value")
            out = (math.log(u), du / u)
        elif fn == "atan":
            out = (math.atan(u), du / (1.0 + u * u))
        elif fn == "abs":
            out = (abs(u), math.copysign(1.0, u) * du if u != 0 else 0.0)
        else:
            out = (0.0 if u == 0 else math.copysign(1.0, u), 0.0)
    cache[aid] = out
    return out


def eval_poly_d(p: dict, v: str, env: dict, cache: dict,
                margin: float) -> tuple:
    """(value, derivative, derivative-term mass) of a polynomial."""
    total = 0.0
    dtotal = 0.0
    dmass = 0.0
    vmass = 0.0
    for m, c in p.items():
        val = 1.0
        datoms = []
        for aid, e in m:
            av, adv = eval_atom_d(aid, v, env, cache, margin)
            pw = real_power(av, e)
            val *= pw
            if adv:
                if av == 0.0:
                    raise SingularPointError("zero base in dual evaluation")
                datoms.append(float(e) * adv / av)
        term = c * val
        total += term
        vmass += abs(term)
        dterm = term * sum(datoms) if datoms else 0.0
        dtotal += dterm
        dmass += sum(abs(term * d) for d in datoms) if datoms else 0.0
    return total, dtotal, dmass, vmass


def eval_rf_d(rf: RF, v: str, env: dict, cache: dict,
              margin: float) -> tuple:
    nval, ndval, _dm, _vm = eval_poly_d(rf.num, v, env, cache, margin)
    dv = 1.0
    dlog = 0.0
    for _k, f, e in rf.den:
        fval, fdval, _fdm, fmass = eval_poly_d(f, v, env, cache, margin)
        if abs(fval) <= margin * (1.0 + fmass):
            raise SingularPointError("denominator factor vanishes at point")
        dv *= fval ** e
        dlog += e * fdval / fval
    if dv == 0.0 or math.isinf(dv):
        raise SingularPointError("denominator under/overflow at point")
    c = float(rf.c)
    val = c * nval / dv
    dval = c * ndval / dv - val * dlog
    return val, dval


def eval_rf_d_residual(rf: RF, v: str, env: dict, cache: dict,
                       margin: float) -> float:
    """Relative residual of d(rf)/dv at a point."""
    nval, ndval, nmass, _nvm = eval_poly_d(rf.num, v, env, cache, margin)
    dlog = 0.0
    dmass = 0.0
    for _k, f, e in rf.den:
        fval, fdval, _fdm, fmass = eval_poly_d(f, v, env, cache, margin)
        if abs(fval) <= margin * (1.0 + fmass):
            raise SingularPointError("denominator factor vanishes at point")
        dlog += e * fdval / fval
        dmass += abs(e * fdval / fval)
    t = ndval - nval * dlog
    scale = 1.0 + nmass + abs(nval) * dmass + abs(nval) + abs(ndval)
    return abs(t) / scale


def eval_rf_dual(rf: RF, v: Optional[str], env: dict, cache: dict,
                 margin: float) -> tuple:
    """(value, dvalue, value-mass, dvalue-mass) for rf at a point."""
    if v is None:
        dv = _eval_den(rf, env, cache, margin)
        nv, nmass = eval_poly_mass(rf.num, env, cache, margin)
        c = float(rf.c)
        return c * nv / dv, 0.0, abs(c) * nmass / abs(dv), 0.0
    nval, ndval, ndmass, nmass = eval_poly_d(rf.num, v, env, cache, margin)
    dv = 1.0
    dlog = 0.0
    dlog_mass = 0.0
    for _k, f, e in rf.den:
        fval, fdval, _fdm, fmass = eval_poly_d(f, v, env, cache, margin)
        if abs(fval) <= margin * (1.0 + fmass):
            raise SingularPointError("denominator factor vanishes at point")
        dv *= fval ** e
        dlog += e * fdval / fval
        dlog_mass += abs(e * fdval / fval)
    if dv == 0.0 or math.isinf(dv):
        raise SingularPointError("denominator under/overflow at point")
    c = float(rf.c)
    val = c * nval / dv
    dval = c * ndval / dv - val * dlog
    mass = abs(c) * nmass / abs(dv)
    dmass = abs(c) * ndmass / abs(dv) + (abs(val) + mass) * dlog_mass \
        + mass * abs(dlog)
    return val, dval, mass, dmass


def rf_signed_atoms(rf: RF) -> set:
    """Arguments of abs/sgn kernels occurring anywhere inside rf."""
    seen: set = set()
    out: set = set()

    def walk_poly(p):
        for m in p:
            for aid, _ in m:
                walk_atom(aid)

    def walk_atom(aid):
        if aid in seen:
            return
        seen.add(aid)
        kind, payload = _atom_payload[aid]
        if kind == KERN:
            fn, arg = payload
            if fn in ("abs", "sgn"):
                out.add(arg)
            walk_rf(arg)
        elif kind == PBASE:
            walk_poly(payload)

    def walk_rf(r):
        walk_poly(r.num)
        for _k, f, _e in r.den:
            walk_poly(f)

    walk_rf(rf)
    return out
