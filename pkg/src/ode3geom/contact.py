"""Contact-equivalence pipeline: branch detection, the five-dimensional
basic functions, the fully reduced coframe invariants, the large-symmetry
table, linearizability, and contact-projective data."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction as F3
from typing import Optional

from .classify import (ClassificationResult, InconclusiveError, const_value,
                       exact_const, is_constant, require, snap_rational,
                       tuples_match)
from .expr import (DEFAULT_CONFIG, Expr, ZeroConfig, abs_, atan, exp, is_zero,
                   normalize, num, pow_, sign_on_domain, var)
from .forms import Coframe, OneForm, d, decompose, decompose_many
from .jet import (Ode3, WunschmannZeroError, jet_invariants, pd, pdl,
                  total_derivative, total_derivative_tree)

TRIVIAL_FLAT = "trivial-flat"
W0_FQQQQ = "W0-Fqqqq"
W_NONZERO = "Wnonzero"

CBRT6_OVER_3 = 6.0 ** (1.0 / 3.0) / 3.0


class NotApplicableError(ArithmeticError):
    pass


@dataclass(frozen=True)
class BranchResult:
    branch: str
    w_verdict: object
    fqqqq_verdict: object


def contact_branch(ode: Ode3,
                   config: ZeroConfig = DEFAULT_CONFIG) -> BranchResult:
    """trivial-flat iff W = 0 and F_qqqq = 0 (contact equivalent to y'''=0)."""
    inv = jet_invariants(ode, config)
    wv = inv.w_verdict
    fv = is_zero(pd(ode.F, "q", "q", "q", "q"), config=config)
    if wv.status == "inconclusive" or fv.status == "inconclusive":
        raise InconclusiveError("contact branch verdicts inconclusive")
    if wv.is_zero:
        return BranchResult(TRIVIAL_FLAT if fv.is_zero else W0_FQQQQ, wv, fv)
    return BranchResult(W_NONZERO, wv, fv)


# --------------------------------------------------- five-dimensional layer


@dataclass(frozen=True)
class ContactInvariants5d:
    """Basic functions of the five-dimensional reduction at u = 1.

    The u-weights are (a, b, e, h, k) -> (0, -1, -1, -1, -2)."""

    a: Expr
    b: Expr
    e: Expr
    h: Expr
    k: Expr
    a_constant: bool
    u_weights: tuple = (0, -1, -1, -1, -2)


def _z_data(ode: Ode3) -> tuple:
    """(Z, DZ) for the W != 0 reductions, cached as unexpanded trees."""
    def build():
        W = jet_invariants(ode).W
        Z = total_derivative_tree(W, ode) / W - pdl(ode.F, "q")
        return Z, total_derivative_tree(Z, ode)
    return ode.cached("z_data", build)


def bas_a(ode: Ode3) -> Expr:
    def build():
        inv = jet_invariants(ode)
        Z, DZ = _z_data(ode)
        Fq = pd(ode.F, "q")
        return (inv.K + Z * Z / 18 + Z * Fq / 9 - DZ / 3) \
            / pow_(inv.W, F3(2, 3))
    return ode.cached("bas_a", build)


def omega_section(ode: Ode3) -> OneForm:
    """The fifth reduced form at the section u = 1."""
    F = ode.F
    W = jet_invariants(ode).W
    Z, DZ = _z_data(ode)
    Fq = pd(F, "q")
    Wq, Wp = pd(W, "q"), pd(W, "p")
    w1, w2, w3, w4 = _plain_omegas(ode)
    c1 = normalize((Wq * DZ / 9 - Wq * Z * Z / 27 + Wp * Z / 9) / W
                   - pdl(Z, "p") / 3 - Fq * pdl(Z, "q") / 9)
    c2 = normalize(Wp / (3 * W) - pdl(Z, "q") / 3)
    c3 = normalize(Wq / (3 * W))
    c4 = normalize(Fq / 3)
    return (c1 * w1 + c2 * w2 + c3 * w3 + c4 * w4).normalized()


def _dtheta3_slots(ode: Ode3, config: ZeroConfig = DEFAULT_CONFIG) -> tuple:
    """Structure coefficients of d(theta^3) - Omega ^ theta^3 at u = 1.

    In lexicographic slot order these are (b, c, -1, e, a, 0); reading b
    off the structure equation keeps the identity "a constant and k = 0
    force b = 0" exact, which closed forms for b tend to break.
    """
    def build():
        from .forms import wedge
        cof = nonwunschmann_coframe(ode, num(1))
        om = omega_section(ode)
        B = d(cof.theta[2]) - wedge(om, cof.theta[2])
        return decompose(B, cof, config)
    return ode.cached("dtheta3_slots", build)


def bas_b(ode: Ode3) -> Expr:
    def build():
        return _dtheta3_slots(ode)[PAIR[(1, 2)]]
    return ode.cached("bas_b", build)


def bas_e(ode: Ode3) -> Expr:
    def build():
        F = ode.F
        W = jet_invariants(ode).W
        Z, _DZ = _z_data(ode)
        Wq = pd(W, "q")
        return pd(F, "q", "q") / 3 \
            + (F3(2, 9) * Wq * Z - F3(2, 3) * pd(W, "p")
               - F3(2, 9) * Wq * pd(F, "q")) / W
    return ode.cached("bas_e", build)


def bas_h(ode: Ode3) -> Expr:
    def build():
        F = ode.F
        W = jet_invariants(ode).W
        Z, DZ = _z_data(ode)
        Wq = pd(W, "q")
        return ((Wq * Z * Z / 9 - pd(W, "p") * Z / 3 + pd(W, "y")
                 - Wq * DZ / 3) / W
                + total_derivative_tree(pdl(Z, "q"), ode)
                + pd(F, "q") * pdl(Z, "q") / 3) \
            / (3 * pow_(W, F3(1, 3)))
    return ode.cached("bas_h", build)


def bas_k(ode: Ode3) -> Expr:
    def build():
        W = jet_invariants(ode).W
        Wq = pd(W, "q")
        return (F3(2, 9) * Wq * Wq / W - pd(W, "q", "q") / 3) \
            / pow_(W, F3(1, 3))
    return ode.cached("bas_k", build)


def _basfun_5d(ode: Ode3) -> tuple:
    return (bas_a(ode), bas_b(ode), bas_e(ode), bas_h(ode), bas_k(ode))


def invariants_5d(ode: Ode3,
                  config: ZeroConfig = DEFAULT_CONFIG) -> ContactInvariants5d:
    br = contact_branch(ode, config)
    if br.branch != W_NONZERO:
        raise WunschmannZeroError("five-dimensional reduction needs W != 0")
    a, b, e, h, k = _basfun_5d(ode)
    return ContactInvariants5d(a=a, b=b, e=e, h=h, k=k,
                               a_constant=is_constant(a, config))


# ------------------------------------------------------ reduced coframes


def _plain_omegas(ode: Ode3) -> tuple:
    p, q = var("p"), var("q")
    w1 = OneForm(-p, num(1), num(0), num(0))
    w2 = OneForm(-q, num(0), num(1), num(0))
    w3 = OneForm(normalize(-ode.F), num(0), num(0), num(1))
    w4 = OneForm(num(1), num(0), num(0), num(0))
    return w1, w2, w3, w4


def _u_nonwunschmann(ode: Ode3, case: int) -> Expr:
    """The last group-parameter substitution for reduction case 1..4."""
    W = jet_invariants(ode).W
    if case == 1:
        X = normalize(F3(2, 9) * pd(W, "q") ** 2 / W - pd(W, "q", "q") / 3)
        return normalize(pow_(abs_(W), F3(-1, 6)) * pow_(abs_(X), F3(1, 2)))
    if case == 2:
        return bas_e(ode)
    if case == 3:
        return bas_h(ode)
    return bas_b(ode)


def nonwunschmann_coframe(ode: Ode3, u: Expr) -> Coframe:
    """The reduced contact coframe on J^2 for W != 0."""
    inv = jet_invariants(ode)
    K, W = inv.K, inv.W
    F = ode.F
    Z = normalize(total_derivative(W, ode) / W - pd(F, "q"))
    w1, w2, w3, w4 = _plain_omegas(ode)
    cbw = pow_(W, F3(1, 3))
    cbw2 = pow_(W, F3(2, 3))
    th1 = (normalize(u * cbw)) * w1
    th2 = (normalize(u * Z / 3)) * w1 + u * w2
    th3 = (normalize(u / cbw * (K + Z * Z / 18))) * w1 \
        + (normalize(u / cbw * (Z - pd(F, "q")) / 3)) * w2 \
        + (normalize(u / cbw)) * w3
    th4 = (normalize(pd(W, "q") * Z / (9 * cbw2) - cbw * pd(Z, "q") / 3)) * w1 \
        + (normalize(pd(W, "q") / (3 * cbw2))) * w2 \
        + cbw * w4
    return Coframe((th1.normalized(), th2.normalized(),
                    th3.normalized(), th4.normalized()))


def _u_w4d(ode: Ode3, config: ZeroConfig) -> tuple:
    """Reduction case and u for the branch W = 0, F_qqqq != 0."""
    F = ode.F
    inv = jet_invariants(ode)
    K, L = inv.K, inv.L
    Fq4 = pd(F, "q", "q", "q", "q")
    Kqqq = pd(K, "q", "q", "q")
    Lqq = pd(L, "q", "q")
    disc1 = normalize(2 * Lqq * Fq4 - 3 * Kqqq * Kqqq)
    if require(is_zero(disc1, config=config), "W4d case-1 discriminant") is False:
        u = normalize(pow_(9 * Lqq - F3(27, 2) * Kqqq * Kqqq / Fq4, F3(1, 3)))
        return 1, u, disc1
    Fq5 = pd(F, "q", "q", "q", "q", "q")
    disc2 = normalize(5 * pd(F, "q", "q", "q", "q", "q", "q") * Fq4
                      - 6 * Fq5 * Fq5)
    if require(is_zero(disc2, config=config), "W4d case-2 discriminant") is False:
        u = normalize(25 * Fq4 ** 3 / disc2)
        return 2, u, disc1
    u = normalize(pd(F, "q", "q") / 3
                  + (F3(18, 5) * pd(K, "q", "q", "q", "q")
                     + F3(2, 5) * pd(F, "q", "q", "q", "q", "p")
                     + F3(2, 15) * pd(F, "q") * Fq5) / Fq4
                  - F3(12, 5) * Fq5 * Kqqq / (Fq4 * Fq4))
    if require(is_zero(u, config=config), "W4d case-3 quantity"):
        raise NotApplicableError("all W4d reduction quantities vanish")
    return 3, u, disc1


def w4d_coframe(ode: Ode3, u: Expr) -> Coframe:
    inv = jet_invariants(ode)
    K = inv.K
    F = ode.F
    Fq4 = pd(F, "q", "q", "q", "q")
    Fq5 = pd(F, "q", "q", "q", "q", "q")
    Kqqq = pd(K, "q", "q", "q")
    w1, w2, w3, w4 = _plain_omegas(ode)
    root = pow_(abs_(normalize(u / Fq4)), F3(1, 2))
    inv_root = pow_(abs_(normalize(Fq4 / u)), F3(1, 2))
    th1 = (normalize(u * u * root)) * w1
    th2 = (normalize(-3 * u * Kqqq / Fq4)) * w1 + u * w2
    th3 = (normalize(inv_root * (K + F3(9, 2) * Kqqq ** 2 / Fq4 ** 2))) * w1 \
        + (normalize(-inv_root * (pd(F, "q") / 3 + 3 * Kqqq / Fq4))) * w2 \
        + inv_root * w3
    th4 = (normalize(u * root * (3 * pd(K, "q", "q", "q", "q") / Fq4
                                 - F3(12, 5) * Fq5 * Kqqq / Fq4 ** 2))) * w1 \
        + (normalize(-u * root * Fq5 / (5 * Fq4))) * w2 \
        + (normalize(u * root)) * w4
    return Coframe((th1.normalized(), th2.normalized(),
                    th3.normalized(), th4.normalized()))


@dataclass(frozen=True)
class ContactCoframeInvariants:
    branch: str
    case: int
    eps: int                 # epsilon_1 (W != 0) or epsilon_2 (W = 0)
    I: dict                  # {"I1": Expr, ...} per branch
    slots: dict              # all decomposed structure coefficients
    constancy: dict          # name -> bool
    diagnostics: dict = field(default_factory=dict)


def _decompose_all(cof: Coframe, config: ZeroConfig) -> list:
    return decompose_many([d(th) for th in cof.theta], cof, config)


def _check_slot(slots, i, pair, want, config, label):
    got = slots[i][pair]
    v = is_zero(got - num(want), config=config)
    if not v.is_zero:
        raise ArithmeticError(
            f"coframe self-check failed: {label} is {v.status}")


PAIR = {(1, 2): 0, (1, 3): 1, (1, 4): 2, (2, 3): 3, (2, 4): 4, (3, 4): 5}


def invariants_reduced(ode: Ode3, config: ZeroConfig = DEFAULT_CONFIG
                       ) -> ContactCoframeInvariants:
    br = contact_branch(ode, config)
    if br.branch == TRIVIAL_FLAT:
        raise NotApplicableError("trivial-flat: no reduced coframe")
    if br.branch == W_NONZERO:
        case = 0
        for idx, builder in ((1, bas_k), (2, bas_e), (3, bas_h), (4, bas_b)):
            if not require(is_zero(builder(ode), config=config),
                           f"reduction case {idx}"):
                case = idx
                break
        if case == 0:
            raise NotApplicableError(
                "b = e = h = k = 0: linearizable, no coframe reduction")
        u = _u_nonwunschmann(ode, case)
        cof = nonwunschmann_coframe(ode, u)
        slots = _decompose_all(cof, config)
        _check_slot(slots, 0, PAIR[(2, 4)], -1, config, "dtheta1@24")
        _check_slot(slots, 1, PAIR[(3, 4)], -1, config, "dtheta2@34")
        _check_slot(slots, 2, PAIR[(1, 4)], -1, config, "dtheta3@14")
        I = {"I1": slots[0][PAIR[(1, 3)]], "I2": slots[0][PAIR[(1, 4)]],
             "I3": slots[1][PAIR[(1, 4)]], "I4": slots[2][PAIR[(2, 3)]]}
        eps_expr = slots[3][PAIR[(2, 3)]]
        if require(is_zero(eps_expr, config=config), "epsilon1 slot"):
            eps = 0
        else:
            eps = sign_on_domain(eps_expr, config=config)
        W = jet_invariants(ode).W
        Wq = pd(W, "q")
        eps_direct = normalize(2 * Wq * Wq - 3 * W * pd(W, "q", "q"))
        dv = is_zero(eps_direct, config=config)
        eps_formula = 0 if dv.is_zero else sign_on_domain(eps_direct,
                                                          config=config)
        slots_named = _name_slots(slots)
        constancy = {nm: is_constant(ex, config) for nm, ex in I.items()}
        return ContactCoframeInvariants(
            branch=W_NONZERO, case=case, eps=eps, I=I, slots=slots_named,
            constancy=constancy,
            diagnostics={"eps1_sign_formula": eps_formula})
    # W = 0, F_qqqq != 0
    case, u, disc1 = _u_w4d(ode, config)
    cof = w4d_coframe(ode, u)
    slots = _decompose_all(cof, config)
    _check_slot(slots, 0, PAIR[(2, 4)], -1, config, "dtheta1@24")
    _check_slot(slots, 1, PAIR[(3, 4)], -1, config, "dtheta2@34")
    I = {"I5": slots[0][PAIR[(1, 3)]], "I6": slots[0][PAIR[(1, 4)]],
         "I7": slots[2][PAIR[(2, 3)]], "I8": slots[3][PAIR[(2, 3)]]}
    eps_expr = slots[1][PAIR[(1, 4)]]
    if require(is_zero(eps_expr, config=config), "epsilon2 slot"):
        eps = 0
    else:
        eps = sign_on_domain(eps_expr, config=config)
    dv = is_zero(disc1, config=config)
    eps_sq = 0 if dv.is_zero else sign_on_domain(disc1, config=config)
    F = ode.F
    K = jet_invariants(ode).K
    cubed = normalize(2 * pd(F, "q", "q", "q", "q") * pd(jet_invariants(ode).L, "q", "q")
                      - 3 * pd(K, "q", "q", "q") ** 3)
    cv = is_zero(cubed, config=config)
    eps_cubed = 0 if cv.is_zero else sign_on_domain(cubed, config=config)
    slots_named = _name_slots(slots)
    constancy = {nm: is_constant(ex, config) for nm, ex in I.items()}
    return ContactCoframeInvariants(
        branch=W0_FQQQQ, case=case, eps=eps, I=I, slots=slots_named,
        constancy=constancy,
        diagnostics={"eps2_sign_squared": eps_sq,
                     "eps2_sign_cubed_variant": eps_cubed})


def _name_slots(slots) -> dict:
    names = ("dtheta1", "dtheta2", "dtheta3", "dtheta4")
    pairs = ("12", "13", "14", "23", "24", "34")
    return {f"{nm}@{pr}": slots[i][j]
            for i, nm in enumerate(names) for j, pr in enumerate(pairs)}


# ---------------------------------------------------------- classification


def _lin_check(ode: Ode3, config: ZeroConfig):
    """All of b, e, h, k zero?  Checked cheapest-first with early exit."""
    for nm, builder in (("k", bas_k), ("e", bas_e), ("h", bas_h),
                        ("b", bas_b)):
        if not require(is_zero(builder(ode), config=config), nm):
            return False
    return True


def _mu_of_x(a: Expr, config: ZeroConfig) -> bool:
    from .expr import partial_is_zero
    return all(require(partial_is_zero(a, v, config=config), f"a_{v}")
               for v in ("y", "p", "q"))


def classify_contact(ode: Ode3,
                     config: ZeroConfig = DEFAULT_CONFIG) -> ClassificationResult:
    try:
        return _classify_contact(ode, config)
    except InconclusiveError as exc:
        return ClassificationResult(group="contact", row="general",
                                    inconclusive=True,
                                    diagnostics={"reason": str(exc)})


def _classify_contact(ode: Ode3, config: ZeroConfig) -> ClassificationResult:
    br = contact_branch(ode, config)
    if br.branch == TRIVIAL_FLAT:
        return ClassificationResult(
            group="contact", row="I", dimension=10,
            evidence=["W=0", "F_qqqq=0"])
    if br.branch == W_NONZERO:
        allz = _lin_check(ode, config)
        a = bas_a(ode)
        if allz:
            if is_constant(a, config):
                mu = exact_const(a)
                if mu is None:
                    mv = const_value(a, config)
                    mu = snap_rational(mv) or mv
                return ClassificationResult(
                    group="contact", row="II", dimension=5,
                    parameters={"mu": mu},
                    evidence=["W!=0", "b=e=h=k=0", "a constant"])
            return ClassificationResult(
                group="contact", row="III", dimension=4,
                parameters={"mu_of_x": normalize(a)},
                evidence=["W!=0", "b=e=h=k=0", "a nonconstant"],
                diagnostics={"a_is_x_only": _mu_of_x(a, config)})
        red = invariants_reduced(ode, config)
        if not all(red.constancy.values()):
            return ClassificationResult(
                group="contact", row="general",
                evidence=[f"case {red.case} reduction"],
                diagnostics={"constancy": red.constancy})
        i1 = const_value(red.I["I1"], config)
        vals = {nm: const_value(ex, config) for nm, ex in red.I.items()}
        if red.eps == 0 or abs(i1) < 1e-9:
            return ClassificationResult(
                group="contact", row="general",
                diagnostics={"reason": "no large-symmetry solution branch",
                             "eps1": red.eps, **vals})
        t = 1.0 + 4.0 * red.eps / (i1 * i1)
        if red.eps == -1 and abs(t) <= 1e-9 and abs(i1 + 2) <= 1e-7:
            row, mu, rep = "VI", None, Ode3.from_text("exp(q)")
        elif t > 1e-9:
            row, mu = "IV", t
            alpha = snap_rational(1.5 + 1.0 / (2.0 * math.sqrt(mu)))
            rep = Ode3(pow_(var("q"), alpha)) if alpha is not None else None
        elif red.eps == -1 and t < -1e-9:
            row, mu = "V", -t
            nu = snap_rational(1.0 / math.sqrt(mu))
            rep = Ode3(pow_(var("q") ** 2 + 1, F3(3, 2))
                       * exp(num(nu) * atan(var("q")))) if nu is not None \
                else None
        else:
            return ClassificationResult(
                group="contact", row="general",
                diagnostics={"reason": "invariants off every table row",
                             "eps1": red.eps, **vals})
        result = ClassificationResult(
            group="contact", row=row, dimension=4,
            evidence=[f"eps1={red.eps}", f"I1={i1:.9g}"],
            diagnostics=dict(vals))
        if mu is not None:
            msnap = snap_rational(mu)
            result.parameters["mu"] = msnap if msnap is not None else mu
        if rep is not None:
            ok = _verify_against_rep(red, rep, config)
            result.diagnostics["tuple_verified"] = ok
            if not ok:
                result.row = "general"
                result.dimension = None
                result.diagnostics["reason"] = \
                    "candidate tuple differs from canonical representative"
        return result
    # W = 0, F_qqqq != 0
    red = invariants_reduced(ode, config)
    if not all(red.constancy.values()):
        return ClassificationResult(
            group="contact", row="general",
            evidence=[f"case {red.case} reduction (W=0)"],
            diagnostics={"constancy": red.constancy})
    vals = {nm: const_value(ex, config) for nm, ex in red.I.items()}
    i7, i8 = vals["I7"], vals["I8"]
    eps = red.eps
    row = None
    mu = None
    rep = None
    y, p, q = var("y"), var("p"), var("q")
    if eps != 0 and abs(i7 - CBRT6_OVER_3) <= 1e-7:
        row = "XI" if eps == 1 else "XII"
        rep = Ode3(pow_(q * q + 1, F3(3, 2))) if row == "XI" \
            else Ode3(pow_(q, F3(3, 2)))
    elif eps == 0:
        # degenerate discriminant: the mu = 1 members of rows VIII / X
        if abs(i8 - 1) <= 1e-7:
            row, mu = "VIII", 1.0
            rep = Ode3(pow_(2 * q * y - p * p, F3(3, 2)) / (y * y))
        elif abs(i8 + 1) <= 1e-7:
            row, mu = "X", 1.0
            rep = Ode3(pow_(q * q / (p * p) + p * p, F3(3, 2))
                       + 3 * q * q / p + p ** 3)
    else:
        denom = 9 * i7 ** 3 - 2
        mu = math.sqrt(abs(9 * i7 ** 3 / denom)) if abs(denom) > 1e-12 \
            else None
        if mu is not None:
            ms = snap_rational(mu)
            mex = num(ms) if ms is not None else None
            if eps == 1 and 0 < i7 < CBRT6_OVER_3:
                row = "VII"
                if mex is not None:
                    rep = Ode3(normalize(
                        mex * pow_(q * q / (1 - p * p) - p * p + 1, F3(3, 2))
                        - 3 * q * q * p / (1 - p * p) + p ** 3 - p * p))
            elif eps == -1 and 0 < i7 < CBRT6_OVER_3:
                row = "IX"
                if mex is not None:
                    rep = Ode3(normalize(
                        4 * mex * pow_(q - p * p, F3(3, 2))
                        + 6 * q * p - 4 * p ** 3))
            elif (eps == 1 and i7 < 0) or (eps == -1 and i7 > CBRT6_OVER_3):
                row = "VIII"
                if mex is not None:
                    rep = Ode3(normalize(mex * pow_(2 * q * y - p * p,
                                                    F3(3, 2)) / (y * y)))
            elif (eps == -1 and i7 < 0) or (eps == 1 and i7 > CBRT6_OVER_3):
                row = "X"
                if mex is not None:
                    rep = Ode3(normalize(
                        mex * pow_(q * q / (p * p) + p * p, F3(3, 2))
                        + 3 * q * q / p + p ** 3))
    if row is None:
        return ClassificationResult(
            group="contact", row="general",
            diagnostics={"reason": "W=0 invariants off every table row",
                         "eps2": eps, **vals})
    result = ClassificationResult(
        group="contact", row=row, dimension=4,
        evidence=[f"eps2={eps}", f"I7={i7:.9g}", f"I8={i8:.9g}"],
        diagnostics=dict(vals))
    if mu is not None:
        ms = snap_rational(mu)
        result.parameters["mu"] = ms if ms is not None else mu
    if rep is not None:
        ok = _verify_against_rep(red, rep, _rep_config(row, config))
        result.diagnostics["tuple_verified"] = ok
        if not ok:
            result.row = "general"
            result.dimension = None
            result.diagnostics["reason"] = \
                "candidate tuple differs from canonical representative"
    return result


def _rep_config(row: str, config: ZeroConfig) -> ZeroConfig:
    """Sample boxes keeping canonical representatives real and guarded."""
    from dataclasses import replace
    box = dict(config.box)
    if row == "VIII":
        box.update(y=(0.8, 1.0), p=(0.5, 0.7), q=(1.2, 2.0))
    elif row == "VII":
        box.update(p=(0.5, 0.8))
    elif row == "IX":
        box.update(p=(0.5, 0.9), q=(1.2, 2.0))
    return replace(config, box=box)


def _verify_against_rep(red: ContactCoframeInvariants, rep: Ode3,
                        config: ZeroConfig) -> bool:
    """Full-tuple comparison against the canonical representative."""
    try:
        rred = invariants_reduced(rep, config)
    except (ArithmeticError, InconclusiveError):
        return False
    if rred.eps != red.eps:
        return False
    mine = [const_value(red.I[nm], config) for nm in sorted(red.I)]
    try:
        theirs = [const_value(rred.I[nm], config) for nm in sorted(rred.I)]
    except (ArithmeticError, InconclusiveError):
        return False
    return tuples_match(mine, theirs)


# ---------------------------------------------------------- linearizability


@dataclass(frozen=True)
class LinearizableResult:
    status: str                      # "no" | "constant" | "mu_of_x"
    mu: Optional[object] = None      # Fraction/float or Expr descriptor

    @property
    def linearizable(self) -> bool:
        return self.status != "no"


def linearizable_contact(ode: Ode3, config: ZeroConfig = DEFAULT_CONFIG
                         ) -> LinearizableResult:
    br = contact_branch(ode, config)
    if br.branch == TRIVIAL_FLAT:
        return LinearizableResult(status="constant", mu=F3(0))
    if br.branch == W0_FQQQQ:
        return LinearizableResult(status="no")
    if not _lin_check(ode, config):
        return LinearizableResult(status="no")
    a = bas_a(ode)
    if is_constant(a, config):
        mu = exact_const(a)
        if mu is None:
            mv = const_value(a, config)
            mu = snap_rational(mv) or mv
        return LinearizableResult(status="constant", mu=mu)
    return LinearizableResult(status="mu_of_x", mu=normalize(a))


# ----------------------------------------------------- contact projective


def contact_projective_data(ode: Ode3,
                            config: ZeroConfig = DEFAULT_CONFIG) -> tuple:
    """Cubic coefficients (a3, a2, a1, a0) of F in q when F_qqqq = 0."""
    F = ode.F
    v = is_zero(pd(F, "q", "q", "q", "q"), config=config)
    if not require(v, "F_qqqq"):
        raise NotApplicableError(
            "no contact-projective structure: F_qqqq != 0")
    q = var("q")
    a3 = normalize(pd(F, "q", "q", "q") / 6)
    a2 = normalize((pd(F, "q", "q") - 6 * a3 * q) / 2)
    a1 = normalize(pd(F, "q") - 3 * a3 * q * q - 2 * a2 * q)
    a0 = normalize(F - a3 * q ** 3 - a2 * q * q - a1 * q)
    return a3, a2, a1, a0
