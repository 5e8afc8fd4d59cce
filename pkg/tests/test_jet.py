"""Total derivative and the scalar invariants K, L, M, W, Z."""
import random
from fractions import Fraction

import pytest

from ode3geom.expr import is_zero, normalize, num, parse, partial, var
from ode3geom.jet import (Ode3, VectorField, WunschmannZeroError,
                          frame_derivative, jet_invariants, pd,
                          total_derivative, zee)

Y, P, Q = var("y"), var("p"), var("q")


class TestTotalDerivative:
    def test_definition(self):
        ode = Ode3.from_text("exp(q)")
        assert is_zero(total_derivative(Y, ode) - P).is_zero
        assert is_zero(total_derivative(Q, ode) - ode.F).is_zero

    def test_dfq_exp(self):
        ode = Ode3.from_text("exp(q)")
        out = total_derivative(pd(ode.F, "q"), ode)
        assert is_zero(out - parse("exp(q)^2")).is_zero

    def test_leibniz_randomized(self):
        rng = random.Random(31)
        ode = Ode3.from_text("q^2 + y*p")
        for _ in range(20):
            f = _rand(rng)
            g = _rand(rng)
            lhs = total_derivative(f * g, ode)
            rhs = f * total_derivative(g, ode) + g * total_derivative(f, ode)
            assert is_zero(lhs - rhs).is_zero


class TestJetInvariants:
    def test_zero_ode(self):
        inv = jet_invariants(Ode3.from_text("0"))
        for e in (inv.K, inv.L, inv.M, inv.W):
            assert e.rf.is_zero_poly()
        assert inv.Z is None
        with pytest.raises(WunschmannZeroError):
            zee(Ode3.from_text("0"))

    def test_constant_linear(self):
        # F = -2 mu p + y with mu = 3: K = mu, W = 1, Z = 0
        inv = jet_invariants(Ode3.from_text("-2*3*p + y"))
        assert str(normalize(inv.K)) == "3"
        assert str(normalize(inv.W)) == "1"
        assert inv.Z is not None and inv.Z.rf.is_zero_poly()

    def test_exponential(self):
        inv = jet_invariants(Ode3.from_text("exp(q)"))
        assert is_zero(inv.K - parse("exp(q)^2/18")).is_zero
        assert is_zero(inv.W - parse("2*exp(q)^3/27")).is_zero
        assert is_zero(inv.Z - parse("2*exp(q)")).is_zero

    def test_intro_example(self):
        inv = jet_invariants(Ode3.from_text("3*q^2/p"))
        assert is_zero(inv.K + parse("q^2/(2*p^2)")).is_zero
        assert inv.W.rf.is_zero_poly()

    @pytest.mark.parametrize("alpha", [Fraction(7, 4), 2, Fraction(5, 2)])
    def test_power_law_w(self, alpha):
        # W(q^alpha) = alpha (alpha-3)(2 alpha-3)/27 q^(3 alpha - 3)
        from ode3geom.expr import pow_
        ode = Ode3(pow_(Q, alpha))
        c = Fraction(alpha) * (alpha - 3) * (2 * alpha - 3) / 27
        want = num(c) * pow_(Q, 3 * Fraction(alpha) - 3)
        assert is_zero(jet_invariants(ode).W - want).is_zero

    def test_w_constant_for_constant_linear(self):
        # any F linear in y, p, q with constant coefficients has constant W
        import random as _r
        rng = _r.Random(6)
        texts = ["2*y - 3*p + 5*q"]
        for _ in range(3):
            a, b, c = (rng.randint(-4, 4) for _ in range(3))
            texts.append(f"{a}*y + {b}*p + {c}*q")
        for text in texts:
            W = jet_invariants(Ode3.from_text(text)).W
            for v in ("x", "y", "p", "q"):
                assert is_zero(partial(W, v)).is_zero

    def test_w_vanishing_is_invariant(self):
        # relative invariance at the vanishing level across point pullbacks
        from ode3geom.transform import pullback_ode, random_point_transforms
        ts = random_point_transforms(99, 3)
        for text in ("3*q^2/p", "exp(q)"):
            ode = Ode3.from_text(text)
            status = jet_invariants(ode).w_verdict.status
            for t in ts:
                pb = pullback_ode(ode, t)
                assert jet_invariants(pb).w_verdict.status == status


class TestFrameDerivative:
    def test_coordinate_frame(self):
        zero = num(0)
        one = num(1)
        frame = (VectorField(one, zero, zero, zero),
                 VectorField(zero, one, zero, zero),
                 VectorField(zero, zero, one, zero),
                 VectorField(zero, zero, zero, one))
        outs = frame_derivative(Q * Q, frame)
        assert outs[3] == partial(Q * Q, "q")
        assert is_zero(outs[3] - 2 * Q).is_zero

    def test_chazy_frame_syzygy(self):
        # X2(a) = tau = 5/12 on class II; X4(constant) = 0
        from dataclasses import replace
        from ode3geom.chazy import chazy_class, chazy_invariants
        from ode3geom.expr import DEFAULT_CONFIG
        cfg = replace(DEFAULT_CONFIG,
                      box={"x": (-1, 1), "y": (0.5, 1.5),
                           "p": (0.5, 2), "q": (0.5, 2)})
        ode = chazy_class("II").canonical_ode()
        inv = chazy_invariants(ode, Fraction(1), cfg)
        x2a = inv.frame[1](inv.a)
        assert is_zero(x2a - num(Fraction(5, 12)), config=cfg).is_zero
        assert inv.frame[3](num(7)).rf.is_zero_poly()


def _rand(rng):
    out = num(0)
    for _ in range(rng.randint(1, 2)):
        mono = num(Fraction(rng.randint(-3, 3), rng.randint(1, 2)))
        for v in ("x", "y", "p", "q"):
            mono = mono * var(v) ** rng.randint(0, 2)
        out = out + mono
    return out if not out.rf.is_zero_poly() else num(1)
