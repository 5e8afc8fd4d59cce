"""Exterior calculus: d, wedge, decomposition."""
import random
from fractions import Fraction

import pytest

from ode3geom.expr import is_zero, normalize, num, var
from ode3geom.forms import (DX, DY, DP, DQ, Coframe, DegenerateCoframeError,
                            OneForm, d, decompose, decompose_many, df,
                            reconstruct, wedge)

P, Q = var("p"), var("q")


def form_is_zero(tf):
    return all(not is_zero(c).is_nonzero for c in tf.c)


class TestD:
    def test_contact_form(self):
        w1 = OneForm(-P, num(1), num(0), num(0))       # dy - p dx
        out = d(w1)
        # -dp^dx = dx^dp: coefficient +1 at slot dx^dp
        assert str(normalize(out.c[1])) == "1"
        assert all(c.rf.is_zero_poly() for i, c in enumerate(out.c) if i != 1)

    def test_q_dx(self):
        out = d(OneForm(Q, num(0), num(0), num(0)))
        # dq^dx = -dx^dq
        assert str(normalize(out.c[2])) == "(-1)"

    def test_exact_weyl_potential(self):
        out = d(OneForm(num(0), num(0), 2 / P, num(0)))  # 2 dp / p
        assert form_is_zero(out)

    def test_dd_zero_randomized(self):
        rng = random.Random(5)
        for _ in range(25):
            f = _random_rational(rng)
            assert form_is_zero(d(df(f)))

    def test_leibniz(self):
        rng = random.Random(11)
        for _ in range(10):
            f = _random_rational(rng)
            w = OneForm(*(_random_rational(rng) for _ in range(4)))
            lhs = d(f * w)
            rhs = wedge(df(f), w) + f * d(w)
            assert form_is_zero(lhs - rhs)


class TestWedge:
    def test_self_zero(self):
        assert form_is_zero(wedge(DX, DX))

    def test_antisymmetry_random(self):
        rng = random.Random(3)
        for _ in range(10):
            a = OneForm(*(_random_rational(rng) for _ in range(4)))
            b = OneForm(*(_random_rational(rng) for _ in range(4)))
            assert form_is_zero(wedge(a, b) + wedge(b, a))

    def test_contact_wedge(self):
        w1 = OneForm(-P, num(1), num(0), num(0))
        out = wedge(w1, DX)
        assert str(normalize(out.c[0])) == "(-1)"   # -dx^dy


class TestDecompose:
    def test_identity_coframe(self):
        cf = Coframe((DX, DY, DP, DQ))
        t = decompose(wedge(DX, DY), cf)
        assert [str(normalize(c)) for c in t] == \
            ["1", "0", "0", "0", "0", "0"]

    def test_reconstruct_roundtrip(self):
        w1 = OneForm(-P, num(1), num(0), num(0))
        cf = Coframe((w1, DX, OneForm(num(0), Q, P, num(1)), DQ))
        om = wedge(cf.theta[0], cf.theta[2]) - 2 * wedge(cf.theta[1],
                                                         cf.theta[3])
        t = decompose(om, cf)
        assert form_is_zero(reconstruct(t, cf) - om)

    def test_many_matches_single(self):
        w1 = OneForm(-P, num(1), num(0), num(0))
        cf = Coframe((w1, DX, OneForm(num(0), Q, P, num(1)), DQ))
        oms = [d(th) for th in cf.theta]
        many = decompose_many(oms, cf)
        for om, got in zip(oms, many):
            single = decompose(om, cf)
            assert all(is_zero(a - b).is_zero for a, b in zip(got, single))

    def test_degenerate_coframe(self):
        cf = Coframe((DX, DX, DP, DQ))
        with pytest.raises(DegenerateCoframeError):
            decompose(wedge(DX, DP), cf)


def _random_rational(rng):
    terms = []
    for _ in range(rng.randint(1, 3)):
        c = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
        mono = num(c)
        for v in ("x", "y", "p", "q"):
            mono = mono * var(v) ** rng.randint(0, 2)
        terms.append(mono)
    out = terms[0]
    for t in terms[1:]:
        out = out + t
    if rng.random() < 0.4:
        out = out / (1 + P * P)
    return out
