"""Prolongation and pullback of point/contact transformations."""
import pytest

from ode3geom.expr import is_zero, normalize, parse, var
from ode3geom.jet import Ode3
from ode3geom.transform import (ContactTransform, DegenerateTransformError,
                                PointTransform, legendre_like, prolong,
                                pullback_ode, random_point_transforms, scale,
                                swap_xy, translate)


class TestProlong:
    def test_identity(self):
        y1, y2, y3 = prolong(PointTransform.from_text("x", "y"))
        assert str(normalize(y1)) == "p"
        assert str(normalize(y2)) == "q"
        assert str(normalize(y3)) == "Y3"

    def test_scaling(self):
        y1, y2, y3 = prolong(scale(2, 1))
        assert is_zero(y1 - parse("p") / 2).is_zero
        assert is_zero(y2 - parse("q") / 4).is_zero
        assert is_zero(y3 - var("Y3") / 8).is_zero

    def test_swap(self):
        y1, y2, _y3 = prolong(swap_xy())
        assert is_zero(y1 - parse("1/p")).is_zero
        assert is_zero(y2 + parse("q/p^3")).is_zero

    def test_prolonged_third_is_affine(self):
        t = PointTransform.from_text("x + y^2/4", "y + x/2")
        _y1, _y2, y3 = prolong(t)
        from ode3geom.expr import partial
        assert "Y3" not in partial(y3, "Y3").free_vars()

    def test_degenerate(self):
        with pytest.raises(DegenerateTransformError):
            pullback_ode(Ode3.from_text("0"),
                         PointTransform.from_text("1", "y"))


class TestPullback:
    def test_identity(self):
        out = pullback_ode(Ode3.from_text("0"),
                           PointTransform.from_text("x", "y"))
        assert out.F.rf.is_zero_poly()

    def test_swap_of_flat(self):
        out = pullback_ode(Ode3.from_text("0"), swap_xy())
        assert is_zero(out.F - parse("3*q^2/p")).is_zero

    def test_translation_invariance(self):
        out = pullback_ode(Ode3.from_text("-2*5*p + y"), translate(3, 0))
        assert is_zero(out.F - parse("-2*5*p + y")).is_zero

    def test_functoriality(self):
        t1 = PointTransform.from_text("x + y/4", "y + x^2/4")
        t2 = PointTransform.from_text("x/2", "y + x/2")
        F = Ode3.from_text("q^2")
        lhs = pullback_ode(pullback_ode(F, t1), t2)
        rhs = pullback_ode(F, t1.compose(t2))
        assert is_zero(lhs.F - rhs.F).is_zero


class TestContact:
    def test_legendre_is_contact(self):
        assert legendre_like().is_contact()

    def test_broken_triple_is_not(self):
        x, y, p = var("x"), var("y"), var("p")
        t = ContactTransform(-2 * p, 2 * x * p * p - 2 * y * p, y)
        assert not t.is_contact()

    def test_legendre_flattens_intro_example(self):
        out = pullback_ode(Ode3.from_text("0"), legendre_like())
        assert is_zero(out.F - parse("3*q^2/p")).is_zero


class TestBattery:
    def test_battery_is_seeded_and_nondegenerate(self):
        a = random_point_transforms(17, 8)
        b = random_point_transforms(17, 8)
        assert len(a) == 8
        assert all(t.nondegenerate() for t in a)
        assert [(str(t.chi), str(t.phi)) for t in a] == \
            [(str(t.chi), str(t.phi)) for t in b]

    def test_fibre_preserving_flag(self):
        assert PointTransform.from_text("2*x", "y + x").fibre_preserving()
        assert not swap_xy().fibre_preserving()
