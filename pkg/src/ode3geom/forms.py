"""Exterior calculus on J^2 in the coordinate cobasis (dx, dy, dp, dq).

TwoForms are stored against the lexicographic basis
dx^dy, dx^dp, dx^dq, dy^dp, dy^dq, dp^dq; antisymmetry is structural.
decompose() expresses a 2-form in the wedge basis of a given coframe by a
symbolic linear solve with is_zero pivoting.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence

from .expr import (DEFAULT_CONFIG, Expr, ZeroConfig, is_zero, normalize,
                   num, partial)

COORDS = ("x", "y", "p", "q")
PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
PAIR_INDEX = {pq: i for i, pq in enumerate(PAIRS)}

_ZERO = num(0)


class DegenerateCoframeError(ArithmeticError):
    pass


@dataclass(frozen=True)
class OneForm:
    """c_x dx + c_y dy + c_p dp + c_q dq."""

    cx: Expr
    cy: Expr
    cp: Expr
    cq: Expr

    def components(self):
        return (self.cx, self.cy, self.cp, self.cq)

    def __add__(self, other: "OneForm") -> "OneForm":
        return OneForm(*(a + b for a, b in
                         zip(self.components(), other.components())))

    def __sub__(self, other: "OneForm") -> "OneForm":
        return OneForm(*(a - b for a, b in
                         zip(self.components(), other.components())))

    def __rmul__(self, f) -> "OneForm":
        return OneForm(*(Expr._coerce(f) * c for c in self.components()))

    def __neg__(self) -> "OneForm":
        return OneForm(*(-c for c in self.components()))

    def pair(self, vf) -> Expr:
        """Contraction with a jet.VectorField."""
        return sum((c * v for c, v in
                    zip(self.components(), vf.components())), _ZERO)

    def normalized(self) -> "OneForm":
        return OneForm(*(normalize(c) for c in self.components()))


@dataclass(frozen=True)
class TwoForm:
    """Coefficients against dx^dy, dx^dp, dx^dq, dy^dp, dy^dq, dp^dq."""

    c: tuple  # six Exprs

    def __add__(self, other: "TwoForm") -> "TwoForm":
        return TwoForm(tuple(a + b for a, b in zip(self.c, other.c)))

    def __sub__(self, other: "TwoForm") -> "TwoForm":
        return TwoForm(tuple(a - b for a, b in zip(self.c, other.c)))

    def __rmul__(self, f) -> "TwoForm":
        return TwoForm(tuple(Expr._coerce(f) * x for x in self.c))

    def __neg__(self) -> "TwoForm":
        return TwoForm(tuple(-x for x in self.c))

    def is_zero_on(self, config: ZeroConfig = DEFAULT_CONFIG) -> bool:
        return all(is_zero(x, config=config).is_zero for x in self.c)

    def normalized(self) -> "TwoForm":
        return TwoForm(tuple(normalize(x) for x in self.c))


ZERO2 = TwoForm((_ZERO,) * 6)


def dx_i(i: int) -> OneForm:
    comps = [_ZERO] * 4
    comps[i] = num(1)
    return OneForm(*comps)


DX, DY, DP, DQ = (dx_i(i) for i in range(4))


def d(omega) -> TwoForm:
    """Exterior derivative of a OneForm (or of an Expr, giving its df as a
    OneForm when called through df())."""
    comps = omega.components()
    out = []
    for a, b in PAIRS:
        out.append(partial(comps[b], COORDS[a]) - partial(comps[a], COORDS[b]))
    return TwoForm(tuple(out))


def df(f: Expr) -> OneForm:
    return OneForm(partial(f, "x"), partial(f, "y"),
                   partial(f, "p"), partial(f, "q"))


def wedge(alpha: OneForm, beta: OneForm) -> TwoForm:
    a = alpha.components()
    b = beta.components()
    return TwoForm(tuple(a[i] * b[j] - a[j] * b[i] for i, j in PAIRS))


@dataclass(frozen=True)
class Coframe:
    theta: tuple  # four OneForms

    def matrix(self) -> list:
        return [list(th.components()) for th in self.theta]

    def det(self) -> Expr:
        return det4(self.matrix())

    def nondegenerate(self, config: ZeroConfig = DEFAULT_CONFIG) -> bool:
        return is_zero(self.det(), config=config).is_nonzero

    def wedges(self) -> list:
        """The six theta^j ^ theta^k (j<k), lexicographic."""
        return [wedge(self.theta[j], self.theta[k]) for j, k in PAIRS]


def det4(m: Sequence[Sequence[Expr]]) -> Expr:
    def det2(a, b, c, d2):
        return a * d2 - b * c

    def det3(rows, cols):
        (i0, i1, i2), (j0, j1, j2) = rows, cols
        return (m[i0][j0] * det2(m[i1][j1], m[i1][j2], m[i2][j1], m[i2][j2])
                - m[i0][j1] * det2(m[i1][j0], m[i1][j2], m[i2][j0], m[i2][j2])
                + m[i0][j2] * det2(m[i1][j0], m[i1][j1], m[i2][j0], m[i2][j1]))

    total = _ZERO
    sign = 1
    for j in range(4):
        cols = tuple(k for k in range(4) if k != j)
        term = m[0][j] * det3((1, 2, 3), cols)
        total = total + (term if sign > 0 else -term)
        sign = -sign
    return total


def _solve_linear_multi(mat: List[List[Expr]], rhss: List[List[Expr]],
                        config: ZeroConfig) -> List[List[Expr]]:
    """Solve mat * t = rhs for several right-hand sides by Gaussian
    elimination with is_zero pivoting.

    Pivot choice prefers structurally constant entries, then syntactically
    small ones verified nonzero on the domain, so that no division by an
    expression vanishing somewhere on the box occurs.
    """
    n = len(mat)
    k = len(rhss)
    rows = [list(mat[i]) + [rhss[j][i] for j in range(k)] for i in range(n)]
    for col in range(n):
        pivot_row = None
        best = None
        best_size = None
        for r in range(col, n):
            e = rows[r][col]
            if e.rf.is_zero_poly():
                continue
            if e.rf.is_const():
                pivot_row = r
                break
            size = len(e.rf.num)
            if (best_size is None or size < best_size) \
                    and is_zero(e, config=config).is_nonzero:
                best, best_size = r, size
        if pivot_row is None:
            pivot_row = best
        if pivot_row is None:
            raise DegenerateCoframeError(
                "coframe degenerate on the sample domain")
        rows[col], rows[pivot_row] = rows[pivot_row], rows[col]
        piv = rows[col][col]
        for r in range(n):
            if r == col:
                continue
            f = rows[r][col]
            if f.rf.is_zero_poly():
                continue
            ratio = f / piv
            for c2 in range(col + 1, n + k):
                if not rows[col][c2].rf.is_zero_poly():
                    rows[r][c2] = rows[r][c2] - ratio * rows[col][c2]
            rows[r][col] = _ZERO
    return [[normalize(rows[i][n + j] / rows[i][i]) for i in range(n)]
            for j in range(k)]


def decompose(omega: TwoForm, frame: Coframe,
              config: ZeroConfig = DEFAULT_CONFIG) -> tuple:
    """Coefficients T_jk with omega = sum_{j<k} T_jk theta^j ^ theta^k."""
    return decompose_many([omega], frame, config)[0]


def decompose_many(omegas: Sequence[TwoForm], frame: Coframe,
                   config: ZeroConfig = DEFAULT_CONFIG) -> list:
    """Decompose several 2-forms against one coframe in a single solve."""
    basis = frame.wedges()
    mat = [[basis[j].c[i] for j in range(6)] for i in range(6)]
    rhss = [[om.c[i] for i in range(6)] for om in omegas]
    return [tuple(sol) for sol in _solve_linear_multi(mat, rhss, config)]


def reconstruct(coeffs: Sequence[Expr], frame: Coframe) -> TwoForm:
    out = ZERO2
    for t, w in zip(coeffs, frame.wedges()):
        out = out + t * w
    return out
