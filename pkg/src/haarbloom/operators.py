"""Operators built from the tensor Haar calculus.

The cast: four biparameter paraproducts with a fixed symbol and their
sum, one-parameter and biparameter Haar multipliers driven by sign
choices, iterated commutators with a multiplication symbol evaluated
literally (no algebraic simplification), the oscillation operator that
replaces the symbol inside single commutators, restricted projections
onto rectangle families, and dense matrix materialization.

All four paraproducts follow one normalization: the coefficient of the
output against the complementary Haar type is ``b_R |R|^{-1/2} f_R``
with ``f_R`` the coefficient of ``f`` against the *same* type the symbol
pairs with.  For the fully non-cancellative pairing this is the familiar
"coefficient times average" form; the mixed ones carry the same
``|R|^{-1/2}`` so that the sum of the four collapses to projections of
the symbol (see the identity tests).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .dyadic import (
    DyadicInterval,
    DyadicRectangle,
    GridFunction2D,
    HaarCoefficients2D,
    RectangleCollection,
    Shadow,
    axis_haar_values,
    block_means,
    ensure_rng,
    haar_forward,
    haar_inverse,
    haar_project_x,
    haar_project_y,
    slot_interval,
    slot_of,
)

PARAPRODUCT_KINDS = ("00", "10", "01", "11")

Operator = Callable[[GridFunction2D], GridFunction2D]


# ---------------------------------------------------------------------------
# cached per-depth evaluation matrices
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _axis_bases(depth: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(HC, HN, SC): cancellative rows, normalized-indicator rows, |R|^{-1/2} grid.

    ``HC[p]`` holds the cell values of the slot-p Haar function (row 0 the
    constant), ``HN[p]`` those of the L2-normalized indicator, and
    ``SC[p, q] = 2^{(level_p + level_q)/2}`` is the inverse square-root
    area of the slot-pair rectangle.
    """
    n = 1 << depth
    hc = np.empty((n, n))
    hn = np.empty((n, n))
    hc[0] = 1.0
    hn[0] = 1.0
    for p in range(1, n):
        iv = slot_interval(p)
        hc[p] = axis_haar_values(iv, depth)
        hn[p] = axis_haar_values(iv, depth, cancellative=False)
    levels = np.array([0] + [slot_interval(p).level for p in range(1, n)])
    scale = 2.0 ** (levels / 2.0)
    return hc, hn, np.outer(scale, scale)


def _mixed_table(f: GridFunction2D, x_scaling: bool, y_scaling: bool) -> np.ndarray:
    """Slot-indexed coefficients of f against the chosen tensor Haar types."""
    hc, hn, _ = _axis_bases(f.depth)
    left = hn if x_scaling else hc
    right = hn if y_scaling else hc
    return (left @ f.values @ right.T) * 4.0 ** (-f.depth)


# ---------------------------------------------------------------------------
# paraproducts
# ---------------------------------------------------------------------------

def _symbol_cc(b: GridFunction2D) -> np.ndarray:
    """Fully cancellative coefficient table of the symbol (slot-indexed, row/col 0 zero)."""
    table = haar_forward(b).table.copy()
    table[0, :] = 0.0
    table[:, 0] = 0.0
    return table


def paraproduct_apply(kind: str, b: GridFunction2D, f: GridFunction2D) -> GridFunction2D:
    """One of the four biparameter paraproducts with symbol ``b`` applied to ``f``.

    ``kind`` names the Haar type the *input* is paired with; the output
    comes out against the complementary type.  "0" = cancellative,
    "1" = scaling, first character is the x-axis.
    """
    if kind not in PARAPRODUCT_KINDS:
        raise ValueError(f"kind must be one of {PARAPRODUCT_KINDS}, got {kind!r}")
    if b.depth != f.depth:
        raise ValueError("symbol and argument live on different grids")
    hc, hn, sc = _axis_bases(b.depth)
    coef = _symbol_cc(b) * sc * _mixed_table(f, kind[0] == "1", kind[1] == "1")
    out_x = hc if kind[0] == "1" else hn   # output carries the complementary type
    out_y = hc if kind[1] == "1" else hn
    values = np.einsum("pq,pi,qj->ij", coef[1:, 1:], out_x[1:], out_y[1:])
    return GridFunction2D(b.depth, values)


def lambda_apply(b: GridFunction2D, f: GridFunction2D) -> GridFunction2D:
    """Sum of the four paraproducts: the symbol side of the commutator calculus."""
    out = paraproduct_apply("00", b, f)
    for kind in ("10", "01", "11"):
        out = out + paraproduct_apply(kind, b, f)
    return out


def paraproduct_operator(kind: str, b: GridFunction2D) -> Operator:
    if kind not in PARAPRODUCT_KINDS:
        raise ValueError(f"kind must be one of {PARAPRODUCT_KINDS}, got {kind!r}")
    return lambda f: paraproduct_apply(kind, b, f)


def lambda_operator(b: GridFunction2D) -> Operator:
    return lambda f: lambda_apply(b, f)


def multiplication_operator(b: GridFunction2D) -> Operator:
    return lambda f: b * f


# ---------------------------------------------------------------------------
# sign choices and Haar multipliers
# ---------------------------------------------------------------------------

@dataclass
class SignChoice1D:
    """A sign per cancellative dyadic interval, stored slot-indexed.

    Slot 0 (the scaling direction) always carries 0: the associated
    multiplier annihilates the non-cancellative part of its axis.
    """

    depth: int
    signs: np.ndarray

    def __post_init__(self) -> None:
        self.signs = np.asarray(self.signs, dtype=float).copy()
        if self.signs.shape != (1 << self.depth,):
            raise ValueError("need one sign per slot")
        self.signs[0] = 0.0

    def sign(self, interval: DyadicInterval) -> float:
        return float(self.signs[slot_of(interval)])

    @classmethod
    def constant(cls, depth: int, value: float = 1.0) -> "SignChoice1D":
        return cls(depth, np.full(1 << depth, float(value)))

    @classmethod
    def random(cls, depth: int, rng=None, values=(-1.0, 1.0)) -> "SignChoice1D":
        rng = ensure_rng(rng)
        return cls(depth, rng.choice(values, size=1 << depth))

    def to_json(self) -> list[dict]:
        out = []
        for p in range(1, 1 << self.depth):
            iv = slot_interval(p)
            out.append({"level": iv.level, "index": iv.index, "sign": float(self.signs[p])})
        return out

    @classmethod
    def from_json(cls, entries: list[dict], depth: int) -> "SignChoice1D":
        signs = np.zeros(1 << depth)
        for e in entries:
            signs[slot_of(DyadicInterval(e["level"], e["index"]))] = e["sign"]
        return cls(depth, signs)


@dataclass
class SignChoice2D:
    """A sign per cancellative dyadic rectangle, slot-pair indexed."""

    depth: int
    signs: np.ndarray

    def __post_init__(self) -> None:
        self.signs = np.asarray(self.signs, dtype=float).copy()
        n = 1 << self.depth
        if self.signs.shape != (n, n):
            raise ValueError("need one sign per slot pair")
        self.signs[0, :] = 0.0
        self.signs[:, 0] = 0.0

    def sign(self, rect: DyadicRectangle) -> float:
        return float(self.signs[slot_of(rect.x), slot_of(rect.y)])

    @classmethod
    def from_tensor(cls, sx: SignChoice1D, sy: SignChoice1D) -> "SignChoice2D":
        if sx.depth != sy.depth:
            raise ValueError("axis sign choices disagree on depth")
        return cls(sx.depth, np.outer(sx.signs, sy.signs))

    @classmethod
    def random(cls, depth: int, rng=None, values=(-1.0, 1.0)) -> "SignChoice2D":
        rng = ensure_rng(rng)
        n = 1 << depth
        return cls(depth, rng.choice(values, size=(n, n)))

    def to_json(self) -> list[dict]:
        out = []
        n = 1 << self.depth
        for p in range(1, n):
            for q in range(1, n):
                ix, iy = slot_interval(p), slot_interval(q)
                out.append({"lx": ix.level, "ix": ix.index,
                            "ly": iy.level, "iy": iy.index,
                            "sign": float(self.signs[p, q])})
        return out

    @classmethod
    def from_json(cls, entries: list[dict], depth: int) -> "SignChoice2D":
        signs = np.zeros((1 << depth, 1 << depth))
        for e in entries:
            p = slot_of(DyadicInterval(e["lx"], e["ix"]))
            q = slot_of(DyadicInterval(e["ly"], e["iy"]))
            signs[p, q] = e["sign"]
        return cls(depth, signs)


def haar_multiplier_x(f: GridFunction2D, sigma: SignChoice1D) -> GridFunction2D:
    """Multiplier acting in x only: coefficient of h_I picks up sigma(I).

    The scaling direction is annihilated, matching the sum-of-projections
    form of the operator.
    """
    if sigma.depth != f.depth:
        raise ValueError("sign choice and function disagree on depth")
    table = haar_forward(f).table * sigma.signs[:, None]
    return haar_inverse(HaarCoefficients2D(f.depth, table))


def haar_multiplier_y(f: GridFunction2D, sigma: SignChoice1D) -> GridFunction2D:
    if sigma.depth != f.depth:
        raise ValueError("sign choice and function disagree on depth")
    table = haar_forward(f).table * sigma.signs[None, :]
    return haar_inverse(HaarCoefficients2D(f.depth, table))


def haar_multiplier(f: GridFunction2D, sigma: SignChoice2D) -> GridFunction2D:
    """Biparameter multiplier: acts on the fully cancellative block, kills the rest."""
    if sigma.depth != f.depth:
        raise ValueError("sign choice and function disagree on depth")
    table = haar_forward(f).table * sigma.signs
    return haar_inverse(HaarCoefficients2D(f.depth, table))


def multiplier_operator_x(sigma: SignChoice1D) -> Operator:
    return lambda f: haar_multiplier_x(f, sigma)


def multiplier_operator_y(sigma: SignChoice1D) -> Operator:
    return lambda f: haar_multiplier_y(f, sigma)


# ---------------------------------------------------------------------------
# commutators
# ---------------------------------------------------------------------------

def commutator_apply(op_a: Operator, op_b: Operator, f: GridFunction2D) -> GridFunction2D:
    """[A, B] f = A(Bf) - B(Af)."""
    return op_a(op_b(f)) - op_b(op_a(f))


def nested_commutator_apply(outer: Operator, inner: Operator, symbol: Operator,
                            f: GridFunction2D) -> GridFunction2D:
    """[outer, [inner, symbol]] f, evaluated literally term by term."""
    def inner_comm(g: GridFunction2D) -> GridFunction2D:
        return inner(symbol(g)) - symbol(inner(g))
    return outer(inner_comm(f)) - inner_comm(outer(f))


def iterated_commutator(b: GridFunction2D, f: GridFunction2D,
                        sigma_x: SignChoice1D, sigma_y: SignChoice1D) -> GridFunction2D:
    """[T1, [T2, M_b]] f with one-parameter Haar multipliers on each axis."""
    return nested_commutator_apply(
        multiplier_operator_x(sigma_x), multiplier_operator_y(sigma_y),
        multiplication_operator(b), f)


def iterated_projection_commutator(b: GridFunction2D, f: GridFunction2D,
                                   ix: DyadicInterval, jy: DyadicInterval) -> GridFunction2D:
    """[Q1_I, [Q2_J, M_b]] f with one-parameter Haar projections."""
    return nested_commutator_apply(
        lambda g: haar_project_x(g, ix), lambda g: haar_project_y(g, jy),
        multiplication_operator(b), f)


# ---------------------------------------------------------------------------
# oscillation operator
# ---------------------------------------------------------------------------

def bi_cancellative_part(f: GridFunction2D) -> GridFunction2D:
    """Projection onto the span of the fully cancellative tensor Haar functions."""
    table = haar_forward(f).table.copy()
    table[0, :] = 0.0
    table[:, 0] = 0.0
    return haar_inverse(HaarCoefficients2D(f.depth, table))


def rectangle_average_table(f: GridFunction2D) -> np.ndarray:
    """Slot-pair indexed averages <f>_R (slot 0 along an axis means the root)."""
    n = 1 << f.depth
    out = np.empty((n, n))
    for lx in range(f.depth):
        for ly in range(f.depth):
            means = block_means(f.values, lx, ly)
            out[1 << lx: 2 << lx, 1 << ly: 2 << ly] = means
            if lx == 0:
                out[0, 1 << ly: 2 << ly] = means[0]
            if ly == 0:
                out[1 << lx: 2 << lx, 0] = means[:, 0]
    out[0, 0] = f.values.mean()
    return out


def theta_apply(b: GridFunction2D, f: GridFunction2D) -> GridFunction2D:
    """Oscillation operator: sum over rectangles of f_R (b - <b>_R) h_R.

    Splitting off the average term turns it into ``b`` times the fully
    cancellative part of ``f`` minus a multiplier with weights <b>_R.
    """
    if b.depth != f.depth:
        raise ValueError("symbol and argument live on different grids")
    table = haar_forward(f).table.copy()
    table[0, :] = 0.0
    table[:, 0] = 0.0
    avg_term = haar_inverse(HaarCoefficients2D(f.depth, table * rectangle_average_table(b)))
    return b * haar_inverse(HaarCoefficients2D(f.depth, table)) - avg_term


def theta_operator(b: GridFunction2D) -> Operator:
    return lambda f: theta_apply(b, f)


# ---------------------------------------------------------------------------
# restricted projections
# ---------------------------------------------------------------------------

def restricted_projection(f: GridFunction2D, region: Shadow | RectangleCollection) -> GridFunction2D:
    """Sum of rectangle Haar projections over the family described by ``region``.

    A :class:`Shadow` stands for all cancellative rectangles contained in
    the mask; a :class:`RectangleCollection` is used verbatim.
    """
    n = 1 << f.depth
    keep = np.zeros((n, n), bool)
    if isinstance(region, Shadow):
        if region.depth != f.depth:
            raise ValueError("shadow and function disagree on depth")
        for p in range(1, n):
            for q in range(1, n):
                rect = DyadicRectangle(slot_interval(p), slot_interval(q))
                keep[p, q] = region.contains_rect(rect)
    else:
        for rect in region:
            if rect.x.level >= f.depth or rect.y.level >= f.depth:
                raise ValueError(f"{rect} has no resolved Haar function at depth {f.depth}")
            keep[slot_of(rect.x), slot_of(rect.y)] = True
    table = haar_forward(f).table * keep
    return haar_inverse(HaarCoefficients2D(f.depth, table))


# ---------------------------------------------------------------------------
# materialization
# ---------------------------------------------------------------------------

@dataclass
class OperatorMatrix:
    """Dense matrix of a linear operator acting on raveled cell values."""

    depth: int
    matrix: np.ndarray

    def __post_init__(self) -> None:
        self.matrix = np.asarray(self.matrix, dtype=float)
        m = 4 ** self.depth
        if self.matrix.shape != (m, m):
            raise ValueError(f"expected shape {(m, m)}, got {self.matrix.shape}")

    def apply(self, f: GridFunction2D) -> GridFunction2D:
        n = 1 << self.depth
        return GridFunction2D(self.depth, (self.matrix @ f.values.ravel()).reshape(n, n))

    def transpose(self) -> "OperatorMatrix":
        """Adjoint with respect to the unweighted L2 pairing (cells share one area)."""
        return OperatorMatrix(self.depth, self.matrix.T)


def materialize(op: Operator, depth: int) -> OperatorMatrix:
    """Evaluate an operator on every cell indicator to obtain its dense matrix."""
    n = 1 << depth
    m = n * n
    mat = np.empty((m, m))
    basis = np.zeros((n, n))
    for j in range(m):
        basis.flat[j] = 1.0
        mat[:, j] = op(GridFunction2D(depth, basis)).values.ravel()
        basis.flat[j] = 0.0
    return OperatorMatrix(depth, mat)
