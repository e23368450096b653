"""Operator norms between weighted L^p spaces, and sign-supremum norms.

A dense operator matrix in the cell-values basis is conjugated by
diagonal weight factors so that the weighted L^p -> L^p norm becomes a
plain l^p -> l^p matrix norm.  At p = 2 that norm is the top singular
value (exact); away from 2 the package reports a certified bracket: a
nonlinear power-iteration lower bound plus an interpolation upper bound.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .dyadic import GridFunction2D, ensure_rng
from .operators import (
    OperatorMatrix,
    SignChoice1D,
    iterated_commutator,
    materialize,
)
from .weights import Weight


@dataclass
class OpNormResult:
    """An operator norm value with provenance.

    ``kind`` is "exact" when the number is the norm itself (p = 2
    singular value, or an exhaustive sign supremum of such), otherwise
    "lower_bound".  ``witness`` is a unit-norm input realizing ``value``;
    ``upper_bound`` brackets lower bounds from above; ``sign_pair`` is
    set by the sign supremum.
    """

    value: float
    kind: str
    iterations: int
    witness: GridFunction2D | None = None
    upper_bound: float | None = None
    sign_pair: tuple[SignChoice1D, SignChoice1D] | None = None

    def as_dict(self, witness_csv_path: str | None = None) -> dict:
        out = {"value": self.value, "kind": self.kind, "iterations": self.iterations}
        if witness_csv_path is not None:
            out["witness_csv_path"] = witness_csv_path
        return out


def weighted_p_matrix(mat: OperatorMatrix, mu: Weight, lam: Weight, p: float) -> np.ndarray:
    """Diagonal conjugation turning the weighted norm into a plain l^p norm."""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if not (mat.depth == mu.depth == lam.depth):
        raise ValueError("operator and weights disagree on depth")
    area = 4.0 ** (-mat.depth)
    out_w = (lam.values.ravel() * area) ** (1.0 / p)
    in_w = (mu.values.ravel() * area) ** (-1.0 / p)
    return out_w[:, None] * mat.matrix * in_w[None, :]


def opnorm_p2_exact(mat: OperatorMatrix, mu: Weight, lam: Weight) -> OpNormResult:
    """Exact L^2(mu) -> L^2(lam) norm as a top singular value, with maximizer."""
    b = weighted_p_matrix(mat, mu, lam, 2)
    _, s, vt = np.linalg.svd(b)
    area = 4.0 ** (-mat.depth)
    n = 1 << mat.depth
    f = vt[0] / np.sqrt(mu.values.ravel() * area)
    return OpNormResult(float(s[0]), "exact", 0, GridFunction2D(mat.depth, f.reshape(n, n)))


def opnorm_upper_bracket(mat: OperatorMatrix, mu: Weight, lam: Weight, p: float) -> float:
    """Interpolation bound: the l^1 and l^infty matrix norms bracket every p."""
    b = np.abs(weighted_p_matrix(mat, mu, lam, p))
    col = float(b.sum(axis=0).max())      # l^1 -> l^1
    row = float(b.sum(axis=1).max())      # l^inf -> l^inf
    return col ** (1.0 / p) * row ** (1.0 - 1.0 / p)


def _lp_ratio(b: np.ndarray, u: np.ndarray, p: float) -> float:
    den = float((np.abs(u) ** p).sum()) ** (1.0 / p)
    num = float((np.abs(b @ u) ** p).sum()) ** (1.0 / p)
    return num / den


def opnorm_lp_lower(mat: OperatorMatrix, mu: Weight, lam: Weight, p: float,
                    restarts: int = 4, seed: int | np.random.Generator | None = 0,
                    max_iter: int = 500, tol: float = 1e-9) -> OpNormResult:
    """Certified lower bound on the L^p(mu) -> L^p(lam) norm.

    Nonlinear power iteration: push the current input through the
    operator, weight the output by its (p-1)-st power, pull back through
    the adjoint and invert the gauge with the dual exponent.  Warm-started
    from the p = 2 maximizer plus random restarts; the best ratio over
    all iterates is returned, never exceeding the interpolation bracket.
    """
    if p <= 1:
        raise ValueError(f"the iteration needs p > 1, got {p}")
    b = weighted_p_matrix(mat, mu, lam, p)
    upper = opnorm_upper_bracket(mat, mu, lam, p)
    rng = ensure_rng(seed)
    m = b.shape[0]
    if not np.any(b):
        return OpNormResult(0.0, "lower_bound", 0, None, upper_bound=upper)

    b2 = weighted_p_matrix(mat, mu, lam, 2)
    warm = np.linalg.svd(b2)[2][0]
    starts = [warm, np.abs(warm)]
    starts += [rng.standard_normal(m) for _ in range(max(0, restarts - len(starts)))]

    pp = p / (p - 1.0)
    best, best_u, total = -np.inf, None, 0
    for u in starts:
        u = u / np.linalg.norm(u)
        prev = -np.inf
        for _ in range(max_iter):
            r = _lp_ratio(b, u, p)
            total += 1
            if r > best:
                best, best_u = r, u.copy()
            if abs(r - prev) <= tol * max(1.0, abs(r)):
                break
            prev = r
            out = b @ u
            y = b.T @ (np.sign(out) * np.abs(out) ** (p - 1.0))
            nxt = np.sign(y) * np.abs(y) ** (pp - 1.0)
            norm = float((np.abs(nxt) ** p).sum()) ** (1.0 / p)
            if norm == 0.0:
                break
            u = nxt / norm
    assert best <= upper * (1.0 + 1e-9), f"lower bound {best} escaped the bracket {upper}"
    area = 4.0 ** (-mat.depth)
    n = 1 << mat.depth
    unit = best_u / float((np.abs(best_u) ** p).sum()) ** (1.0 / p)
    f = unit / (mu.values.ravel() * area) ** (1.0 / p)
    witness = GridFunction2D(mat.depth, f.reshape(n, n))
    return OpNormResult(float(best), "lower_bound", total, witness, upper_bound=upper)


def opnorm(mat: OperatorMatrix, mu: Weight, lam: Weight, p: float, **kwargs) -> OpNormResult:
    """Dispatch: exact singular value at p = 2, certified bracket otherwise."""
    if p == 2:
        return opnorm_p2_exact(mat, mu, lam)
    return opnorm_lp_lower(mat, mu, lam, p, **kwargs)


# ---------------------------------------------------------------------------
# supremum over sign choices of the iterated commutator norm
# ---------------------------------------------------------------------------

def _axis_sign_space(depth: int):
    """All +-1 choices over the cancellative slots of one axis."""
    n = 1 << depth
    for combo in itertools.product((-1.0, 1.0), repeat=n - 1):
        signs = np.zeros(n)
        signs[1:] = combo
        yield SignChoice1D(depth, signs)


def sup_commutator_norm(b: GridFunction2D, mu: Weight, lam: Weight, p: float,
                        mode: str = "exhaustive", trials: int = 64,
                        seed: int | np.random.Generator | None = 0,
                        restarts: int = 2) -> OpNormResult:
    """Supremum over sign pairs of the iterated commutator norm.

    Each candidate pair of one-parameter sign multipliers is materialized
    through the literal nested commutator and its weighted norm measured.
    ``mode="exhaustive"`` walks the full +-1 space (depth <= 2: at most
    8 x 8 pairs); ``"sampled"`` draws ``trials`` pairs from a seeded
    stream, so a longer run with the same seed extends a shorter one.
    The result is exact only for an exhaustive walk at p = 2.
    """
    if mode not in ("exhaustive", "sampled"):
        raise ValueError(f"mode must be 'exhaustive' or 'sampled', got {mode!r}")
    if mode == "exhaustive":
        if b.depth > 2:
            raise ValueError("exhaustive sign enumeration is limited to depth <= 2")
        pairs = itertools.product(_axis_sign_space(b.depth), repeat=2)
        pair_iter = ((sx, sy) for sx, sy in pairs)
    else:
        rng = ensure_rng(seed)

        def _sampled():
            for _ in range(trials):
                yield (SignChoice1D.random(b.depth, rng),
                       SignChoice1D.random(b.depth, rng))
        pair_iter = _sampled()

    best: OpNormResult | None = None
    total = 0
    for sx, sy in pair_iter:
        mat = materialize(lambda f: iterated_commutator(b, f, sx, sy), b.depth)
        if p == 2:
            res = opnorm_p2_exact(mat, mu, lam)
        else:
            res = opnorm_lp_lower(mat, mu, lam, p, restarts=restarts)
        total += max(1, res.iterations)
        if best is None or res.value > best.value:
            best = res
            best.sign_pair = (sx, sy)
    assert best is not None
    best.iterations = total
    best.kind = "exact" if (mode == "exhaustive" and p == 2) else "lower_bound"
    return best
