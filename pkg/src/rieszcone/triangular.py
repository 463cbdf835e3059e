"""The triangular group, generalized Cholesky factorization and orbits.

Every cone element ``X`` factors uniquely as ``X = T T*`` with ``T`` lower
triangular with positive diagonal; every dual-cone element ``theta`` as
``theta = U* U``. Inverses are defined through these factors, and all the
projections used later (up-set restrictions, the decomposition into
components, boundary orbits) are read off the factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .algebra import Algebra, AlgebraElement
from .errors import (
    AlgebraMismatch,
    NotHermitian,
    NotInClosure,
    NotInCone,
    NotInDualCone,
    SingularDiagonal,
)
from .poset import structure_sets

__all__ = [
    "LowerTriangular",
    "OrbitSignature",
    "tri_product",
    "tri_invert",
    "cholesky",
    "cholesky_batch",
    "cholesky_dual",
    "cholesky_dual_batch",
    "inverse_dual",
    "inverse_primal",
    "group_act",
    "restrict_factor",
    "project_upsets",
    "project_upsets_dual",
    "components",
    "orbit_point",
    "orbit_points",
    "classify_orbit",
    "classify_orbit_batch",
]


class LowerTriangular(AlgebraElement):
    """Lower-triangular element; ``positive`` tells membership in ``T_l^+``."""

    __slots__ = ()

    def __init__(self, algebra: Algebra, coef):
        super().__init__(algebra, coef)
        if np.any(self.coef[algebra.dim_H:]):
            raise ValueError("coefficients above the diagonal must vanish")

    @property
    def positive(self) -> bool:
        return bool(np.all(self.coef[: self.algebra.n] > 0))

    @classmethod
    def identity(cls, algebra: Algebra) -> "LowerTriangular":
        return cls(algebra, algebra.unit.coef)


@dataclass(frozen=True)
class OrbitSignature:
    """A 0/1 map on the poset, in linear-extension order.

    Parameters
    ----------
    values : tuple of int
        ``psi(j)`` for the elements of ``poset.order``.
    anchor : str, optional
        Label of the root or separator whose family the signature belongs to.
    """

    values: tuple
    anchor: str | None = None

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        if any(v not in (0, 1) for v in vals):
            raise ValueError("signature values must be 0 or 1")
        object.__setattr__(self, "values", vals)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.values, dtype=np.int8)

    @property
    def size(self) -> int:
        return sum(self.values)

    def e_psi(self, algebra: Algebra) -> AlgebraElement:
        return algebra.unit_on(self.array.astype(bool))

    def as_dict(self, algebra: Algebra) -> dict:
        return dict(zip(algebra.poset.order, self.values))

    @classmethod
    def ones(cls, algebra: Algebra, anchor=None) -> "OrbitSignature":
        """All ones, or the distinguished ``1_i`` when an anchor is given.

        ``1_i`` is one on the up-set of ``i`` minus every other separator.
        Everything strictly above a separator is again a separator, so for a
        separator ``s`` this is the indicator of ``s`` and the ``1_i`` have
        disjoint supports.
        """
        p = algebra.poset
        if anchor is None:
            return cls((1,) * len(p))
        anchor = str(anchor)
        ss = structure_sets(p)
        up = p.up(p.index[anchor])
        vals = []
        for a, lab in enumerate(p.order):
            v = bool(up[a])
            if lab in ss.separators and lab != anchor:
                v = False
            vals.append(int(v))
        return cls(tuple(vals), anchor)

    @classmethod
    def from_mapping(cls, algebra: Algebra, mapping: dict, anchor=None) -> "OrbitSignature":
        return cls(tuple(int(mapping.get(lab, 0)) for lab in algebra.poset.order), anchor)


def _check_same(*els):
    a = els[0].algebra
    for e in els[1:]:
        if e.algebra is not a:
            raise AlgebraMismatch("elements belong to different algebras")
    return a


def _hermitian_or_raise(X: AlgebraElement):
    if not X.is_hermitian(tol=1e-10):
        raise NotHermitian("element is not Hermitian")


def tri_product(S: LowerTriangular, T: LowerTriangular) -> LowerTriangular:
    """Product of two lower-triangular elements."""
    alg = _check_same(S, T)
    c = alg.mul(S.coef, T.coef)
    c[alg.dim_H:] = 0.0  # exact zeros; the product is lower already
    return LowerTriangular(alg, c)


def _invert_coef(alg: Algebra, t: np.ndarray) -> np.ndarray:
    n = alg.n
    d = t[:n]
    if np.any(d <= 0):
        raise SingularDiagonal("triangular inverse needs a positive diagonal")
    s = np.zeros(alg.dim)
    for i in range(n):
        s[i] = 1.0 / d[i]
        row = [alg.slot(i, j) for j in range(i) if alg.has_block(i, j)]
        if not row:
            continue
        prod = alg.mul(t, s)
        for sl in row:
            s[sl] = -prod[sl] / d[i]
    return s


def tri_invert(T: LowerTriangular) -> LowerTriangular:
    """Inverse in ``T_l^+`` by forward substitution in linear-extension order.

    Raises
    ------
    SingularDiagonal
        If some diagonal entry is not positive.
    """
    return LowerTriangular(T.algebra, _invert_coef(T.algebra, T.coef))


def cholesky_batch(alg: Algebra, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Factor a batch of Hermitian rows; returns ``(T, ok)``."""
    T, _, status = _kernels.factor_batch(X, alg.primal_table)
    return T, status == _kernels.OK


def cholesky(X: AlgebraElement) -> LowerTriangular:
    """Generalized Cholesky factor ``X = T T*`` with ``T`` in ``T_l^+``.

    Raises
    ------
    NotHermitian
    NotInCone
        If a pivot is not strictly positive.
    """
    _hermitian_or_raise(X)
    T, ok = cholesky_batch(X.algebra, X.coef[None, :])
    if not ok[0]:
        raise NotInCone("non-positive pivot in the Cholesky recurrence")
    return LowerTriangular(X.algebra, T[0])


def cholesky_dual_batch(alg: Algebra, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    T, _, status = _kernels.factor_batch(theta, alg.dual_table)
    return T, status == _kernels.OK


def cholesky_dual(theta: AlgebraElement) -> LowerTriangular:
    """Dual factor ``theta = U* U`` with ``U`` in ``T_l^+``.

    The recurrence runs over rows in reverse linear-extension order, which is
    the primal recurrence of the opposite order written in place.

    Raises
    ------
    NotHermitian
    NotInDualCone
    """
    _hermitian_or_raise(theta)
    U, ok = cholesky_dual_batch(theta.algebra, theta.coef[None, :])
    if not ok[0]:
        raise NotInDualCone("non-positive pivot in the dual factorization")
    return LowerTriangular(theta.algebra, U[0])


def inverse_dual(theta: AlgebraElement) -> AlgebraElement:
    """``theta^{-1} = S S*`` with ``S = U^{-1}`` and ``theta = U* U``."""
    U = cholesky_dual(theta)
    S = tri_invert(U)
    return AlgebraElement(theta.algebra, theta.algebra.gram(S.coef))


def inverse_primal(X: AlgebraElement) -> AlgebraElement:
    """``X^{-1} = S* S`` in the dual cone, with ``S = T^{-1}`` and ``X = T T*``."""
    T = cholesky(X)
    S = tri_invert(T)
    return AlgebraElement(X.algebra, X.algebra.gram_dual(S.coef))


def group_act(T: LowerTriangular, X: AlgebraElement) -> AlgebraElement:
    """``(TV)(TV)*`` where ``X = V V*``."""
    alg = _check_same(T, X)
    V = cholesky(X)
    return AlgebraElement(alg, alg.gram(tri_product(T, V).coef))


def _up_lower_mask(alg: Algebra, i: int, strict: bool) -> np.ndarray:
    up = alg.poset.up(i, strict=strict)
    return alg.block_mask(up, up) & alg.lower_mask()


def restrict_factor(T: LowerTriangular, label, strict: bool = False) -> LowerTriangular:
    """Keep the entries ``t_jk`` with ``j, k`` in the (strict) up-set of ``label``."""
    alg = T.algebra
    m = _up_lower_mask(alg, alg.idx(label), strict)
    return LowerTriangular(alg, np.where(m, T.coef, 0.0))


def project_upsets(X: AlgebraElement, label, T: LowerTriangular | None = None):
    """``(X_{i<=}, X_{i<})`` built from the restricted Cholesky factor."""
    if T is None:
        T = cholesky(X)
    alg = X.algebra
    big = restrict_factor(T, label)
    small = restrict_factor(T, label, strict=True)
    return AlgebraElement(alg, alg.gram(big.coef)), AlgebraElement(alg, alg.gram(small.coef))


def project_upsets_dual(theta: AlgebraElement, label, U: LowerTriangular | None = None):
    """``(theta_{i<=}, theta_{i<})`` as ``U'* U'`` with the restricted dual factor."""
    if U is None:
        U = cholesky_dual(theta)
    alg = theta.algebra
    big = restrict_factor(U, label)
    small = restrict_factor(U, label, strict=True)
    return (AlgebraElement(alg, alg.gram_dual(big.coef)),
            AlgebraElement(alg, alg.gram_dual(small.coef)))


def components(X: AlgebraElement, T: LowerTriangular | None = None) -> dict:
    """Decomposition ``X = sum_i X_i`` over the roots and separators.

    ``X_i = X_{i<=} - sum_{s in S_i} X_{s<=}`` for a root ``i`` (every
    minimal element counts as a root), ``X_s = X_{s<=}`` for a separator
    ``s``, and ``X_j = 0`` for all other elements.
    """
    if T is None:
        T = cholesky(X)
    alg = X.algebra
    p = alg.poset
    ss = structure_sets(p)
    up = {lab: project_upsets(X, lab, T)[0] for lab in p.order}
    out = {}
    for lab in p.order:
        if lab in ss.separators:
            out[lab] = up[lab]
        elif lab in ss.roots:
            acc = up[lab]
            for s in sorted(ss.separators_of[lab], key=p.index.get):
                acc = acc - up[s]
            out[lab] = acc
        else:
            out[lab] = alg.element()
    return out


def _dead_mask(alg: Algebra, psi: np.ndarray) -> np.ndarray:
    """Lower coordinates lying in columns where ``psi`` vanishes."""
    dead = np.asarray(psi) == 0
    return alg.block_mask(np.ones(alg.n, dtype=bool), dead) & alg.lower_mask()


def orbit_point(T: LowerTriangular, psi: OrbitSignature | Sequence[int]) -> AlgebraElement:
    """``T e_psi T*``, a point of the closed cone."""
    alg = T.algebra
    vals = psi.array if isinstance(psi, OrbitSignature) else np.asarray(psi)
    t = np.where(_dead_mask(alg, vals), 0.0, T.coef)
    return AlgebraElement(alg, alg.gram(t))


def orbit_points(alg: Algebra, T: np.ndarray, psi: Sequence[int]) -> np.ndarray:
    """Batched :func:`orbit_point` on raw factor rows sharing one signature."""
    t = np.where(_dead_mask(alg, np.asarray(psi)), 0.0, T)
    return alg.gram(t)


def _default_tol(alg: Algebra, Z: np.ndarray) -> np.ndarray:
    return 1e-10 * np.maximum(np.max(Z[..., : alg.n], axis=-1), 1.0)


def classify_orbit_batch(alg: Algebra, Z: np.ndarray, tol=None):
    """Pivot-thresholded factorization of a batch of closure points.

    Returns
    -------
    psi : ndarray of int8, shape (n, |I|)
    T : ndarray, shape (n, dim)
        Factors with unit diagonal and zero column below dead pivots.
    ok : ndarray of bool
        False where some row is not in the closed cone.
    """
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    if tol is None:
        tol = _default_tol(alg, Z)
    T, psi, status = _kernels.factor_batch(Z, alg.primal_table, threshold=True, tol=tol)
    return psi, T, status == _kernels.OK


def classify_orbit(Z: AlgebraElement, tol: float | None = None):
    """Find the orbit of a closure point: ``Z = T e_psi T*``.

    Parameters
    ----------
    Z : AlgebraElement
        Hermitian element of the closed cone.
    tol : float, optional
        Pivot threshold; defaults to ``1e-10 * max(1, max_k z_kk)``.

    Returns
    -------
    psi : OrbitSignature
    T : LowerTriangular

    Raises
    ------
    NotInClosure
    """
    _hermitian_or_raise(Z)
    alg = Z.algebra
    psi, T, ok = classify_orbit_batch(alg, Z.coef[None, :], tol)
    if not ok[0]:
        raise NotInClosure("element is not in the closed cone")
    return OrbitSignature(tuple(psi[0])), LowerTriangular(alg, T[0])
