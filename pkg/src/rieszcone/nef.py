"""Natural exponential families generated by Riesz measures.

Conventions: ``L(theta) = E exp(-<theta, Z>)`` on the dual cone,
``k = log L``, mean ``m = -k'(theta)`` in the cone, covariance ``k''``.

Second-order quantities (Hessian of ``k``, variance function, derivative of
the inverse) differentiate the triangular factorization: a tangent ``K`` at
``theta = U* U`` lifts to the unique triangular ``dU`` with
``dU* U + U* dU = K``, and everything downstream only multiplies triangular
elements, which is associative on every algebra. The group form
``K -> (S((S* K) S)) S*`` gives the same operator whenever brackets of the
shape ``(T X) T* = T (X T*)`` agree; it is kept for the Wishart comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import Algebra, AlgebraElement
from .errors import AlgebraMismatch, NotNEF, ZeroLambda
from .gindikin import classify_measure
from .power import as_multiplier
from .sampling import log_laplace_closed, sample_riesz
from .triangular import (
    LowerTriangular,
    cholesky,
    cholesky_dual,
    project_upsets,
    _up_lower_mask,
    restrict_factor,
    tri_invert,
)

__all__ = [
    "RieszFamily",
    "SymmetricOperator",
    "cumulant_k",
    "mean_map",
    "mean_inverse",
    "quadratic_rep",
    "quadratic_rep_factor",
    "inverse_derivative",
    "hessian_k",
    "variance_function",
    "upset_variance_sum",
    "fd_gradient",
    "fd_hessian",
    "mc_moments",
    "verification_oracles",
]


class RieszFamily:
    """The exponential family generated by the Riesz measure of ``chi``.

    Raises
    ------
    NotNEF
        If ``chi`` is outside the Gindikin set or vanishes at a root or
        separator.
    """

    def __init__(self, alg: Algebra, chi):
        self.algebra = alg
        self.chi = as_multiplier(alg, chi)
        self.classification = classify_measure(alg, self.chi)
        if not self.classification.generates_nef:
            raise NotNEF(f"{self.chi} does not generate an exponential family")

    @property
    def lam(self) -> np.ndarray:
        return self.chi.array

    def __repr__(self) -> str:
        return f"RieszFamily({self.chi}, {self.classification.kind.value})"


@dataclass
class SymmetricOperator:
    """Symmetric operator on the Hermitian space.

    Attributes
    ----------
    form : ndarray, shape (dim_H, dim_H)
        ``form[a, b] = <B_a, V(B_b)>`` in the canonical basis (diagonal units
        then pair coordinates). For a covariance this is
        ``Cov(<B_a, Z>, <B_b, Z>)``.
    images : ndarray, shape (dim_H, dim)
        ``V(B_b)`` as flat coefficients.
    """

    algebra: Algebra
    form: np.ndarray
    images: np.ndarray

    def apply(self, K: AlgebraElement) -> AlgebraElement:
        return AlgebraElement(self.algebra, K.h() @ self.images)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.form).min())

    def norm(self) -> float:
        return float(np.linalg.norm(self.form, 2))


# ----------------------------------------------------------------------
# first order
# ----------------------------------------------------------------------
def cumulant_k(F: RieszFamily, theta: AlgebraElement) -> float:
    """``log L(theta) = -sum_k 2 lambda_k log u_kk`` with ``theta = U* U``."""
    return log_laplace_closed(F.algebra, F.chi, theta, check=False)


def _inverse_factor(theta: AlgebraElement) -> LowerTriangular:
    """``S`` with ``theta^{-1} = S S*``."""
    return tri_invert(cholesky_dual(theta))


def mean_map(F: RieszFamily, theta: AlgebraElement) -> AlgebraElement:
    """``m = sum_i lambda_i (Y_{i<=} - Y_{i<})`` with ``Y = theta^{-1}``."""
    alg = F.algebra
    S = _inverse_factor(theta)
    Y = AlgebraElement(alg, alg.gram(S.coef))
    acc = np.zeros(alg.dim)
    for lab, lam in zip(alg.poset.order, F.lam):
        big, small = project_upsets(Y, lab, S)
        acc += lam * (big.coef - small.coef)
    return AlgebraElement(alg, acc)


def _assemble_Y(F: RieszFamily, m: AlgebraElement):
    alg = F.algebra
    if np.any(F.lam == 0):
        raise ZeroLambda("mean inversion divides by every lambda_i")
    T = cholesky(m)
    acc = np.zeros(alg.dim)
    for lab, lam in zip(alg.poset.order, F.lam):
        big, small = project_upsets(m, lab, T)
        acc += (big.coef - small.coef) / lam
    return AlgebraElement(alg, acc)


def mean_inverse(F: RieszFamily, m: AlgebraElement) -> AlgebraElement:
    """Parameter ``theta`` whose mean is ``m``.

    ``Y = sum_i (m_{i<=} - m_{i<}) / lambda_i`` is factored as ``S S*`` and
    ``theta = (S^{-1})* S^{-1}``.

    Raises
    ------
    ZeroLambda
    NotInCone
        If ``m`` or the assembled ``Y`` is not in the cone.
    """
    alg = F.algebra
    Y = _assemble_Y(F, m)
    S = cholesky(Y)
    return AlgebraElement(alg, alg.gram_dual(tri_invert(S).coef))


# ----------------------------------------------------------------------
# quadratic representations
# ----------------------------------------------------------------------
def quadratic_rep(X: AlgebraElement, K: AlgebraElement) -> AlgebraElement:
    """``P(X)K = X(KX)``."""
    if X.algebra is not K.algebra:
        raise AlgebraMismatch("elements belong to different algebras")
    alg = X.algebra
    return AlgebraElement(alg, alg.mul(X.coef, alg.mul(K.coef, X.coef)))


def _grp(alg: Algebra, s: np.ndarray, K: np.ndarray) -> np.ndarray:
    """``(S((S* K) S)) S*`` on raw coefficients; ``K`` may be a batch."""
    ss = alg.star(s)
    inner = alg.mul(alg.mul(ss, K), s)
    return alg.mul(alg.mul(s, inner), ss)


def _grp_dual(alg: Algebra, s: np.ndarray, K: np.ndarray) -> np.ndarray:
    """``S*(((S K) S*) S)`` on raw coefficients."""
    ss = alg.star(s)
    inner = alg.mul(alg.mul(alg.mul(s, K), ss), s)
    return alg.mul(ss, inner)


def quadratic_rep_factor(T: LowerTriangular, K: AlgebraElement) -> AlgebraElement:
    """Quadratic representation of ``T T*`` written through its factor.

    Returns ``(T((T* K) T)) T*``, the image of ``K`` under ``pi(T) pi(T)*``.
    """
    if T.algebra is not K.algebra:
        raise AlgebraMismatch("elements belong to different algebras")
    return AlgebraElement(T.algebra, _grp(T.algebra, T.coef, K.coef))


def _polar(coo, a: np.ndarray, b: np.ndarray, dim: int) -> np.ndarray:
    """Derivative of the quadratic map ``coo`` at ``a`` in the directions ``b``."""
    o, p, q, c = coo
    vals = c * (a[p] * b[..., q] + b[..., p] * a[q])
    out = np.zeros(b.shape[:-1] + (dim,))
    np.add.at(out.T, o, vals.T)
    return out


def _factor_tangent(alg: Algebra, t: np.ndarray, coo, K: np.ndarray) -> np.ndarray:
    """Triangular ``dT`` whose image under the linearized factor map is ``K``."""
    d = alg.dim_H
    E = np.zeros((d, alg.dim))
    E[:, :d] = np.eye(d)
    J = _polar(coo, t, E, alg.dim)[:, :d].T
    out = np.zeros(K.shape[:-1] + (alg.dim,))
    out[..., :d] = np.linalg.solve(J, K[..., :d].T).T
    return out


def _inverse_tangent(alg: Algebra, s: np.ndarray, dt: np.ndarray) -> np.ndarray:
    """``d(T^{-1}) = -S dT S`` for ``S = T^{-1}``."""
    return -alg.mul(alg.mul(s, dt), s)


def inverse_derivative(X: AlgebraElement, K: AlgebraElement) -> AlgebraElement:
    """Derivative of ``X -> X^{-1}`` (cone to dual cone) in direction ``K``.

    With ``X = T T*`` and ``S = T^{-1}`` the inverse is ``S* S``.

    Raises
    ------
    NotInCone
    """
    if X.algebra is not K.algebra:
        raise AlgebraMismatch("elements belong to different algebras")
    alg = X.algebra
    T = cholesky(X)
    S = tri_invert(T)
    dS = _inverse_tangent(alg, S.coef, _factor_tangent(alg, T.coef, alg.gram_coo, K.coef))
    return AlgebraElement(alg, _polar(alg.gram_dual_coo, S.coef, dS, alg.dim))


def _operator(alg: Algebra, s: np.ndarray, weights: np.ndarray) -> SymmetricOperator:
    """``sum_i w_i (Q(S_{i<=}) - Q(S_{i<}))`` with ``Q`` the group form."""
    basis = alg.h_basis()
    images = np.zeros_like(basis)
    S = LowerTriangular(alg, s)
    for lab, w in zip(alg.poset.order, weights):
        if w == 0:
            continue
        big = restrict_factor(S, lab).coef
        small = restrict_factor(S, lab, strict=True).coef
        images += w * (_grp(alg, big, basis) - _grp(alg, small, basis))
    return _symmetric(alg, basis, images)


def _symmetric(alg: Algebra, basis: np.ndarray, images: np.ndarray) -> SymmetricOperator:
    form = alg.pair(basis[:, None, :], images[None, :, :])
    return SymmetricOperator(alg, 0.5 * (form + form.T), images)


def hessian_k(F: RieszFamily, theta: AlgebraElement) -> SymmetricOperator:
    """``k''(theta)``, the derivative of ``-m`` along the Hermitian basis.

    ``m = sum_i lambda_i (S_{i<=} S_{i<=}* - S_{i<} S_{i<}*)`` with
    ``theta^{-1} = S S*``; the tangent of ``S`` comes from the dual factor.

    Raises
    ------
    NotInDualCone
    """
    alg = F.algebra
    U = cholesky_dual(theta)
    s = tri_invert(U).coef
    basis = alg.h_basis()
    ds = _inverse_tangent(alg, s, _factor_tangent(alg, U.coef, alg.gram_dual_coo, basis))
    images = np.zeros_like(basis)
    for i, lam in enumerate(F.lam):
        if lam == 0:
            continue
        for strict, sgn in ((False, -lam), (True, lam)):
            mask = _up_lower_mask(alg, i, strict)
            images += sgn * _polar(alg.gram_coo, np.where(mask, s, 0.0),
                                   np.where(mask, ds, 0.0), alg.dim)
    return _symmetric(alg, basis, images)


def variance_function(F: RieszFamily, m: AlgebraElement) -> SymmetricOperator:
    """Covariance of the family member with mean ``m``.

    This is ``k''`` at ``theta = mean_inverse(m)``. For constant ``lambda``
    and a Jordan-type product it reduces to ``P(m) / lambda``.

    Raises
    ------
    ZeroLambda, NotInCone
    """
    return hessian_k(F, mean_inverse(F, m))


def upset_variance_sum(F: RieszFamily, m: AlgebraElement, form: str = "group") -> SymmetricOperator:
    """``sum_i (P(m_{i<=}) - P(m_{i<})) / lambda_i`` built from ``m`` directly.

    This is the variance function only when ``lambda`` is constant; it is
    kept to compare against :func:`variance_function`. ``form="literal"``
    uses ``P(X)K = X(KX)`` instead of the group form.
    """
    alg = F.algebra
    if np.any(F.lam == 0):
        raise ZeroLambda("division by lambda_i")
    T = cholesky(m)
    if form == "group":
        return _operator(alg, T.coef, 1.0 / F.lam)
    if form != "literal":
        raise ValueError("form must be 'group' or 'literal'")
    basis = alg.h_basis()
    images = np.zeros_like(basis)
    for lab, lam in zip(alg.poset.order, F.lam):
        big, small = project_upsets(m, lab, T)
        for X, sgn in ((big, 1.0), (small, -1.0)):
            images += sgn / lam * alg.mul(X.coef, alg.mul(basis, X.coef))
    return _symmetric(alg, basis, images)


# ----------------------------------------------------------------------
# oracles
# ----------------------------------------------------------------------
def _steps(alg: Algebra, theta: AlgebraElement, rel: float) -> np.ndarray:
    return rel * np.maximum(1.0, np.abs(theta.h()))


def fd_gradient(F: RieszFamily, theta: AlgebraElement, rel: float = 1e-4) -> np.ndarray:
    """Central differences of ``k`` along the canonical basis."""
    alg = F.algebra
    basis = alg.h_basis()
    h = _steps(alg, theta, rel)
    g = np.zeros(alg.dim_H)
    for a in range(alg.dim_H):
        up = AlgebraElement(alg, theta.coef + h[a] * basis[a])
        dn = AlgebraElement(alg, theta.coef - h[a] * basis[a])
        g[a] = (cumulant_k(F, up) - cumulant_k(F, dn)) / (2 * h[a])
    return g


def fd_hessian(F: RieszFamily, theta: AlgebraElement, rel: float = 1e-4) -> np.ndarray:
    """Central second differences of ``k`` along the canonical basis."""
    alg = F.algebra
    basis = alg.h_basis()
    h = _steps(alg, theta, rel)
    d = alg.dim_H
    H = np.zeros((d, d))
    k = lambda c: cumulant_k(F, AlgebraElement(alg, c))
    for a in range(d):
        for b in range(a, d):
            ea, eb = h[a] * basis[a], h[b] * basis[b]
            val = (k(theta.coef + ea + eb) - k(theta.coef + ea - eb)
                   - k(theta.coef - ea + eb) + k(theta.coef - ea - eb)) / (4 * h[a] * h[b])
            H[a, b] = H[b, a] = val
    return H


def _coordinates(alg: Algebra, draws: np.ndarray) -> np.ndarray:
    """``<B_a, Z>`` for every draw and basis element."""
    basis = alg.h_basis()
    return draws @ basis[:, alg.swap].T


def mc_moments(alg: Algebra, draws: np.ndarray):
    """Empirical mean and covariance of the pairing coordinates, with errors.

    Returns
    -------
    mean, mean_se, cov, cov_se : ndarray
    """
    X = _coordinates(alg, draws)
    n = X.shape[0]
    mu = X.mean(axis=0)
    mu_se = X.std(axis=0, ddof=1) / math.sqrt(n)
    C = X - mu
    prods = C[:, :, None] * C[:, None, :]
    cov = prods.sum(axis=0) / (n - 1)
    cov_se = prods.std(axis=0, ddof=1) / math.sqrt(n)
    return mu, mu_se, cov, cov_se


def verification_oracles(F: RieszFamily, thetas: Sequence[AlgebraElement], n_samples: int = 200_000,
                         seed: int = 0, streams: int = 1, fd_tol: float = 1e-5,
                         z_tol: float = 5.0, roundtrip_tol: float = 1e-8) -> list[dict]:
    """Compare the closed forms with finite differences and Monte Carlo.

    One row per compared entry, with keys ``quantity``, ``closed_form``,
    ``fd``, ``mc``, ``stderr``, ``rel_err``, ``z``, ``tolerance`` and
    ``pass``. FD rows use relative error against ``fd_tol``; MC rows use the
    z-score against ``z_tol``. A ``roundtrip`` row per point reports the
    relative error of ``mean_inverse(mean_map(theta))``.
    """
    alg = F.algebra
    rows = []
    for t_id, theta in enumerate(thetas):
        m = mean_map(F, theta)
        mean_h = alg.pair(alg.h_basis(), m.coef)
        g = -fd_gradient(F, theta)
        gscale = max(np.abs(mean_h).max(), 1e-300)
        invertible = bool(np.all(F.lam != 0))
        # the mean parametrization needs every lambda_i; otherwise use theta
        V = (variance_function(F, m) if invertible else hessian_k(F, theta)).form
        H = fd_hessian(F, theta)
        hscale = max(np.abs(V).max(), 1e-300)
        if invertible:
            back = mean_inverse(F, m)
            rt = float(np.abs(back.coef - theta.coef).max() / np.abs(theta.coef).max())
            rows.append(dict(
                quantity=f"theta{t_id}.roundtrip", closed_form=0.0, fd=None, mc=None,
                stderr=None, rel_err=rt, z=None, tolerance=roundtrip_tol,
                **{"pass": bool(rt <= roundtrip_tol)},
            ))
        draws = sample_riesz(alg, F.chi, theta, n_samples, seed + t_id, streams=streams)
        mu, mu_se, cov, cov_se = mc_moments(alg, draws)
        for a in range(alg.dim_H):
            rel = abs(mean_h[a] - g[a]) / gscale
            z = (mu[a] - mean_h[a]) / mu_se[a] if mu_se[a] > 0 else 0.0
            rows.append(dict(
                quantity=f"theta{t_id}.mean[{a}]", closed_form=mean_h[a], fd=g[a], mc=mu[a],
                stderr=mu_se[a], rel_err=rel, z=z, tolerance=fd_tol,
                **{"pass": bool(rel <= fd_tol and abs(z) <= z_tol)},
            ))
        for a in range(alg.dim_H):
            for b in range(a, alg.dim_H):
                rel = abs(V[a, b] - H[a, b]) / hscale
                se = cov_se[a, b]
                z = (cov[a, b] - V[a, b]) / se if se > 0 else 0.0
                rows.append(dict(
                    quantity=f"theta{t_id}.cov[{a},{b}]", closed_form=V[a, b], fd=H[a, b],
                    mc=cov[a, b], stderr=se, rel_err=rel, z=z, tolerance=fd_tol,
                    **{"pass": bool(rel <= fd_tol and abs(z) <= z_tol)},
                ))
    return rows
