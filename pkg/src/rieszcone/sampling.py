"""Riesz measures: Laplace transforms, densities and samplers.

Draws are returned as raw coefficient arrays of shape ``(n, algebra.dim)``
(wrap a row with ``algebra.element(row)`` for the object API).

Randomness
----------
Every sampler takes ``rng``: either a ``numpy.random.Generator``, used as
is, or an integer seed. With a seed, draws are produced in fixed blocks of
:data:`BLOCK` rows, block ``b`` using the stream
``SeedSequence(seed, spawn_key=(b,))``. Workers (``streams``) only decide
who computes which block, and blocks are merged in order, so the output
does not depend on the number of streams.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

from .algebra import Algebra, AlgebraElement
from .errors import (
    EmptySample,
    NotAbsolutelyContinuous,
    NotInXi,
    NotInXiComponent,
)
from .gindikin import (
    XiWitness,
    in_xi,
    is_absolutely_continuous,
    xi_component_check,
    xi_membership,
)
from .power import Multiplier, as_multiplier, log_gamma_cone, n_profile
from .triangular import (
    OrbitSignature,
    cholesky_batch,
    cholesky_dual,
    inverse_dual,
    orbit_points,
    tri_invert,
)

__all__ = [
    "BLOCK",
    "laplace_closed",
    "log_laplace_closed",
    "density_ac",
    "log_density_ac",
    "sample_standard_ac",
    "sample_orbit_component",
    "sample_riesz",
    "mc_laplace",
    "make_rng",
    "random_dual_points",
]

BLOCK = 8192


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Generator for one stream derived from ``(seed, stream)``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream,))))


def _run(draw: Callable[[int, np.random.Generator], np.ndarray], n: int, rng, streams: int):
    if n < 0:
        raise ValueError("sample size must be non-negative")
    if isinstance(rng, np.random.Generator):
        return draw(n, rng)
    if rng is None:
        raise ValueError("a seed or generator is required")
    seed = int(rng)
    counts = [BLOCK] * (n // BLOCK) + ([n % BLOCK] if n % BLOCK else [])
    jobs = list(enumerate(counts))
    if not jobs:
        return draw(0, make_rng(seed, 0))
    work = lambda job: draw(job[1], make_rng(seed, job[0]))
    if streams > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=streams) as pool:
            parts = list(pool.map(work, jobs))
    else:
        parts = [work(j) for j in jobs]
    return np.concatenate(parts, axis=0)


# ----------------------------------------------------------------------
# closed forms
# ----------------------------------------------------------------------
def log_laplace_closed(alg: Algebra, chi, theta: AlgebraElement | None = None,
                       check: bool = True) -> float:
    """``log Delta_chi(theta^{-1}) = -sum_k 2 lambda_k log u_kk``, ``theta = U* U``."""
    lam = as_multiplier(alg, chi)
    if check and not in_xi(alg, lam):
        raise NotInXi(f"{lam} is not in the Gindikin set")
    if theta is None:
        return 0.0
    u = cholesky_dual(theta).coef[: alg.n]
    lv = lam.array
    return float(-np.sum(2.0 * lv * np.log(u)))


def laplace_closed(alg: Algebra, chi, theta: AlgebraElement | None = None,
                   check: bool = True) -> float:
    """Laplace transform ``E exp(-<theta, Z>)`` of the Riesz measure.

    Parameters
    ----------
    alg : Algebra
    chi : multiplier in the Gindikin set
    theta : AlgebraElement, optional
        Point of the dual cone; defaults to the unit.

    Raises
    ------
    NotInXi, NotInDualCone
    """
    return math.exp(log_laplace_closed(alg, chi, theta, check))


def laplace_closed_via_inverse(alg: Algebra, chi, theta: AlgebraElement) -> float:
    """Same value computed as ``Delta_chi`` of the primal element ``theta^{-1}``."""
    from .power import gen_power

    return gen_power(inverse_dual(theta), as_multiplier(alg, chi))


def _log_density_rows(alg: Algebra, lam: Multiplier, Z: np.ndarray) -> np.ndarray:
    T, ok = cholesky_batch(alg, Z)
    nvec = np.array([alg.dims.n[lab] for lab in alg.poset.order])
    expo = lam.array - nvec
    out = np.full(Z.shape[0], -np.inf)
    if ok.any():
        d = T[ok][:, : alg.n]
        out[ok] = np.sum(2.0 * expo * np.log(d), axis=1) - log_gamma_cone(alg, lam)
    return out


def log_density_ac(alg: Algebra, chi, Z) -> np.ndarray | float:
    """Log of :func:`density_ac`; ``-inf`` outside the open cone."""
    lam = as_multiplier(alg, chi)
    if not is_absolutely_continuous(alg, lam):
        raise NotAbsolutelyContinuous(f"{lam} does not give an absolutely continuous measure")
    coef = Z.coef if isinstance(Z, AlgebraElement) else np.asarray(Z, dtype=float)
    rows = _log_density_rows(alg, lam, np.atleast_2d(coef))
    return float(rows[0]) if coef.ndim == 1 else rows


def density_ac(alg: Algebra, chi, Z) -> np.ndarray | float:
    """Density ``Delta_{chi - n}(Z) / Gamma_P(chi)`` w.r.t. Lebesgue measure.

    The Riesz measure itself (no exponential tilt): ``Delta_{chi+chi..}``
    with ``chi.. = (-n_i)``. Zero outside the cone.

    Raises
    ------
    NotAbsolutelyContinuous
    """
    return np.exp(log_density_ac(alg, chi, Z))


# ----------------------------------------------------------------------
# samplers
# ----------------------------------------------------------------------
def _bartlett(alg: Algebra, shapes: np.ndarray, active: np.ndarray, n: int,
              rng: np.random.Generator) -> np.ndarray:
    """Factors with ``t_jj^2 ~ Gamma(shape_j)`` and N(0, 1/2) below active pivots."""
    T = np.zeros((n, alg.dim))
    T[:, : alg.n] = 1.0
    cols = []
    for j in range(alg.n):
        if not active[j]:
            continue
        T[:, j] = np.sqrt(rng.standard_gamma(shapes[j], size=n))
        for i in range(j + 1, alg.n):
            if alg.has_block(i, j):
                sl = alg.slot(i, j)
                cols.extend(range(sl.start, sl.stop))
    if cols:
        cols = np.array(cols)
        T[:, cols] = rng.standard_normal((n, cols.size)) * math.sqrt(0.5)
    return T


def _ac_factors(alg: Algebra, lam: Multiplier, n: int, rng) -> np.ndarray:
    shapes = np.array([
        float(v) - alg.dims.n_below[lab] / 2 for lab, v in zip(alg.poset.order, lam.values)
    ])
    return _bartlett(alg, shapes, np.ones(alg.n, dtype=bool), n, rng)


def sample_standard_ac(alg: Algebra, chi, n: int, rng, streams: int = 1) -> np.ndarray:
    """Generalized Bartlett draws from the Riesz law tilted at the unit.

    ``Z = T T*`` with ``t_jj^2 ~ Gamma(lambda_j - n_{j.}/2)`` and
    independent N(0, 1/2) sub-diagonal coordinates.

    Raises
    ------
    NotAbsolutelyContinuous
    """
    lam = as_multiplier(alg, chi)
    if not is_absolutely_continuous(alg, lam):
        raise NotAbsolutelyContinuous(f"{lam} does not give an absolutely continuous measure")
    return _run(lambda k, g: alg.gram(_ac_factors(alg, lam, k, g)), n, rng, streams)


def _component_factors(alg: Algebra, anchor, psi: OrbitSignature, lam: Multiplier,
                       n: int, rng) -> np.ndarray:
    prof = n_profile(alg, anchor, psi)
    shapes = np.zeros(alg.n)
    active = np.array(psi.values, dtype=bool)
    for j, lab in enumerate(alg.poset.order):
        if active[j]:
            shapes[j] = float(lam.values[j]) - prof.n[lab] / 2
    return _bartlett(alg, shapes, active, n, rng)


def sample_orbit_component(alg: Algebra, anchor, psi, chi_i, n: int, rng,
                           streams: int = 1) -> np.ndarray:
    """Draws of one component measure, supported on a boundary orbit.

    Parameters
    ----------
    anchor : label
        Root or separator carrying the component.
    psi : OrbitSignature or None
        Signature of the component; ``None`` means "derive it".
    chi_i : multiplier in ``Xi(anchor, psi)``

    Raises
    ------
    NotInXiComponent
        If ``chi_i`` is not in ``Xi(anchor, psi)``.
    """
    lam = as_multiplier(alg, chi_i)
    found = xi_component_check(alg, anchor, lam)
    if found is None:
        raise NotInXiComponent(f"{lam} is not in any Xi({anchor}, psi)")
    sig, _ = found
    if psi is not None:
        vals = psi.values if isinstance(psi, OrbitSignature) else tuple(psi)
        if tuple(vals) != sig.values:
            raise NotInXiComponent(f"{lam} is not in Xi({anchor}, {vals})")
    if sig.size == 0:
        return _run(lambda k, g: np.zeros((k, alg.dim)), n, rng, streams)
    return _run(
        lambda k, g: orbit_points(alg, _component_factors(alg, anchor, sig, lam, k, g), sig.values),
        n, rng, streams,
    )


def _transport(alg: Algebra, S: np.ndarray | None, V: np.ndarray, psi) -> np.ndarray:
    if S is not None:
        V = alg.mul(S, V)
        V[:, alg.dim_H:] = 0.0
    return orbit_points(alg, V, psi)


def sample_riesz(alg: Algebra, chi, theta: AlgebraElement | None, n: int, rng,
                 streams: int = 1, witness: XiWitness | None = None) -> np.ndarray:
    """Draws from the Riesz law tilted by ``exp(-<theta, Z>)``.

    The draw at the unit is a sum of independent component draws (one
    Bartlett draw when ``chi`` is absolutely continuous and no witness is
    forced); the tilt moves each component through its factor, ``V`` to
    ``U^{-1} V`` where ``theta = U* U``.

    Parameters
    ----------
    alg : Algebra
    chi : multiplier in the Gindikin set
    theta : AlgebraElement or None
        Dual-cone tilt; ``None`` is the unit.
    n : int
    rng : Generator or int seed
    streams : int
        Worker count for seeded runs; does not change the output.
    witness : XiWitness, optional
        Decomposition to sample through. Defaults to the first witness.

    Raises
    ------
    NotInXi, NotInDualCone
    """
    lam = as_multiplier(alg, chi)
    S = None
    if theta is not None:
        U = cholesky_dual(theta)
        S = tri_invert(U).coef[None, :]
    if witness is None and is_absolutely_continuous(alg, lam):
        ones = (1,) * alg.n
        return _run(lambda k, g: _transport(alg, S, _ac_factors(alg, lam, k, g), ones),
                    n, rng, streams)
    if witness is None:
        witness = xi_membership(alg, lam)
        if witness is None:
            raise NotInXi(f"{lam} is not in the Gindikin set")
    elif witness.total() != lam:
        raise NotInXi("witness does not sum to the multiplier")
    parts = [(a, witness.psi[a], witness.chi[a]) for a in witness.psi]
    parts = [(a, psi, c) for a, psi, c in parts if psi.size > 0]

    def draw(k, g):
        Z = np.zeros((k, alg.dim))
        for a, psi, c in parts:
            tl = xi_component_check(alg, a, c)
            if tl is None or tl[0].values != psi.values:
                raise NotInXiComponent(f"witness component at {a} is invalid")
            V = _component_factors(alg, a, psi, c, k, g)
            Z += _transport(alg, S, V, psi.values)
        return Z

    return _run(draw, n, rng, streams)


def mc_laplace(alg: Algebra, draws: np.ndarray, s: AlgebraElement) -> tuple[float, float]:
    """Sample mean and standard error of ``exp(-<s, Z>)`` over the draws.

    Raises
    ------
    EmptySample
    """
    draws = np.atleast_2d(np.asarray(draws, dtype=float))
    if draws.shape[0] == 0:
        raise EmptySample("no draws")
    w = s.coef[alg.swap]
    vals = np.exp(-(draws @ w))
    est = float(vals.mean())
    if vals.size < 2:
        return est, 0.0
    return est, float(vals.std(ddof=1) / math.sqrt(vals.size))


def random_dual_points(alg: Algebra, k: int, rng, diag=(0.3, 1.0), spread: float = 0.3) -> list:
    """Random dual-cone points ``U* U`` for Laplace test points.

    ``U`` has diagonal uniform on ``diag`` and Gaussian pair entries with
    standard deviation ``spread``.
    """
    rng = np.random.default_rng(rng)
    out = []
    for _ in range(k):
        u = np.zeros(alg.dim)
        u[: alg.n] = rng.uniform(*diag, size=alg.n)
        u[alg.n: alg.dim_H] = spread * rng.standard_normal(alg.dim_H - alg.n)
        out.append(AlgebraElement(alg, alg.gram_dual(u)))
    return out

