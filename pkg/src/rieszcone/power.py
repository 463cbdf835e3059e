"""Principal minors, generalized power functions and gamma functions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np
from scipy.special import gammaln

from .algebra import Algebra, AlgebraElement
from .errors import Divergent, MultiplierOutsideXpsi, SpecError, SupportViolation
from .poset import Poset
from .triangular import LowerTriangular, OrbitSignature, cholesky

__all__ = [
    "Multiplier",
    "MinorTable",
    "ExponentProfile",
    "minors",
    "gen_power",
    "log_gen_power",
    "n_profile",
    "gamma_orbit",
    "log_gamma_orbit",
    "gamma_cone",
    "log_gamma_cone",
]


class Multiplier:
    """Real values ``lambda_i`` indexed by the poset.

    Parameters
    ----------
    poset : Poset
    values : mapping or sequence
        A mapping ``label -> value`` (missing labels are 0), or a sequence
        in the poset's element order.
    """

    __slots__ = ("poset", "values")

    def __init__(self, poset: Poset, values):
        if isinstance(values, Multiplier):
            values = values.as_dict()
        if isinstance(values, Mapping):
            unknown = [k for k in values if str(k) not in poset.index]
            if unknown:
                raise SpecError(f"unknown labels in multiplier: {unknown}")
            vals = {str(k): v for k, v in values.items()}
            seq = [vals.get(lab, 0) for lab in poset.order]
        else:
            seq_in = list(values)
            if len(seq_in) != len(poset):
                raise SpecError(f"multiplier needs {len(poset)} values, got {len(seq_in)}")
            by_label = dict(zip(poset.elements, seq_in))
            seq = [by_label[lab] for lab in poset.order]
        for v in seq:
            if not math.isfinite(float(v)):
                raise SpecError("multiplier values must be finite")
        self.poset = poset
        # exact rationals; floats convert to their exact binary value
        self.values = tuple(Fraction(v) if not isinstance(v, Fraction) else v for v in seq)

    @property
    def array(self) -> np.ndarray:
        """Values in linear-extension order."""
        return np.array([float(v) for v in self.values])

    def as_dict(self) -> dict:
        return dict(zip(self.poset.order, self.values))

    def __getitem__(self, label) -> Fraction:
        return self.values[self.poset.index[str(label)]]

    def __add__(self, other: "Multiplier") -> "Multiplier":
        return Multiplier(self.poset, [a + b for a, b in zip(self.values, other.values)])

    def restrict(self, mask) -> "Multiplier":
        vals = [v if m else Fraction(0) for v, m in zip(self.values, mask)]
        return Multiplier._raw(self.poset, vals)

    def support(self) -> np.ndarray:
        return np.array([v != 0 for v in self.values])

    def is_zero(self) -> bool:
        return all(v == 0 for v in self.values)

    @classmethod
    def _raw(cls, poset, vals_in_order):
        obj = cls.__new__(cls)
        obj.poset = poset
        obj.values = tuple(Fraction(v) for v in vals_in_order)
        return obj

    def __eq__(self, other) -> bool:
        return isinstance(other, Multiplier) and self.poset == other.poset and self.values == other.values

    def __hash__(self):
        return hash(self.values)

    def __repr__(self) -> str:
        body = ", ".join(f"{k}: {float(v):g}" for k, v in self.as_dict().items())
        return f"Multiplier({{{body}}})"


def as_multiplier(alg_or_poset, chi) -> Multiplier:
    p = alg_or_poset.poset if isinstance(alg_or_poset, Algebra) else alg_or_poset
    if isinstance(chi, Multiplier):
        return chi
    return Multiplier(p, chi)


@dataclass(frozen=True)
class MinorTable:
    """Large and strict principal minors keyed by label, and ``det X``."""

    large: Mapping[str, float]
    strict: Mapping[str, float]
    det: float


@dataclass(frozen=True)
class ExponentProfile:
    """``n_j^{i,psi}`` on the relevant up-set, with ``|psi|`` and ``|n^psi|``."""

    n: Mapping[str, int]
    size: int
    total: int


def minors(X: AlgebraElement, T: LowerTriangular | None = None) -> MinorTable:
    """Principal minors ``Delta_{<=k}`` and ``Delta_{<k}`` through the factor."""
    if T is None:
        T = cholesky(X)
    alg = X.algebra
    p = alg.poset
    d2 = T.coef[: alg.n] ** 2
    large, strict = {}, {}
    for k, lab in enumerate(p.order):
        large[lab] = float(np.prod(d2[p.down(k)]))
        strict[lab] = float(np.prod(d2[p.down(k, strict=True)]))
    return MinorTable(large, strict, float(np.prod(d2)))


def _scope_mask(alg: Algebra, scope) -> np.ndarray:
    if scope == "full" or scope is None:
        return np.ones(alg.n, dtype=bool)
    kind = scope[0]
    if kind in ("upset", "orbit"):
        return alg.poset.up(alg.idx(scope[1]))
    raise ValueError(f"unknown scope {scope!r}")


def _check_xpsi(alg: Algebra, lam: Multiplier, psi: Sequence[int]):
    for lab, v, s in zip(alg.poset.order, lam.values, psi):
        if s == 0 and v != 0:
            raise MultiplierOutsideXpsi(f"lambda_{lab} = {float(v)} but psi({lab}) = 0")


def log_gen_power(X, chi, scope="full") -> float:
    """Logarithm of :func:`gen_power`."""
    alg = X.algebra
    lam = as_multiplier(alg, chi)
    mask = _scope_mask(alg, scope)
    if scope not in ("full", None) and scope[0] == "orbit":
        if not isinstance(X, LowerTriangular):
            raise TypeError("orbit scope takes the factor T of T e_psi T*")
        psi = scope[2].values if isinstance(scope[2], OrbitSignature) else tuple(scope[2])
        _check_xpsi(alg, lam.restrict(mask), psi)
        t = X.coef[: alg.n]
    else:
        t = (X if isinstance(X, LowerTriangular) else cholesky(X)).coef[: alg.n]
    lv = lam.array
    keep = mask & (lv != 0)
    return float(np.sum(2.0 * lv[keep] * np.log(t[keep])))


def gen_power(X, chi, scope="full") -> float:
    """Generalized power ``prod_k t_kk^{2 lambda_k}`` over a scope.

    Parameters
    ----------
    X : AlgebraElement or LowerTriangular
        A cone element (factored here) or its factor. For the orbit scope,
        the factor ``T`` of the orbit point ``T e_psi T*``.
    chi : Multiplier, mapping or sequence
    scope : {"full", ("upset", i), ("orbit", i, psi)}

    Raises
    ------
    NotInCone
    MultiplierOutsideXpsi
        Orbit scope with ``lambda_j != 0`` where ``psi(j) = 0``.
    """
    return math.exp(log_gen_power(X, chi, scope))


def n_profile(alg: Algebra, anchor, psi) -> ExponentProfile:
    """``n_j^{i,psi} = sum_{k < j} psi(k) n_kj`` for ``j`` in the up-set of ``i``.

    With ``anchor=None`` every ``j`` is reported.
    """
    p = alg.poset
    vals = psi.values if isinstance(psi, OrbitSignature) else tuple(int(v) for v in psi)
    mask = np.ones(alg.n, dtype=bool) if anchor is None else p.up(alg.idx(anchor))
    out = {}
    for j in range(alg.n):
        if not mask[j]:
            continue
        tot = 0
        for k in range(j):
            if vals[k] and p.leq[k, j]:
                tot += alg.pair_dim[(j, k)]
        out[p.order[j]] = tot
    size = sum(v for v, m in zip(vals, mask) if m)
    total = sum(out.values())
    return ExponentProfile(out, size, total)


def log_gamma_orbit(alg: Algebra, anchor, psi, chi) -> float:
    """Logarithm of :func:`gamma_orbit`."""
    vals = psi.values if isinstance(psi, OrbitSignature) else tuple(int(v) for v in psi)
    lam = as_multiplier(alg, chi)
    mask = np.ones(alg.n, dtype=bool) if anchor is None else alg.poset.up(alg.idx(anchor))
    if any(v != 0 for v, m in zip(lam.values, mask) if not m):
        raise SupportViolation("multiplier is not supported on the up-set of the anchor")
    if any(s and not m for s, m in zip(vals, mask)):
        raise ValueError("signature is not supported on the up-set of the anchor")
    _check_xpsi(alg, lam, vals)
    prof = n_profile(alg, anchor, vals)
    out = 0.0
    active = 0
    for j, lab in enumerate(alg.poset.order):
        if not (mask[j] and vals[j]):
            continue
        shape = lam.values[j] - Fraction(prof.n[lab], 2)
        if shape <= 0:
            raise Divergent(f"lambda_{lab} = {float(lam.values[j])} must exceed {prof.n[lab] / 2}")
        out += float(gammaln(float(shape)))
        active += 1
    return out - active * math.log(2.0) + 0.5 * prof.total * math.log(math.pi)


def gamma_orbit(alg: Algebra, anchor, psi, chi) -> float:
    """Gamma function of a boundary orbit.

    ``2^{-|psi|} pi^{|n^psi|/2} prod_{psi(j)=1} Gamma(lambda_j - n_j/2)``
    with ``n_j = n_j^{i,psi}``; equal to 1 for ``psi = 0``.

    Parameters
    ----------
    alg : Algebra
    anchor : label or None
        The element ``i`` whose up-set carries the orbit.
    psi : OrbitSignature or sequence
    chi : multiplier supported on the up-set, zero where ``psi`` vanishes.

    Raises
    ------
    Divergent
    MultiplierOutsideXpsi
    """
    return math.exp(log_gamma_orbit(alg, anchor, psi, chi))


def log_gamma_cone(alg: Algebra, chi) -> float:
    """Logarithm of :func:`gamma_cone`."""
    lam = as_multiplier(alg, chi)
    dims = alg.dims
    out = 0.5 * (dims.n_total - alg.n) * math.log(math.pi)
    for lab, v in zip(alg.poset.order, lam.values):
        shape = v - Fraction(dims.n_below[lab], 2)
        if shape <= 0:
            raise Divergent(f"lambda_{lab} = {float(v)} must exceed {dims.n_below[lab] / 2}")
        out += float(gammaln(float(shape)))
    return out


def gamma_cone(alg: Algebra, chi) -> float:
    """``pi^{(n_. - |I|)/2} prod_i Gamma(lambda_i - n_{i.}/2)``.

    Raises
    ------
    Divergent
        If some ``lambda_i <= n_{i.}/2``.
    """
    val = log_gamma_cone(alg, chi)
    if val > 709.0:
        raise OverflowError("gamma_cone overflows a double; use log_gamma_cone")
    return math.exp(val)
