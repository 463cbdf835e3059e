"""Signature families, the Gindikin set and measure classification.

A multiplier ``chi`` belongs to the Gindikin set when it splits as a sum of
component multipliers ``chi_i``, one per root or separator ``i``, each
lying in some ``Xi(i, psi_i)``. All comparisons use exact rationals.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping

import numpy as np

from .algebra import Algebra
from .errors import SupportViolation
from .poset import structure_sets
from .power import Multiplier, as_multiplier, n_profile
from .triangular import OrbitSignature

__all__ = [
    "SignatureFamily",
    "XiWitness",
    "MeasureKind",
    "Classification",
    "enumerate_signatures",
    "xi_component_check",
    "xi_membership",
    "in_xi",
    "xi_witnesses",
    "witness_from_tuple",
    "classify_measure",
    "is_absolutely_continuous",
]


@dataclass(frozen=True)
class SignatureFamily:
    """For each anchor (root or separator), its signatures and ``1_i``.

    Attributes
    ----------
    anchors : tuple of str
        Roots and separators in linear-extension order.
    free : mapping
        Labels where the signatures of each anchor may be nonzero.
    signatures : mapping
        ``eps^i``, lexicographic over the free slots with 0 before 1.
    ones : mapping
        The distinguished all-ones signature ``1_i``.
    """

    anchors: tuple
    free: Mapping[str, tuple]
    signatures: Mapping[str, tuple]
    ones: Mapping[str, OrbitSignature]


def enumerate_signatures(alg: Algebra) -> SignatureFamily:
    """Build ``eps^i`` for every root and separator of the poset."""
    p = alg.poset
    ss = structure_sets(p)
    anchors = tuple(ss.anchors(p))
    free, sigs, ones = {}, {}, {}
    for a in anchors:
        up = p.up(p.index[a])
        slots = tuple(
            lab for k, lab in enumerate(p.order)
            if up[k] and (a in ss.separators or lab not in ss.separators)
        )
        free[a] = slots
        lst = []
        for bits in itertools.product((0, 1), repeat=len(slots)):
            on = dict(zip(slots, bits))
            lst.append(OrbitSignature(tuple(on.get(lab, 0) for lab in p.order), a))
        sigs[a] = tuple(lst)
        ones[a] = OrbitSignature.ones(alg, a)
    return SignatureFamily(anchors, free, sigs, ones)


@dataclass(frozen=True)
class XiWitness:
    """A decomposition ``chi = sum_i chi_i`` with ``chi_i`` in ``Xi(i, psi_i)``."""

    psi: Mapping[str, OrbitSignature]
    chi: Mapping[str, Multiplier]

    def total(self) -> Multiplier:
        parts = list(self.chi.values())
        acc = parts[0]
        for c in parts[1:]:
            acc = acc + c
        return acc

    def tilde(self, alg: Algebra) -> dict:
        """``chi~_i``: zero out the fixed slots of each component."""
        return {a: _tilde(alg, a, self.psi[a], self.chi[a]) for a in self.psi}

    def to_dict(self) -> dict:
        return {
            a: {
                "psi": {lab: v for lab, v in zip(self.chi[a].poset.order, self.psi[a].values)},
                "chi": {lab: float(v) for lab, v in self.chi[a].as_dict().items()},
            }
            for a in self.psi
        }


def _tilde(alg, anchor, psi, chi_i):
    prof = n_profile(alg, anchor, psi)
    vals = []
    for j, lab in enumerate(alg.poset.order):
        v = chi_i.values[j]
        if lab in prof.n and psi.values[j] == 0:
            v = v - Fraction(prof.n[lab], 2)
        vals.append(v)
    return Multiplier._raw(alg.poset, vals)


def xi_component_check(alg: Algebra, anchor, chi_i):
    """Find the signature ``psi`` with ``chi_i`` in ``Xi(anchor, psi)``.

    Scanning the up-set in linear-extension order, the value ``n_j`` at
    each slot only depends on earlier slots, so ``psi`` is forced: it is 0
    where ``lambda_j = n_j/2`` and 1 where ``lambda_j > n_j/2``. In
    particular the signature is unique when it exists.

    Returns
    -------
    (OrbitSignature, Multiplier) or None
        The signature and ``chi~_i``.

    Raises
    ------
    SupportViolation
        If ``chi_i`` is nonzero off the up-set of ``anchor``.
    """
    p = alg.poset
    anchor = str(anchor)
    lam = as_multiplier(alg, chi_i)
    up = p.up(p.index[anchor])
    if any(v != 0 and not u for v, u in zip(lam.values, up)):
        raise SupportViolation(f"multiplier not supported on the up-set of {anchor}")
    ss = structure_sets(p)
    forced_zero = anchor not in ss.separators
    psi = [0] * alg.n
    for j in range(alg.n):
        if not up[j]:
            continue
        nj = sum(alg.pair_dim[(j, k)] for k in range(j) if psi[k] and p.leq[k, j])
        half = Fraction(nj, 2)
        v = lam.values[j]
        if v == half:
            psi[j] = 0
        elif v > half and not (forced_zero and p.order[j] in ss.separators):
            psi[j] = 1
        else:
            return None
    sig = OrbitSignature(tuple(psi), anchor)
    return sig, _tilde(alg, anchor, sig, lam)


def _tuple_tables(alg: Algebra):
    """Per ψ-tuple, the fixed baseline and strict-slot count at every coordinate."""
    cache = alg.__dict__.setdefault("_xi_tables", None)
    if cache is not None:
        return cache
    fam = enumerate_signatures(alg)
    per_anchor = []
    for a in fam.anchors:
        rows = []
        up = alg.poset.up(alg.idx(a))
        for sig in fam.signatures[a]:
            prof = n_profile(alg, a, sig)
            half = [Fraction(prof.n.get(lab, 0), 2) for lab in alg.poset.order]
            strict = [bool(sig.values[j] and up[j]) for j in range(alg.n)]
            rows.append((sig, half, strict))
        per_anchor.append(rows)
    combos = list(itertools.product(*per_anchor))
    # twice the baseline is an integer: sum of n_j over the slots
    base2 = np.array(
        [[int(sum(2 * r[1][j] for r in combo)) for j in range(alg.n)] for combo in combos],
        dtype=np.int64,
    ).reshape(len(combos), alg.n)
    nstrict = np.array(
        [[sum(r[2][j] for r in combo) for j in range(alg.n)] for combo in combos],
        dtype=np.int64,
    ).reshape(len(combos), alg.n)
    out = (fam, combos, base2, nstrict)
    alg.__dict__["_xi_tables"] = out
    return out


def _feasible_mask(lam: Multiplier, base2, nstrict) -> np.ndarray:
    """Exact feasibility of every tuple, comparing ``2 lambda_j`` to integers."""
    two = [2 * v for v in lam.values]
    fl = np.array([v.numerator // v.denominator for v in two], dtype=np.int64)
    isint = np.array([v.denominator == 1 for v in two])
    eq = isint & (fl == base2)
    gt = np.where(isint, fl > base2, fl >= base2)
    ok = np.where(nstrict == 0, eq, gt)
    return ok.all(axis=1)


def _feasible(lam, base, nstrict) -> bool:
    for v, b, s in zip(lam.values, base, nstrict):
        if s == 0:
            if v != b:
                return False
        elif v <= b:
            return False
    return True


def witness_from_tuple(alg: Algebra, chi, psis: Mapping, weights: Mapping | None = None):
    """Witness for a given signature per anchor, or ``None`` if infeasible.

    Parameters
    ----------
    psis : mapping
        Anchor label to :class:`OrbitSignature`.
    weights : mapping, optional
        Anchor label to positive weights used to split the excess of each
        coordinate among its strict slots (default: equal split).
    """
    lam = as_multiplier(alg, chi)
    fam = enumerate_signatures(alg)
    p = alg.poset
    halves, strict = {}, {}
    for a in fam.anchors:
        sig = psis[a]
        if sig not in fam.signatures[a]:
            raise ValueError(f"signature {sig.values} is not in the family of {a}")
        prof = n_profile(alg, a, sig)
        halves[a] = [Fraction(prof.n.get(lab, 0), 2) for lab in p.order]
        strict[a] = [bool(sig.values[j]) for j in range(alg.n)]
    base = [sum(halves[a][j] for a in fam.anchors) for j in range(alg.n)]
    ns = [sum(strict[a][j] for a in fam.anchors) for j in range(alg.n)]
    if not _feasible(lam, base, ns):
        return None
    w = {a: Fraction(1) for a in fam.anchors}
    if weights:
        w.update({str(k): Fraction(v) for k, v in weights.items()})
    comps = {}
    for a in fam.anchors:
        vals = []
        for j in range(alg.n):
            v = halves[a][j]
            if strict[a][j]:
                tot = sum(w[b] for b in fam.anchors if strict[b][j])
                v += (lam.values[j] - base[j]) * w[a] / tot
            vals.append(v)
        comps[a] = Multiplier._raw(p, vals)
    return XiWitness({a: psis[a] for a in fam.anchors}, comps)


def xi_witnesses(alg: Algebra, chi) -> Iterator[XiWitness]:
    """All equal-split witnesses, one per feasible signature tuple, in order."""
    lam = as_multiplier(alg, chi)
    fam, combos, base2, nstrict = _tuple_tables(alg)
    for k in np.flatnonzero(_feasible_mask(lam, base2, nstrict)):
        psis = {a: r[0] for a, r in zip(fam.anchors, combos[k])}
        yield witness_from_tuple(alg, lam, psis)


def xi_membership(alg: Algebra, chi) -> XiWitness | None:
    """First feasible witness in lexicographic signature order, or ``None``."""
    return next(xi_witnesses(alg, chi), None)


def in_xi(alg: Algebra, chi) -> bool:
    """Membership test without building the witness."""
    lam = as_multiplier(alg, chi)
    _, _, base2, nstrict = _tuple_tables(alg)
    return bool(_feasible_mask(lam, base2, nstrict).any())


def is_absolutely_continuous(alg: Algebra, chi) -> bool:
    """``lambda_i > n_{i.}/2`` for every ``i``."""
    lam = as_multiplier(alg, chi)
    return all(
        v > Fraction(alg.dims.n_below[lab], 2) for lab, v in zip(alg.poset.order, lam.values)
    )


class MeasureKind(str, enum.Enum):
    NOT_RIESZ = "NotRiesz"
    DIRAC = "Dirac"
    SINGULAR = "Singular"
    ABSOLUTELY_CONTINUOUS = "AbsolutelyContinuous"


@dataclass(frozen=True)
class Classification:
    kind: MeasureKind
    generates_nef: bool
    witness: XiWitness | None

    def describe(self) -> str:
        words = {
            MeasureKind.NOT_RIESZ: "not a Riesz multiplier",
            MeasureKind.DIRAC: "Dirac measure at 0",
            MeasureKind.SINGULAR: "singular",
            MeasureKind.ABSOLUTELY_CONTINUOUS: "absolutely continuous",
        }[self.kind]
        nef = "generates NEF" if self.generates_nef else "does not generate a NEF"
        return f"{words}, {nef}"


def classify_measure(alg: Algebra, chi) -> Classification:
    """Classify the Riesz measure of ``chi``.

    ``generates_nef`` requires membership and ``lambda_i != 0`` at every
    root and separator.
    """
    lam = as_multiplier(alg, chi)
    wit = xi_membership(alg, lam)
    if wit is None:
        return Classification(MeasureKind.NOT_RIESZ, False, None)
    ss = structure_sets(alg.poset)
    nef = all(lam[a] != 0 for a in ss.anchors(alg.poset))
    if lam.is_zero():
        kind = MeasureKind.DIRAC
    elif is_absolutely_continuous(alg, lam):
        kind = MeasureKind.ABSOLUTELY_CONTINUOUS
    else:
        kind = MeasureKind.SINGULAR
    return Classification(kind, nef, wit)
