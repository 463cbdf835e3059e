"""Finite posets: closure, linear extension and the order-derived sets.

Labels are stored as strings. Internally every element is addressed by its
position in a fixed linear extension, so ``leq[a, b]`` means that the
``a``-th element of :attr:`Poset.order` is below or equal to the ``b``-th.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import CycleDetected, DuplicateElement, SpecError, UnknownLabelInRelation

__all__ = [
    "Poset",
    "OrderProfile",
    "StructureSets",
    "parse_poset",
    "order_sets",
    "structure_sets",
    "opposite_poset",
    "subposet",
    "chain",
    "antichain",
    "random_poset",
    "scalar_obstruction",
]


class Poset:
    """A finite poset with a deterministic linear extension.

    Parameters
    ----------
    elements : sequence
        Distinct labels. Their order is the tie-breaking order of the
        topological sort.
    relations : iterable of pairs
        Strict pairs ``(i, j)`` meaning ``i < j``. Covers or the full
        relation may be given; the transitive closure is computed here.

    Raises
    ------
    DuplicateElement, UnknownLabelInRelation, CycleDetected
    """

    def __init__(self, elements: Sequence, relations: Iterable[tuple] = ()):
        labels = [str(e) for e in elements]
        if len(set(labels)) != len(labels):
            dup = next(x for x in labels if labels.count(x) > 1)
            raise DuplicateElement(f"duplicate element {dup!r}")
        self.elements: tuple[str, ...] = tuple(labels)
        pos = {lab: k for k, lab in enumerate(labels)}
        n = len(labels)
        adj = np.zeros((n, n), dtype=bool)
        for pair in relations:
            a, b = (str(x) for x in pair)
            for x in (a, b):
                if x not in pos:
                    raise UnknownLabelInRelation(f"unknown label {x!r} in relation ({a}, {b})")
            if a == b:
                raise CycleDetected(f"reflexive strict pair ({a}, {a})")
            adj[pos[a], pos[b]] = True

        # Warshall closure on the given label order
        clo = adj | np.eye(n, dtype=bool)
        for k in range(n):
            clo |= clo[:, [k]] & clo[[k], :]
        strict = clo & ~np.eye(n, dtype=bool)
        if np.any(strict & strict.T):
            a, b = np.argwhere(strict & strict.T)[0]
            raise CycleDetected(f"cycle through {labels[a]!r} and {labels[b]!r}")

        # stable topological sort, ties broken by label order
        indeg = strict.sum(axis=0)
        placed = np.zeros(n, dtype=bool)
        ext = []
        for _ in range(n):
            k = next(k for k in range(n) if not placed[k] and indeg[k] == 0)
            placed[k] = True
            ext.append(k)
            indeg = indeg - strict[k]
        self.order: tuple[str, ...] = tuple(labels[k] for k in ext)
        self.index: dict[str, int] = {lab: a for a, lab in enumerate(self.order)}
        perm = np.array(ext, dtype=int)
        self.leq: np.ndarray = clo[np.ix_(perm, perm)]
        self.leq.setflags(write=False)

    # basic queries ------------------------------------------------------
    def __len__(self) -> int:
        return len(self.elements)

    def __repr__(self) -> str:
        return f"Poset(elements={list(self.elements)}, relations={self.relations()})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poset):
            return NotImplemented
        return self.elements == other.elements and set(self.relations()) == set(other.relations())

    def __hash__(self) -> int:
        return hash((self.elements, frozenset(self.relations())))

    def lt(self, a: str, b: str) -> bool:
        """Strict order between two labels."""
        ia, ib = self.index[str(a)], self.index[str(b)]
        return ia != ib and bool(self.leq[ia, ib])

    def comparable(self, a: str, b: str) -> bool:
        ia, ib = self.index[str(a)], self.index[str(b)]
        return bool(self.leq[ia, ib] or self.leq[ib, ia])

    def relations(self) -> list[tuple[str, str]]:
        """All strict pairs of the closure, in linear-extension order."""
        n = len(self)
        return [
            (self.order[a], self.order[b])
            for a in range(n)
            for b in range(n)
            if a != b and self.leq[a, b]
        ]

    def lower_pairs(self) -> list[tuple[int, int]]:
        """Index pairs ``(i, j)`` with ``j < i``, ordered by ``(i, j)``."""
        n = len(self)
        return [(i, j) for i in range(n) for j in range(i) if self.leq[j, i]]

    def up(self, i: int, strict: bool = False) -> np.ndarray:
        """Boolean mask of the up-set of index ``i``."""
        m = self.leq[i].copy()
        if strict:
            m[i] = False
        return m

    def down(self, i: int, strict: bool = False) -> np.ndarray:
        m = self.leq[:, i].copy()
        if strict:
            m[i] = False
        return m

    def to_dict(self) -> dict:
        return {"elements": list(self.elements), "relations": [list(r) for r in self.relations()]}


@dataclass(frozen=True)
class OrderProfile:
    """Down-sets and up-sets of every element, keyed by label."""

    down: Mapping[str, frozenset]
    down_strict: Mapping[str, frozenset]
    up: Mapping[str, frozenset]
    up_strict: Mapping[str, frozenset]
    rank_up: Mapping[str, int]


@dataclass(frozen=True)
class StructureSets:
    """Separators, roots and child sets.

    Attributes
    ----------
    separators : frozenset
        Elements lying in the up-sets of two other distinct elements.
    separators_of : mapping
        ``S_i``, the separators inside the up-set of ``i``.
    roots : frozenset
        All minimal elements.
    children : mapping
        ``M_i``, the elements whose strict down-set is exactly ``{i}``.
    """

    separators: frozenset
    separators_of: Mapping[str, frozenset]
    roots: frozenset
    children: Mapping[str, frozenset]

    def anchors(self, p: Poset) -> list[str]:
        """Roots and separators in linear-extension order."""
        keep = self.roots | self.separators
        return [x for x in p.order if x in keep]


def _labels(p: Poset, mask: np.ndarray) -> frozenset:
    return frozenset(p.order[a] for a in np.flatnonzero(mask))


def order_sets(p: Poset) -> OrderProfile:
    """Compute the four order sets of each element by closure lookup."""
    down, down_s, up, up_s, rank = {}, {}, {}, {}, {}
    for a, lab in enumerate(p.order):
        down[lab] = _labels(p, p.down(a))
        down_s[lab] = _labels(p, p.down(a, strict=True))
        up[lab] = _labels(p, p.up(a))
        up_s[lab] = _labels(p, p.up(a, strict=True))
        rank[lab] = len(up[lab])
    return OrderProfile(down, down_s, up, up_s, rank)


def structure_sets(p: Poset) -> StructureSets:
    """Separators, per-element separator sets, minimal elements and child sets."""
    n = len(p)
    sep = np.zeros(n, dtype=bool)
    for j in range(n):
        # j is above two distinct elements other than itself
        below = [a for a in range(n) if a != j and p.leq[a, j]]
        sep[j] = len(below) >= 2
    seps = _labels(p, sep)
    sep_of = {p.order[i]: _labels(p, sep & p.up(i)) for i in range(n)}
    roots = frozenset(p.order[i] for i in range(n) if not p.down(i, strict=True).any())
    children = {}
    for i in range(n):
        kids = [
            j for j in range(n)
            if p.down(j, strict=True).sum() == 1 and p.down(j, strict=True)[i]
        ]
        children[p.order[i]] = frozenset(p.order[j] for j in kids)
    return StructureSets(seps, sep_of, roots, children)


def opposite_poset(p: Poset) -> Poset:
    """Reverse every strict pair."""
    return Poset(p.elements, [(b, a) for a, b in p.relations()])


def subposet(p: Poset, labels: Iterable) -> Poset:
    """Induced subposet on ``labels``, keeping the original label order."""
    keep = {str(x) for x in labels}
    elems = [x for x in p.elements if x in keep]
    rel = [(a, b) for a, b in p.relations() if a in keep and b in keep]
    return Poset(elems, rel)


def chain(n: int) -> Poset:
    """Total order ``1 < 2 < ... < n``."""
    labs = [str(k) for k in range(1, n + 1)]
    return Poset(labs, list(zip(labs, labs[1:])))


def antichain(n: int) -> Poset:
    return Poset([str(k) for k in range(1, n + 1)], [])


def random_poset(n: int, p_edge: float, rng: np.random.Generator) -> Poset:
    """Random poset: random DAG on a shuffled label order, then closure."""
    labs = [str(k) for k in range(1, n + 1)]
    perm = rng.permutation(n)
    rel = [
        (labs[perm[a]], labs[perm[b]])
        for a in range(n)
        for b in range(a + 1, n)
        if rng.random() < p_edge
    ]
    return Poset(labs, rel)


def scalar_obstruction(p: Poset) -> tuple[str, str, str, str] | None:
    """Find a configuration that breaks ``T(UU*) = (TU)U*`` for scalar entries.

    Returns labels ``(nu, mu, j, i)`` with ``nu < mu < i``, ``nu < j < i`` and
    ``mu``, ``j`` incomparable, or ``None`` when no such pattern exists. The
    masked matrix product satisfies every algebra axiom exactly when this
    returns ``None``.
    """
    n = len(p)
    for i in range(n):
        below = [a for a in range(n) if a != i and p.leq[a, i]]
        for mu, j in itertools.combinations(below, 2):
            if p.leq[mu, j] or p.leq[j, mu]:
                continue
            for nu in range(n):
                if p.leq[nu, mu] and p.leq[nu, j]:
                    return p.order[nu], p.order[mu], p.order[j], p.order[i]
    return None


def parse_poset(spec_text: str | Mapping) -> Poset:
    """Build a poset from a cone-spec document (JSON text or parsed mapping).

    Only the ``elements`` and ``relations`` keys are read here.
    """
    doc = spec_text
    if isinstance(spec_text, (str, bytes)):
        try:
            doc = json.loads(spec_text)
        except json.JSONDecodeError as exc:
            raise SpecError(f"cone spec is not valid JSON: {exc}") from exc
    if not isinstance(doc, Mapping) or "elements" not in doc:
        raise SpecError("cone spec needs an 'elements' list")
    rel = doc.get("relations", [])
    for r in rel:
        if len(r) != 2:
            raise SpecError(f"relation {r!r} is not a pair")
    return Poset(doc["elements"], [tuple(r) for r in rel])
