"""Vinberg algebras over a finite poset.

An element is stored as one flat coefficient vector. The layout is fixed by
the poset's linear extension:

* ``[0, n)``: the diagonal coefficients ``a_ii``;
* next, the lower pairs ``(i, j)`` with ``j < i``, ordered by ``(i, j)``,
  each occupying ``n_ij`` coordinates;
* last, the upper pairs ``(j, i)`` in the same order.

The first ``dim_H`` coordinates are therefore the canonical coordinates of
a Hermitian element (diagonal then lower pairs). The product is a sparse
bilinear map stored in COO form. Products landing on incomparable pairs are
never generated, so block support is preserved by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import _kernels
from .errors import (
    AlgebraMismatch,
    DimensionMismatch,
    MissingStructureConstant,
    NotHermitian,
    SpecError,
)
from .poset import Poset

__all__ = [
    "DimensionSystem",
    "StructureConstants",
    "Algebra",
    "AlgebraElement",
    "build_algebra",
    "multiply",
    "involute",
    "trace",
    "pairing",
    "dimension_profile",
    "axiom_check",
    "AxiomReport",
]


def _pair_key(key) -> tuple[str, str]:
    if isinstance(key, str):
        parts = key.split("|")
    else:
        parts = list(key)
    if len(parts) != 2:
        raise DimensionMismatch(f"bad pair key {key!r}")
    return str(parts[0]), str(parts[1])


@dataclass(frozen=True)
class DimensionSystem:
    """Pair dimensions and the quantities derived from them.

    Attributes
    ----------
    n_pair : mapping
        ``n_ij`` keyed by ``(i, j)`` labels with ``j < i``.
    n_below : mapping
        ``n_{i.}``, summed over predecessors of ``i``.
    n_above : mapping
        ``n_{.i}``, summed over successors of ``i``.
    n : mapping
        ``n_i = 1 + (n_{i.} + n_{.i}) / 2``.
    n_total : float
        ``n_. = sum_i n_i``, which equals ``dim_H``.
    dim_H : int
    """

    n_pair: Mapping[tuple[str, str], int]
    n_below: Mapping[str, int]
    n_above: Mapping[str, int]
    n: Mapping[str, float]
    n_total: float
    dim_H: int

    def pair(self, a: str, b: str) -> int:
        """``n_ab`` for a comparable pair in either orientation, 0 otherwise."""
        return self.n_pair.get((a, b), self.n_pair.get((b, a), 0))

    @classmethod
    def from_pairs(cls, p: Poset, dims: Mapping | None = None) -> "DimensionSystem":
        given = {}
        for key, val in (dims or {}).items():
            a, b = _pair_key(key)
            if a not in p.index or b not in p.index:
                raise DimensionMismatch(f"dimension given for unknown label in {key!r}")
            if a == b or not p.comparable(a, b):
                raise DimensionMismatch(f"dimension given on incomparable pair {key!r}")
            if int(val) != val or val < 1:
                raise DimensionMismatch(f"n_{a}{b} must be a positive integer, got {val!r}")
            lo_hi = (a, b) if p.lt(b, a) else (b, a)
            if lo_hi in given and given[lo_hi] != int(val):
                raise DimensionMismatch(f"conflicting dimensions for pair {key!r}")
            given[lo_hi] = int(val)
        n_pair = {}
        for i, j in p.lower_pairs():
            lab = (p.order[i], p.order[j])
            n_pair[lab] = given.get(lab, 1)
        below = {x: 0 for x in p.order}
        above = {x: 0 for x in p.order}
        for (a, b), v in n_pair.items():
            below[a] += v
            above[b] += v
        n = {x: 1 + 0.5 * (below[x] + above[x]) for x in p.order}
        dim_H = len(p) + sum(n_pair.values())
        return cls(n_pair, below, above, n, float(sum(n.values())), dim_H)


@dataclass
class StructureConstants:
    """Bilinear maps on chains and involutions on the pair spaces.

    Parameters
    ----------
    products : mapping
        For each chain ``k < j < i`` (labels), a tensor of shape
        ``(n_ik, n_ij, n_jk)`` giving ``E_ij x E_jk -> E_ik``. Keys are
        ``(i, j, k)`` tuples or ``"i|j|k"`` strings.
    involutions : mapping
        Self-inverse matrices ``f_ij`` of shape ``(n_ij, n_ij)``, keyed by
        either orientation of the pair. Missing pairs default to identity.
    preset : str, optional
        ``"scalar"``: every ``n_ij = 1``, real multiplication, identity
        involutions.
    """

    products: Mapping = field(default_factory=dict)
    involutions: Mapping = field(default_factory=dict)
    preset: str | None = None

    @classmethod
    def scalar(cls) -> "StructureConstants":
        return cls(preset="scalar")


class Algebra:
    """Vinberg algebra handle: layout, product tensor and constants.

    Use :func:`build_algebra` to construct one.
    """

    def __init__(self, poset: Poset, dims: DimensionSystem, sc: StructureConstants):
        self.poset = poset
        self.dims = dims
        self.sc = sc
        n = len(poset)
        self.n = n
        self.pairs = poset.lower_pairs()
        self.pair_dim = {}
        for i, j in self.pairs:
            self.pair_dim[(i, j)] = dims.n_pair[(poset.order[i], poset.order[j])]
        # slot offsets
        self._slot = {(i, i): (i, 1) for i in range(n)}
        off = n
        for ij in self.pairs:
            self._slot[ij] = (off, self.pair_dim[ij])
            off += self.pair_dim[ij]
        self.dim_H = off
        for i, j in self.pairs:
            self._slot[(j, i)] = (off, self.pair_dim[(i, j)])
            off += self.pair_dim[(i, j)]
        self.dim = off
        self._check_and_store_constants()
        self._build_involution()
        self._build_product()
        self._build_tables()

    # ------------------------------------------------------------------
    # layout helpers
    # ------------------------------------------------------------------
    def slot(self, i: int, j: int) -> slice:
        """Coordinate slice of block ``(i, j)`` (linear-extension indices)."""
        off, size = self._slot[(i, j)]
        return slice(off, off + size)

    def has_block(self, i: int, j: int) -> bool:
        return (i, j) in self._slot

    def idx(self, label) -> int:
        return self.poset.index[str(label)]

    def _check_and_store_constants(self):
        p = self.poset
        sc = self.sc
        self.F = {}
        self.L = {}
        if sc.preset == "scalar":
            bad = [k for k, v in self.pair_dim.items() if v != 1]
            if bad:
                raise DimensionMismatch("the scalar preset needs n_ij = 1 on every pair")
            for ij in self.pairs:
                self.F[ij] = np.ones((1, 1))
            for h, m, l in self.chains():
                self.L[(h, m, l)] = np.ones((1, 1, 1))
            return
        if sc.preset is not None:
            raise SpecError(f"unknown structure preset {sc.preset!r}")
        inv = {}
        for key, mat in sc.involutions.items():
            a, b = _pair_key(key)
            if a not in p.index or b not in p.index or not p.comparable(a, b) or a == b:
                raise DimensionMismatch(f"involution given on non-pair {key!r}")
            ia, ib = p.index[a], p.index[b]
            ij = (max(ia, ib), min(ia, ib))
            mat = np.asarray(mat, dtype=float).reshape(self.pair_dim[ij], self.pair_dim[ij])
            inv[ij] = mat
        for ij in self.pairs:
            self.F[ij] = inv.get(ij, np.eye(self.pair_dim[ij]))
        prods = {}
        for key, ten in sc.products.items():
            parts = key.split("|") if isinstance(key, str) else [str(x) for x in key]
            if len(parts) != 3 or any(x not in p.index for x in parts):
                raise DimensionMismatch(f"bad chain key {key!r}")
            h, m, l = (p.index[x] for x in parts)
            if not (p.leq[l, m] and p.leq[m, h] and len({h, m, l}) == 3):
                raise DimensionMismatch(f"{key!r} is not a chain k < j < i")
            shape = (self.pair_dim[(h, l)], self.pair_dim[(h, m)], self.pair_dim[(m, l)])
            ten = np.asarray(ten, dtype=float)
            if ten.shape != shape:
                raise DimensionMismatch(f"tensor for {key!r} has shape {ten.shape}, need {shape}")
            prods[(h, m, l)] = ten
        for hml in self.chains():
            if hml not in prods:
                lab = "|".join(p.order[x] for x in hml)
                raise MissingStructureConstant(f"no bilinear map for chain {lab}")
            self.L[hml] = prods[hml]

    def chains(self) -> list[tuple[int, int, int]]:
        """Index triples ``(h, m, l)`` with ``l < m < h``."""
        p = self.poset
        out = []
        for h in range(self.n):
            for m in range(h):
                if not p.leq[m, h]:
                    continue
                for l in range(m):
                    if p.leq[l, m]:
                        out.append((h, m, l))
        return out

    def _build_involution(self):
        # involute(A) = A[perm] transformed by the block matrices
        rows, cols, vals = [], [], []
        for i in range(self.n):
            rows.append(i)
            cols.append(i)
            vals.append(1.0)
        for ij in self.pairs:
            i, j = ij
            F = self.F[ij]
            lo, up = self.slot(i, j), self.slot(j, i)
            for r in range(F.shape[0]):
                for q in range(F.shape[1]):
                    if F[r, q] != 0:
                        rows += [lo.start + r, up.start + r]
                        cols += [up.start + q, lo.start + q]
                        vals += [F[r, q], F[r, q]]
        M = np.zeros((self.dim, self.dim))
        np.add.at(M, (np.array(rows), np.array(cols)), np.array(vals))
        self.inv_matrix = M
        # swap permutation: block (i,j) <-> (j,i), used by the pairing
        swap = np.arange(self.dim)
        for i, j in self.pairs:
            lo, up = self.slot(i, j), self.slot(j, i)
            swap[lo] = np.arange(up.start, up.stop)
            swap[up] = np.arange(lo.start, lo.stop)
        self.swap = swap

    def _triple_tensor(self, i, mu, j):
        """Tensor ``T[a, b, r]`` with ``c_r = sum T a_a b_b`` for distinct indices."""
        h, m, l = sorted((i, mu, j), reverse=True)
        L = self.L[(h, m, l)]
        cyc1 = [(h, m, l), (m, l, h), (l, h, m)]
        cyc2 = [(h, l, m), (l, m, h), (m, h, l)]
        if (i, mu, j) in cyc1:
            tau = np.transpose(L, (1, 2, 0))  # (x_hm, y_ml, z_lh)
            k = cyc1.index((i, mu, j))
        else:
            F_hl, F_hm, F_ml = self.F[(h, l)], self.F[(h, m)], self.F[(m, l)]
            # (x_hl, y_lm, z_mh)
            tau = np.einsum("ra,rpq,pc,qb->abc", F_hl, L, F_hm, F_ml)
            k = cyc2.index((i, mu, j))
        # slots (a, b, w) are the cycle positions k, k+1, k+2
        axes = [k % 3, (k + 1) % 3, (k + 2) % 3]
        return np.transpose(tau, axes)

    def _build_product(self):
        n = self.n
        oi, ai, bi, cc = [], [], [], []

        def add(o, a, b, c):
            oi.append(o)
            ai.append(a)
            bi.append(b)
            cc.append(c)

        blocks = list(self._slot.keys())
        by_row = {}
        for i, mu in blocks:
            by_row.setdefault(i, []).append(mu)
        for i in range(n):
            for mu in by_row[i]:
                for j in by_row[mu]:
                    if not self.has_block(i, j):
                        continue  # incomparable: projected away
                    so, sa, sb = self.slot(i, j), self.slot(i, mu), self.slot(mu, j)
                    if i == mu == j:
                        add(so.start, sa.start, sb.start, 1.0)
                    elif i == mu:
                        for r in range(so.stop - so.start):
                            add(so.start + r, sa.start, sb.start + r, 1.0)
                    elif mu == j:
                        for r in range(so.stop - so.start):
                            add(so.start + r, sa.start + r, sb.start, 1.0)
                    elif i == j:
                        for r in range(sa.stop - sa.start):
                            add(so.start, sa.start + r, sb.start + r, 1.0)
                    else:
                        ten = self._triple_tensor(i, mu, j)
                        for a, b, r in zip(*np.nonzero(ten)):
                            add(so.start + r, sa.start + a, sb.start + b, ten[a, b, r])
        self.coo = (
            np.array(oi, dtype=np.int64),
            np.array(ai, dtype=np.int64),
            np.array(bi, dtype=np.int64),
            np.array(cc, dtype=float),
        )

    # ------------------------------------------------------------------
    # factorization tables
    # ------------------------------------------------------------------
    def _quad_entries(self, a_src, b_src, out_limit):
        """Express ``out = A B`` as a quadratic form in triangular coordinates.

        ``a_src`` and ``b_src`` map a full slot index to a list of
        ``(t_coord, weight)``; the result merges duplicate entries.
        """
        oi, ai, bi, cc = self.coo
        acc = {}
        for o, a, b, c in zip(oi, ai, bi, cc):
            if o >= out_limit or a not in a_src or b not in b_src:
                continue
            for p, wa in a_src[a]:
                for q, wb in b_src[b]:
                    key = (int(o), p, q)
                    acc[key] = acc.get(key, 0.0) + c * wa * wb
        items = [(k, v) for k, v in sorted(acc.items()) if v != 0.0]
        if not items:
            z = np.zeros(0, dtype=np.int64)
            return z, z, z, np.zeros(0)
        o = np.array([k[0] for k, _ in items], dtype=np.int64)
        p = np.array([k[1] for k, _ in items], dtype=np.int64)
        q = np.array([k[2] for k, _ in items], dtype=np.int64)
        c = np.array([v for _, v in items])
        return o, p, q, c

    def _lower_src(self, cols=None):
        """Sources for T (lower) and T* (upper, through the involution)."""
        t_src, ts_src = {}, {}
        for i in range(self.n):
            if cols is None or i in cols:
                t_src[i] = [(i, 1.0)]
                ts_src[i] = [(i, 1.0)]
        for i, j in self.pairs:
            if cols is not None and j not in cols:
                continue
            lo, up = self.slot(i, j), self.slot(j, i)
            F = self.F[(i, j)]
            for r in range(lo.stop - lo.start):
                t_src[lo.start + r] = [(lo.start + r, 1.0)]
                ts_src[up.start + r] = [
                    (lo.start + q, F[r, q]) for q in range(F.shape[1]) if F[r, q] != 0
                ]
        return t_src, ts_src

    def _build_tables(self):
        n = self.n
        slot_row = np.zeros(self.dim, dtype=np.int64)
        for (i, j), (off, size) in self._slot.items():
            slot_row[off:off + size] = i

        def table(order, cols_of, upd_of):
            piv = np.array(order, dtype=np.int64)
            col_ptr, col_idx = [0], []
            upd_ptr = [0]
            uo, up_, uq, uc = [], [], [], []
            for j in order:
                col_idx += cols_of(j)
                col_ptr.append(len(col_idx))
                o, p, q, c = upd_of(j)
                uo.append(o)
                up_.append(p)
                uq.append(q)
                uc.append(c)
                upd_ptr.append(upd_ptr[-1] + len(o))
            return _FactorTable(
                piv,
                np.array(col_ptr, dtype=np.int64),
                np.array(col_idx, dtype=np.int64),
                np.array(upd_ptr, dtype=np.int64),
                np.concatenate(uo).astype(np.int64),
                np.concatenate(up_).astype(np.int64),
                np.concatenate(uq).astype(np.int64),
                np.concatenate(uc).astype(float),
                slot_row,
            )

        def col_slots(j):
            out = []
            for i, jj in self.pairs:
                if jj == j:
                    out += list(range(self.slot(i, j).start, self.slot(i, j).stop))
            return out

        def row_slots(i):
            out = []
            for ii, k in self.pairs:
                if ii == i:
                    out += list(range(self.slot(i, k).start, self.slot(i, k).stop))
            return out

        def primal_upd(j):
            t_src, ts_src = self._lower_src(cols={j})
            return self._quad_entries(t_src, ts_src, self.dim_H)

        def dual_upd(j):
            # row j of U: slots (j, k) and diag j
            u_src, us_src = {}, {}
            u_src[j] = [(j, 1.0)]
            us_src[j] = [(j, 1.0)]
            for i, k in self.pairs:
                if i != j:
                    continue
                lo, up = self.slot(j, k), self.slot(k, j)
                F = self.F[(j, k)]
                for r in range(lo.stop - lo.start):
                    u_src[lo.start + r] = [(lo.start + r, 1.0)]
                    us_src[up.start + r] = [
                        (lo.start + q, F[r, q]) for q in range(F.shape[1]) if F[r, q] != 0
                    ]
            return self._quad_entries(us_src, u_src, self.dim_H)

        self.primal_table = table(list(range(n)), col_slots, primal_upd)
        self.dual_table = table(list(range(n - 1, -1, -1)), row_slots, dual_upd)
        # full Gram map T -> T T* and T -> T* T
        t_src, ts_src = self._lower_src()
        self.gram_coo = self._quad_entries(t_src, ts_src, self.dim)
        self.gram_dual_coo = self._quad_entries(ts_src, t_src, self.dim)

    # ------------------------------------------------------------------
    # elements and constants
    # ------------------------------------------------------------------
    def element(self, coef=None) -> "AlgebraElement":
        """Wrap a flat coefficient vector (zeros if omitted)."""
        if coef is None:
            coef = np.zeros(self.dim)
        return AlgebraElement(self, coef)

    @property
    def unit(self) -> "AlgebraElement":
        c = np.zeros(self.dim)
        c[: self.n] = 1.0
        return AlgebraElement(self, c)

    def E(self, k) -> "AlgebraElement":
        """Diagonal unit at label ``k``."""
        c = np.zeros(self.dim)
        c[self.idx(k)] = 1.0
        return AlgebraElement(self, c)

    def unit_on(self, mask) -> "AlgebraElement":
        """Diagonal element with ones on a boolean index mask."""
        c = np.zeros(self.dim)
        c[: self.n] = np.asarray(mask, dtype=float)
        return AlgebraElement(self, c)

    def e_up(self, k, strict: bool = False) -> "AlgebraElement":
        """Unit of the up-set subalgebra at ``k`` (strict up-set if asked)."""
        return self.unit_on(self.poset.up(self.idx(k), strict=strict))

    def hermitian_from_h(self, h) -> np.ndarray:
        """Flat Hermitian coefficients from canonical ``dim_H`` coordinates."""
        h = np.asarray(h, dtype=float)
        full = np.zeros(h.shape[:-1] + (self.dim,))
        full[..., : self.dim_H] = h
        sym = full @ self.inv_matrix.T
        full[..., self.dim_H:] = sym[..., self.dim_H:]
        return full

    def h_basis(self) -> np.ndarray:
        """Canonical basis of the Hermitian space, shape ``(dim_H, dim)``."""
        return self.hermitian_from_h(np.eye(self.dim_H))

    def to_dict(self, coef, hermitian: bool = True) -> dict:
        """Serialize to ``{"i": [a_ii], "i|j": [...]}``.

        Hermitian elements only list the lower pairs ``i|j`` with ``j < i``.
        """
        coef = np.asarray(coef, dtype=float)
        lab = self.poset.order
        out = {}
        for i in range(self.n):
            out[lab[i]] = [float(coef[i])]
        for i, j in self.pairs:
            out[f"{lab[i]}|{lab[j]}"] = [float(x) for x in coef[self.slot(i, j)]]
        if not hermitian:
            for i, j in self.pairs:
                out[f"{lab[j]}|{lab[i]}"] = [float(x) for x in coef[self.slot(j, i)]]
        return out

    def from_dict(self, data: Mapping, hermitian: bool = True) -> np.ndarray:
        """Parse the serialization produced by :meth:`to_dict`.

        With ``hermitian=True`` a missing orientation is filled through the
        involution; giving both orientations inconsistently is an error.
        """
        coef = np.zeros(self.dim)
        seen = np.zeros(self.dim, dtype=bool)
        for key, val in data.items():
            vals = np.atleast_1d(np.asarray(val, dtype=float))
            parts = str(key).split("|")
            try:
                ids = [self.poset.index[x] for x in parts]
            except KeyError as exc:
                raise SpecError(f"unknown label in element key {key!r}") from exc
            if len(ids) == 1:
                ids = ids * 2
            if len(ids) != 2 or not self.has_block(*ids):
                raise SpecError(f"element key {key!r} is not a block of the algebra")
            s = self.slot(*ids)
            if vals.size != s.stop - s.start:
                raise SpecError(f"element entry {key!r} needs {s.stop - s.start} values")
            coef[s] = vals
            seen[s] = True
        if hermitian:
            sym = self.inv_matrix @ coef
            for i, j in self.pairs:
                lo, up = self.slot(i, j), self.slot(j, i)
                if seen[lo].all() and seen[up].all():
                    if not np.allclose(coef[up], sym[up], rtol=1e-12, atol=1e-12):
                        lab = self.poset.order
                        raise NotHermitian(f"inconsistent orientations for pair {lab[i]}|{lab[j]}")
                elif seen[up].all():
                    coef[lo] = sym[lo]
                else:
                    coef[up] = sym[up]
        return coef

    def lower_mask(self) -> np.ndarray:
        """Boolean mask of the lower-triangular coordinates (diag + lower)."""
        m = np.zeros(self.dim, dtype=bool)
        m[: self.dim_H] = True
        return m

    def block_mask(self, rows, cols) -> np.ndarray:
        """Coordinates of blocks ``(i, j)`` with ``i`` in ``rows``, ``j`` in ``cols``."""
        rows, cols = np.asarray(rows, dtype=bool), np.asarray(cols, dtype=bool)
        m = np.zeros(self.dim, dtype=bool)
        for (i, j) in self._slot:
            if rows[i] and cols[j]:
                m[self.slot(i, j)] = True
        return m

    # ------------------------------------------------------------------
    # batched raw operations on flat arrays
    # ------------------------------------------------------------------
    def mul(self, a, b) -> np.ndarray:
        """Product of flat coefficient arrays (single or batched)."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        oi, ai, bi, c = self.coo
        if a.ndim == 1 and b.ndim == 1:
            return np.bincount(oi, weights=c * a[ai] * b[bi], minlength=self.dim)
        A, B = np.broadcast_arrays(np.atleast_2d(a), np.atleast_2d(b))
        return _kernels.bilinear_batch(A, B, oi, ai, bi, c, self.dim)

    def star(self, a) -> np.ndarray:
        return np.asarray(a, dtype=float) @ self.inv_matrix.T

    def tr(self, a) -> np.ndarray:
        return np.asarray(a, dtype=float)[..., : self.n].sum(axis=-1)

    def pair(self, a, b) -> np.ndarray:
        """``tr(AB)`` for flat arrays, broadcasting over leading axes."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        return (a * b[..., self.swap]).sum(axis=-1)

    def gram(self, t) -> np.ndarray:
        """``T T*`` for lower-triangular flat arrays."""
        o, p, q, c = self.gram_coo
        t = np.asarray(t, dtype=float)
        if t.ndim == 1:
            return np.bincount(o, weights=c * t[p] * t[q], minlength=self.dim)
        return _kernels.bilinear_batch(t, t, o, p, q, c, self.dim)

    def gram_dual(self, t) -> np.ndarray:
        """``T* T`` for lower-triangular flat arrays."""
        o, p, q, c = self.gram_dual_coo
        t = np.asarray(t, dtype=float)
        if t.ndim == 1:
            return np.bincount(o, weights=c * t[p] * t[q], minlength=self.dim)
        return _kernels.bilinear_batch(t, t, o, p, q, c, self.dim)

    def __repr__(self) -> str:
        return f"Algebra(order={list(self.poset.order)}, dim_H={self.dim_H})"


@dataclass(frozen=True)
class _FactorTable:
    piv: np.ndarray
    col_ptr: np.ndarray
    col_idx: np.ndarray
    upd_ptr: np.ndarray
    upd_o: np.ndarray
    upd_p: np.ndarray
    upd_q: np.ndarray
    upd_c: np.ndarray
    slot_row: np.ndarray


class AlgebraElement:
    """Immutable element of a Vinberg algebra.

    Parameters
    ----------
    algebra : Algebra
    coef : array_like
        Flat coefficients in the algebra's layout.
    """

    __slots__ = ("algebra", "coef")

    def __init__(self, algebra: Algebra, coef):
        c = np.array(coef, dtype=float)
        if c.shape != (algebra.dim,):
            raise DimensionMismatch(f"expected {algebra.dim} coefficients, got shape {c.shape}")
        c.setflags(write=False)
        self.algebra = algebra
        self.coef = c

    def _same(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        if other.algebra is not self.algebra:
            raise AlgebraMismatch("elements belong to different algebras")
        return other

    def __add__(self, other):
        other = self._same(other)
        if other is NotImplemented:
            return other
        return AlgebraElement(self.algebra, self.coef + other.coef)

    def __sub__(self, other):
        other = self._same(other)
        if other is NotImplemented:
            return other
        return AlgebraElement(self.algebra, self.coef - other.coef)

    def __neg__(self):
        return AlgebraElement(self.algebra, -self.coef)

    def __mul__(self, s):
        if isinstance(s, AlgebraElement):
            return NotImplemented
        return AlgebraElement(self.algebra, float(s) * self.coef)

    __rmul__ = __mul__

    def __truediv__(self, s):
        return AlgebraElement(self.algebra, self.coef / float(s))

    def __matmul__(self, other):
        return multiply(self, other)

    @property
    def T(self):
        """The involute ``A*``."""
        return involute(self)

    def block(self, i, j) -> np.ndarray:
        """Coefficients of block ``(i, j)`` addressed by labels."""
        a = self.algebra
        ii, jj = a.idx(i), a.idx(j)
        if not a.has_block(ii, jj):
            return np.zeros(0)
        return self.coef[a.slot(ii, jj)].copy()

    def diag(self) -> np.ndarray:
        return self.coef[: self.algebra.n].copy()

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        d = self.coef - self.algebra.star(self.coef)
        return bool(np.max(np.abs(d), initial=0.0) <= tol * max(1.0, np.max(np.abs(self.coef))))

    def is_lower(self) -> bool:
        return not np.any(self.coef[self.algebra.dim_H:])

    def h(self) -> np.ndarray:
        """Canonical Hermitian coordinates (diagonal then lower pairs)."""
        return self.coef[: self.algebra.dim_H].copy()

    def to_dict(self, hermitian: bool | None = None) -> dict:
        if hermitian is None:
            hermitian = self.is_hermitian()
        return self.algebra.to_dict(self.coef, hermitian=hermitian)

    def allclose(self, other, rtol=1e-9, atol=1e-12) -> bool:
        other = self._same(other)
        return bool(np.allclose(self.coef, other.coef, rtol=rtol, atol=atol))

    def __repr__(self) -> str:
        return f"AlgebraElement({self.to_dict()})"


# ----------------------------------------------------------------------
# public operations
# ----------------------------------------------------------------------
def build_algebra(p: Poset, dims: Mapping | DimensionSystem | None = None,
                  sc: StructureConstants | None = None) -> Algebra:
    """Build the algebra of a poset.

    Parameters
    ----------
    p : Poset
    dims : mapping or DimensionSystem, optional
        Pair dimensions ``{(i, j): n_ij}`` on comparable pairs; default 1.
    sc : StructureConstants, optional
        Defaults to the scalar preset.

    Raises
    ------
    MissingStructureConstant
        A chain has no bilinear map.
    DimensionMismatch
        Dimensions on incomparable pairs, or tensors of the wrong shape.
    """
    if not isinstance(dims, DimensionSystem):
        dims = DimensionSystem.from_pairs(p, dims)
    if sc is None:
        sc = StructureConstants.scalar()
    return Algebra(p, dims, sc)


def multiply(A: AlgebraElement, B: AlgebraElement) -> AlgebraElement:
    """Block product, with incomparable contributions projected to zero."""
    if A.algebra is not B.algebra:
        raise AlgebraMismatch("elements belong to different algebras")
    return AlgebraElement(A.algebra, A.algebra.mul(A.coef, B.coef))


def involute(A: AlgebraElement) -> AlgebraElement:
    return AlgebraElement(A.algebra, A.algebra.star(A.coef))


def trace(A: AlgebraElement) -> float:
    return float(A.coef[: A.algebra.n].sum())


def pairing(A: AlgebraElement, B: AlgebraElement) -> float:
    """``tr(AB)``, the duality pairing on Hermitian elements."""
    if A.algebra is not B.algebra:
        raise AlgebraMismatch("elements belong to different algebras")
    return float(A.algebra.pair(A.coef, B.coef))


def dimension_profile(algebra: Algebra) -> DimensionSystem:
    return algebra.dims


# ----------------------------------------------------------------------
# axiom checker
# ----------------------------------------------------------------------
@dataclass
class AxiomReport:
    """Maximum relative residual per axiom, with pass flags."""

    residuals: dict
    tol: float
    samples: int

    @property
    def passed(self) -> dict:
        return {k: bool(v <= self.tol) for k, v in self.residuals.items()}

    @property
    def ok(self) -> bool:
        return all(self.passed.values())

    def rows(self) -> list[dict]:
        return [
            {"quantity": k, "residual": v, "tolerance": self.tol, "pass": v <= self.tol}
            for k, v in self.residuals.items()
        ]


AXIOMS = ("i", "ii", "iii", "iv", "v", "vi", "cond1", "cond2")


def _rand_general(alg, rng, k):
    return rng.standard_normal((k, alg.dim))


def _rand_lower(alg, rng, k):
    t = rng.standard_normal((k, alg.dim))
    t[:, alg.dim_H:] = 0.0
    t[:, : alg.n] = np.abs(t[:, : alg.n]) + 0.1
    return t


def axiom_check(algebra: Algebra, samples: int = 200, tol: float = 1e-9,
                seed: int = 0) -> AxiomReport:
    """Evaluate the algebra axioms on random elements.

    Residuals are relative to the product of the input norms. Axiom i is
    reported as 0 when every sample has ``tr(AA*) > 0`` and as
    ``1 + max(-tr(AA*) / |A|^2)`` otherwise.

    Parameters
    ----------
    algebra : Algebra
    samples : int
        Random elements (or instances) per axiom.
    tol : float
    seed : int

    Returns
    -------
    AxiomReport
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    alg = algebra
    rng = np.random.default_rng(seed)
    res = {}
    nrm = lambda x: np.linalg.norm(x, axis=-1)

    A, B, C = (_rand_general(alg, rng, samples) for _ in range(3))
    As, Bs = alg.star(A), alg.star(B)
    q = alg.tr(alg.mul(A, As)) / nrm(A) ** 2
    # positivity has no natural relative scale: a violation counts at least 1
    res["i"] = 0.0 if q.min() > 0 else 1.0 + float(-q.min())
    AB = alg.mul(A, B)
    res["ii"] = float(np.max(nrm(alg.star(AB) - alg.mul(Bs, As)) / (nrm(A) * nrm(B))))
    res["iii"] = float(np.max(np.abs(alg.tr(AB) - alg.tr(alg.mul(B, A))) / (nrm(A) * nrm(B))))
    lhs = alg.tr(alg.mul(A, alg.mul(B, C)))
    rhs = alg.tr(alg.mul(AB, C))
    res["iv"] = float(np.max(np.abs(lhs - rhs) / (nrm(A) * nrm(B) * nrm(C))))

    S, T, U = (_rand_lower(alg, rng, samples) for _ in range(3))
    d = alg.mul(alg.mul(S, T), U) - alg.mul(S, alg.mul(T, U))
    res["v"] = float(np.max(nrm(d) / (nrm(S) * nrm(T) * nrm(U))))
    Us = alg.star(U)
    d = alg.mul(T, alg.mul(U, Us)) - alg.mul(alg.mul(T, U), Us)
    res["vi"] = float(np.max(nrm(d) / (nrm(T) * nrm(U) ** 2)))

    res["cond1"], res["cond2"] = _inner_product_conditions(alg, rng, samples)
    return AxiomReport(res, tol, samples)


def _sqnorm(F, x):
    return float(x @ (F @ x))


def _inner_product_conditions(alg, rng, samples):
    chains = alg.chains()
    if not chains:
        return 0.0, 0.0
    r1 = 0.0
    for _ in range(samples):
        h, m, l = chains[rng.integers(len(chains))]
        L = alg.L[(h, m, l)]
        a = rng.standard_normal(L.shape[1])
        b = rng.standard_normal(L.shape[2])
        ab = np.einsum("rpq,p,q->r", L, a, b)
        lhs = _sqnorm(alg.F[(h, l)], ab)
        rhs = _sqnorm(alg.F[(h, m)], a) * _sqnorm(alg.F[(m, l)], b)
        scale = max(np.dot(a, a) * np.dot(b, b), 1e-300)
        r1 = max(r1, abs(lhs - rhs) / scale)
    # condition 2: a_ik orthogonal to E_ij b_jk implies (d a, c b) = 0 in E_lk
    quads = [
        (l4, i, j, k)
        for (i, j, k) in chains
        for l4 in range(alg.n)
        if l4 != i and alg.poset.leq[i, l4]
    ]
    if not quads:
        return r1, 0.0
    from scipy.linalg import null_space

    r2 = 0.0
    for _ in range(samples):
        l4, i, j, k = quads[rng.integers(len(quads))]
        L_ijk = alg.L[(i, j, k)]
        b = rng.standard_normal(L_ijk.shape[2])
        span = np.einsum("rpq,q->rp", L_ijk, b)  # columns: images of basis of E_ij
        G = alg.F[(i, k)]
        ns = null_space(span.T @ G)
        if ns.shape[1] == 0:
            continue
        a = ns @ rng.standard_normal(ns.shape[1])
        dvec = rng.standard_normal(alg.pair_dim[(l4, i)])
        cvec = rng.standard_normal(alg.pair_dim[(l4, j)])
        da = np.einsum("rpq,p,q->r", alg.L[(l4, i, k)], dvec, a)
        cb = np.einsum("rpq,p,q->r", alg.L[(l4, j, k)], cvec, b)
        val = da @ (alg.F[(l4, k)] @ cb)
        scale = np.linalg.norm(dvec) * np.linalg.norm(a) * np.linalg.norm(cvec) * np.linalg.norm(b)
        r2 = max(r2, abs(val) / max(scale, 1e-300))
    return r1, r2
