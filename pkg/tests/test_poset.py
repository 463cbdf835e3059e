import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rieszcone import (
    Poset,
    antichain,
    chain,
    opposite_poset,
    order_sets,
    parse_poset,
    random_poset,
    scalar_obstruction,
    structure_sets,
    subposet,
)
from rieszcone.errors import CycleDetected, DuplicateElement, SpecError, UnknownLabelInRelation

from conftest import P4_REL, p4


@st.composite
def posets(draw, max_n=6):
    n = draw(st.integers(1, max_n))
    labs = [str(k) for k in range(1, n + 1)]
    perm = draw(st.permutations(labs))
    rel = [(perm[a], perm[b]) for a in range(n) for b in range(a + 1, n) if draw(st.booleans())]
    return Poset(labs, rel)


def brute_leq(p):
    """Reachability by repeated relaxation over the given pairs."""
    leq = {(a, a) for a in p.elements} | set(p.relations())
    while True:
        new = {(a, d) for a, b in leq for c, d in leq if b == c} - leq
        if not new:
            return leq
        leq |= new


def brute_structure(p):
    """Separators, minimal elements and child sets by scanning all triples."""
    leq = brute_leq(p)
    E = p.elements
    seps = {
        j for i1, i2, j in itertools.permutations(E, 3)
        if (i1, j) in leq and (i2, j) in leq
    }
    roots = {i for i in E if not any((k, i) in leq for k in E if k != i)}
    children = {
        i: {j for j in E if {k for k in E if k != j and (k, j) in leq} == {i}} for i in E
    }
    return seps, roots, children


# ----------------------------------------------------------------------
# construction
# ----------------------------------------------------------------------
def test_p4_is_valid():
    p = p4()
    assert len(p) == 4
    assert set(p.relations()) == set(P4_REL)


def test_antichain_keeps_label_order():
    p = Poset(["1", "2", "3"], [])
    assert p.order == ("1", "2", "3")
    assert p.relations() == []


def test_cycle_detected():
    with pytest.raises(CycleDetected):
        Poset(["1", "2"], [("1", "2"), ("2", "1")])
    with pytest.raises(CycleDetected):
        Poset(["1", "2", "3"], [("1", "2"), ("2", "3"), ("3", "1")])


def test_self_loop_is_a_cycle():
    with pytest.raises(CycleDetected):
        Poset(["1"], [("1", "1")])


def test_duplicate_and_unknown_labels():
    with pytest.raises(DuplicateElement):
        Poset(["1", "1"], [])
    with pytest.raises(UnknownLabelInRelation):
        Poset(["1", "2"], [("1", "3")])


def test_linear_extension_respects_order_and_is_deterministic():
    p = Poset(["d", "c", "b", "a"], [("a", "b"), ("c", "b")])
    q = Poset(["d", "c", "b", "a"], [("c", "b"), ("a", "b")])
    assert p.order == q.order
    assert p.order.index("a") < p.order.index("b")
    assert p.order.index("c") < p.order.index("b")


@given(posets())
@settings(max_examples=150, deadline=None)
def test_closure_and_extension_match_brute_force(p):
    leq = brute_leq(p)
    for a, b in itertools.product(p.elements, repeat=2):
        assert bool(p.leq[p.index[a], p.index[b]]) == ((a, b) in leq)
    # antisymmetric, and the extension lists predecessors first
    for a, b in leq:
        if a != b:
            assert (b, a) not in leq
            assert p.index[a] < p.index[b]


# ----------------------------------------------------------------------
# order sets
# ----------------------------------------------------------------------
def test_order_sets_examples():
    prof = order_sets(p4())
    assert prof.down["3"] == {"1", "2", "3"}
    assert prof.down["4"] == {"1", "4"}
    a = order_sets(antichain(3))
    assert all(a.down[i] == {i} for i in "123")
    c = order_sets(chain(3))
    assert c.up["2"] == {"2", "3"}
    assert c.down_strict["3"] == {"1", "2"}


@given(posets())
@settings(max_examples=80, deadline=None)
def test_order_sets_monotone(p):
    prof = order_sets(p)
    for i, j in itertools.product(p.elements, repeat=2):
        if p.leq[p.index[i], p.index[j]]:
            assert prof.down[i] <= prof.down[j]
            assert prof.up[j] <= prof.up[i]
    for i in p.elements:
        assert prof.down_strict[i] == prof.down[i] - {i}
        assert prof.up_strict[i] == prof.up[i] - {i}


# ----------------------------------------------------------------------
# structure sets
# ----------------------------------------------------------------------
def test_structure_sets_examples():
    ss = structure_sets(p4())
    assert ss.separators == {"3"}
    assert ss.roots == {"1", "2"}
    assert ss.separators_of["1"] == ss.separators_of["2"] == {"3"}
    assert ss.children["1"] == {"4"}

    ss = structure_sets(antichain(4))
    assert ss.separators == set()
    assert ss.roots == {"1", "2", "3", "4"}
    assert all(not v for v in ss.children.values())

    p = chain(3)
    ss = structure_sets(p)
    assert ss.separators == {"3"}
    assert ss.roots == {"1"}
    assert ss.anchors(p) == ["1", "3"]


def test_isolated_vertex_is_a_root():
    ss = structure_sets(Poset(["1", "2", "3"], [("1", "2")]))
    assert "3" in ss.roots


@given(posets())
@settings(max_examples=150, deadline=None)
def test_structure_sets_match_triple_scan(p):
    ss = structure_sets(p)
    seps, roots, children = brute_structure(p)
    assert ss.separators == seps
    assert ss.roots == roots
    assert {k: set(v) for k, v in ss.children.items()} == children
    for i in p.elements:
        assert ss.separators_of[i] == seps & order_sets(p).up[i]
        for j in ss.children[i]:
            assert p.lt(i, j)


# ----------------------------------------------------------------------
# derived posets
# ----------------------------------------------------------------------
def test_opposite_examples():
    assert set(opposite_poset(p4()).relations()) == {("3", "1"), ("4", "1"), ("3", "2")}
    assert opposite_poset(chain(2)).relations() == [("2", "1")]


@given(posets())
@settings(max_examples=50, deadline=None)
def test_opposite_is_an_involution(p):
    assert opposite_poset(opposite_poset(p)) == p


def test_subposet_keeps_induced_order():
    q = subposet(chain(4), ["1", "3", "4"])
    assert set(q.relations()) == {("1", "3"), ("1", "4"), ("3", "4")}


def test_random_poset_is_seeded():
    a = random_poset(6, 0.4, np.random.default_rng(1))
    b = random_poset(6, 0.4, np.random.default_rng(1))
    assert a == b


def test_scalar_obstruction():
    assert scalar_obstruction(p4()) is None
    assert scalar_obstruction(chain(5)) is None
    diamond = Poset("1234", [("1", "2"), ("1", "3"), ("2", "4"), ("3", "4")])
    nu, mu, j, i = scalar_obstruction(diamond)
    assert nu == "1" and i == "4" and {mu, j} == {"2", "3"}


def test_parse_poset_from_json():
    doc = {"elements": ["1", "2", "3", "4"], "relations": [list(r) for r in P4_REL]}
    assert parse_poset(json.dumps(doc)) == p4()
    assert parse_poset(doc) == p4()
    with pytest.raises(SpecError):
        parse_poset("{not json")
    with pytest.raises(SpecError):
        parse_poset({"relations": []})
    with pytest.raises(SpecError):
        parse_poset({"elements": ["1"], "relations": [["1"]]})


def test_labels_are_strings():
    p = Poset([1, 2], [(1, 2)])
    assert p.order == ("1", "2")
    assert p.lt("1", "2")
