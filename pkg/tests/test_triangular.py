import numpy as np
import pytest

from rieszcone import (
    LowerTriangular,
    OrbitSignature,
    build_algebra,
    chain,
    cholesky,
    cholesky_dual,
    classify_orbit,
    components,
    group_act,
    inverse_dual,
    inverse_primal,
    orbit_point,
    project_upsets,
    tri_invert,
    tri_product,
)
from rieszcone.errors import NotHermitian, NotInClosure, NotInCone, NotInDualCone
from rieszcone.triangular import (
    cholesky_batch,
    classify_orbit_batch,
    project_upsets_dual,
    restrict_factor,
)

from conftest import rand_cone, rand_dual, rand_lower


def rel(a, b):
    return np.abs(a - b).max() / max(np.abs(b).max(), 1e-300)


# ----------------------------------------------------------------------
# hand values
# ----------------------------------------------------------------------
def test_unit_factors_to_unit(any_alg):
    T = cholesky(any_alg.unit)
    assert np.allclose(T.coef, any_alg.unit.coef)


def test_chain2_hand_cholesky():
    a = build_algebra(chain(2))
    X = a.element(a.from_dict({"1": [4.0], "2": [2.0], "2|1": [2.0]}))
    T = cholesky(X)
    assert T.to_dict(hermitian=True) == {"1": [2.0], "2": [1.0], "2|1": [1.0]}
    inv = tri_invert(T)
    assert np.allclose([inv.coef[0], inv.coef[1], inv.coef[a.slot(1, 0)][0]], [0.5, 1.0, -0.5])


def test_p4_factor_has_no_incomparable_entry(a4, rng):
    T = cholesky(rand_cone(a4, rng))
    i3, i4 = a4.idx("3"), a4.idx("4")
    assert not a4.has_block(i4, i3)
    assert T.is_lower


# ----------------------------------------------------------------------
# uniqueness and round trips
# ----------------------------------------------------------------------
def test_cholesky_recovers_factor(any_alg, rng):
    a = any_alg
    for _ in range(20):
        t = rand_lower(a, rng)
        T = cholesky(a.element(a.gram(t)))
        assert rel(T.coef, t) < 1e-9


def test_dual_cholesky_recovers_factor(any_alg, rng):
    a = any_alg
    for _ in range(20):
        u = rand_lower(a, rng)
        U = cholesky_dual(a.element(a.gram_dual(u)))
        assert rel(U.coef, u) < 1e-9


def test_batched_cholesky(any_alg, rng):
    a = any_alg
    t = rand_lower(a, rng, 50)
    T, ok = cholesky_batch(a, a.gram(t))
    assert ok.all() and rel(T, t) < 1e-9
    bad = a.gram(t)
    bad[3, 0] = -1.0
    assert not cholesky_batch(a, bad)[1][3]


def test_invert_and_product(any_alg, rng):
    a = any_alg
    T = LowerTriangular(a, rand_lower(a, rng))
    S = tri_invert(T)
    assert tri_product(T, S).allclose(a.unit, atol=1e-10)
    assert tri_product(S, T).allclose(a.unit, atol=1e-10)
    assert S.positive


def test_inverses_are_mutual(any_alg, rng):
    a = any_alg
    X = rand_cone(a, rng)
    th = inverse_primal(X)
    assert inverse_dual(th).allclose(X, rtol=1e-9, atol=1e-10)


def test_group_action_composes(any_alg, rng):
    a = any_alg
    T = LowerTriangular(a, rand_lower(a, rng))
    U = LowerTriangular(a, rand_lower(a, rng))
    X = rand_cone(a, rng)
    lhs = group_act(tri_product(T, U), X)
    rhs = group_act(T, group_act(U, X))
    assert rel(lhs.coef, rhs.coef) < 1e-9
    assert group_act(T, a.unit).allclose(a.element(a.gram(T.coef)), rtol=1e-10)


# ----------------------------------------------------------------------
# errors
# ----------------------------------------------------------------------
def test_cone_errors(a4):
    with pytest.raises(NotInCone):
        cholesky(-a4.unit)
    with pytest.raises(NotInDualCone):
        cholesky_dual(-a4.unit)
    G = a4.unit.coef.copy()
    G[a4.slot(a4.idx("3"), a4.idx("1"))] = 0.3
    with pytest.raises(NotHermitian):
        cholesky(a4.element(G))


# ----------------------------------------------------------------------
# projections and decomposition
# ----------------------------------------------------------------------
@pytest.mark.parametrize("name", ["P4", "chain3", "V", "Lambda", "complex3"])
def test_telescoping(name, rng):
    from conftest import ALGEBRAS

    a = ALGEBRAS[name]()
    for _ in range(25):
        X = rand_cone(a, rng)
        T = cholesky(X)
        acc = np.zeros(a.dim)
        for lab in a.poset.order:
            big, small = project_upsets(X, lab, T)
            acc += big.coef - small.coef
        assert np.abs(acc - X.coef).max() <= 1e-10 * max(1, np.abs(X.coef).max())


def test_projection_nesting(a4, rng):
    X = rand_cone(a4, rng)
    p = a4.poset
    for i in p.order:
        Xi = project_upsets(X, i)[0]
        Ti = restrict_factor(cholesky(X), i)
        for j in p.order:
            if p.leq[p.index[i], p.index[j]]:
                # the restricted factor is singular, so project through it
                lhs = project_upsets(Xi, j, Ti)[0]
                rhs = project_upsets(X, j)[0]
                assert rel(lhs.coef, rhs.coef) < 1e-12


def test_unique_minimum_projection_is_identity(rng):
    a = build_algebra(chain(3))
    X = rand_cone(a, rng)
    assert project_upsets(X, "1")[0].allclose(X, rtol=1e-12, atol=1e-12)


def test_components_example(a4, rng):
    X = rand_cone(a4, rng)
    up = {k: project_upsets(X, k)[0] for k in "1234"}
    comp = components(X)
    assert comp["1"].allclose(up["1"] - up["3"], atol=1e-12)
    assert comp["2"].allclose(up["2"] - up["3"], atol=1e-12)
    assert comp["3"].allclose(up["3"], atol=1e-12)
    assert np.all(comp["4"].coef == 0)


def test_dual_projection_inverse_consistency(any_alg, rng):
    a = any_alg
    th = rand_dual(a, rng)
    U = cholesky_dual(th)
    S = tri_invert(U)
    Y = inverse_dual(th)
    for lab in a.poset.order:
        th_up = project_upsets_dual(th, lab, U)[0]
        # inverse inside the up-set subalgebra: invert the factor there
        Ui = restrict_factor(U, lab)
        pad = Ui.coef + a.unit_on(~a.poset.up(a.idx(lab))).coef
        Si = restrict_factor(tri_invert(LowerTriangular(a, pad)), lab)
        lhs = a.gram(Si.coef)
        rhs = project_upsets(Y, lab, S)[0].coef
        assert rel(lhs, rhs) < 1e-9
        assert rel(a.gram_dual(Ui.coef), th_up.coef) < 1e-12


# ----------------------------------------------------------------------
# orbits
# ----------------------------------------------------------------------
SIGS = [(1, 1, 1, 1), (0, 0, 1, 0), (1, 0, 0, 1), (0, 1, 1, 0), (0, 0, 0, 0), (1, 1, 0, 0)]


@pytest.mark.parametrize("psi", SIGS)
def test_classify_orbit_round_trip(a4, rng, psi):
    for _ in range(10):
        T = LowerTriangular(a4, rand_lower(a4, rng))
        Z = orbit_point(T, psi)
        sig, T2 = classify_orbit(Z)
        assert sig.values == psi
        assert orbit_point(T2, sig).allclose(Z, rtol=1e-9, atol=1e-10)


def test_classify_orbit_batch(a4, rng):
    T = rand_lower(a4, rng, 30)
    Z = a4.gram(np.where(a4.block_mask(np.ones(4, bool), [0, 0, 1, 0]) & a4.lower_mask(), T, 0))
    psi, _, ok = classify_orbit_batch(a4, Z)
    assert ok.all()
    assert (psi == [0, 0, 1, 0]).all()


def test_not_in_closure(a4):
    with pytest.raises(NotInClosure):
        classify_orbit(a4.element(a4.from_dict({"1": [1.0], "3": [-1.0]})))
    # a dead pivot with a live entry below it
    with pytest.raises(NotInClosure):
        classify_orbit(a4.element(a4.from_dict({"3": [1.0], "3|1": [0.5]})))


def test_orbit_signature_ones(a4):
    assert OrbitSignature.ones(a4, "1").values == (1, 0, 0, 1)
    assert OrbitSignature.ones(a4, "2").values == (0, 1, 0, 0)
    assert OrbitSignature.ones(a4, "3").values == (0, 0, 1, 0)
    assert OrbitSignature.ones(a4).values == (1, 1, 1, 1)


def test_orbit_signature_ones_disjoint_on_long_chains():
    a = build_algebra(chain(5))
    # 3, 4 and 5 are separators; each keeps only itself
    assert OrbitSignature.ones(a, "1").values == (1, 1, 0, 0, 0)
    assert OrbitSignature.ones(a, "3").values == (0, 0, 1, 0, 0)
    assert OrbitSignature.ones(a, "5").values == (0, 0, 0, 0, 1)
