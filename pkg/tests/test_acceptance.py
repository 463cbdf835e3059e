"""Acceptance suite: one test and one PASS/FAIL line per criterion."""

import itertools
import math
import time

import numpy as np
from scipy import integrate
from scipy.special import gamma as G

from rieszcone import (
    LowerTriangular,
    OrbitSignature,
    Poset,
    RieszFamily,
    StructureConstants,
    axiom_check,
    build_algebra,
    chain,
    classify_measure,
    cholesky,
    components,
    gamma_cone,
    gen_power,
    hessian_k,
    in_xi,
    inverse_derivative,
    inverse_dual,
    inverse_primal,
    is_absolutely_continuous,
    log_gamma_cone,
    log_gamma_orbit,
    mc_laplace,
    mean_inverse,
    mean_map,
    minors,
    n_profile,
    project_upsets,
    quadratic_rep,
    quadratic_rep_factor,
    random_dual_points,
    random_poset,
    sample_riesz,
    scalar_obstruction,
    structure_sets,
    variance_function,
    xi_witnesses,
)
from rieszcone.nef import fd_gradient, fd_hessian, mc_moments
from rieszcone.triangular import classify_orbit_batch

from conftest import ALGEBRAS, complex_chain3, p4, rand_cone, rand_dual, rand_lower, record
from oracles import XiOracle

SEED = 20261016


def rel_err(a, b):
    return float(np.abs(np.asarray(a) - np.asarray(b)).max() / max(np.abs(b).max(), 1e-300))


# ----------------------------------------------------------------------
# 1. axiom suite
# ----------------------------------------------------------------------
def test_c01_axiom_suite():
    rng = np.random.default_rng(SEED)
    failures = []
    worst = 0.0
    for k in range(10):
        p = random_poset(int(rng.integers(2, 7)), 0.4, rng)
        rep = axiom_check(build_algebra(p), samples=200, tol=1e-9, seed=k)
        worst = max(worst, max(rep.residuals.values()))
        if not rep.ok:
            bad = [a for a, ok in rep.passed.items() if not ok]
            failures.append(f"{p.relations()} fails {bad}, diamond {scalar_obstruction(p)}")
    neg_f = axiom_check(complex_chain3(involution=-np.eye(2)), samples=200, seed=1)
    neg_zero = axiom_check(complex_chain3(tensor=np.zeros((2, 2, 2))), samples=200, seed=2)
    scal_neg = build_algebra(chain(2), sc=StructureConstants(involutions={"1|2": -np.eye(1)}))
    neg_scalar = axiom_check(scal_neg, samples=200, seed=3)
    negatives = (not neg_f.passed["i"]) and (not neg_zero.passed["cond1"]) and (not neg_scalar.passed["i"])
    ok = not failures and negatives
    detail = f"{10 - len(failures)}/10 random posets pass; negatives fail as designed: {negatives}"
    if failures:
        detail += "; " + "; ".join(failures)
    record(1, "axiom suite on 10 random scalar posets and 2 negatives", ok, detail)
    assert negatives
    assert not failures, detail


# ----------------------------------------------------------------------
# 2. worked example: minors are monomials in the pivots
# ----------------------------------------------------------------------
def test_c02_example_minors():
    a = build_algebra(p4())
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(100):
        T = LowerTriangular(a, rand_lower(a, rng))
        X = a.element(a.gram(T.coef))
        t = dict(zip(a.poset.order, T.coef[: a.n]))
        mt = minors(X)
        want_large = {"1": t["1"] ** 2, "2": t["2"] ** 2,
                      "3": (t["1"] * t["2"] * t["3"]) ** 2, "4": (t["1"] * t["4"]) ** 2}
        want_strict = {"1": 1.0, "2": 1.0, "3": (t["1"] * t["2"]) ** 2, "4": t["1"] ** 2}
        for k in "1234":
            worst = max(worst, abs(mt.large[k] / want_large[k] - 1), abs(mt.strict[k] / want_strict[k] - 1))
        want = (t["1"] * t["2"] * t["3"] * t["4"]) ** 2
        worst = max(worst, abs(gen_power(X, [1, 1, 1, 1]) / want - 1))
    ok = worst <= 1e-13
    record(2, "P4 minors and Delta_(1,1,1,1) are pivot monomials", ok, f"max rel err {worst:.2e}")
    assert ok


# ----------------------------------------------------------------------
# 3. decomposition identities
# ----------------------------------------------------------------------
def test_c03_decompositions():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for name, mk in ALGEBRAS.items():
        a = mk()
        for _ in range(100):
            X = rand_cone(a, rng)
            comp = components(X)
            worst = max(worst, np.abs(sum(c.coef for c in comp.values()) - X.coef).max())
            acc = np.zeros(a.dim)
            for lab in a.poset.order:
                big, small = project_upsets(X, lab)
                acc += big.coef - small.coef
            worst = max(worst, np.abs(acc - X.coef).max())
    ok = worst <= 1e-10
    record(3, "sum of components and up-set telescoping recover X", ok,
           f"{len(ALGEBRAS)} algebras x 100 draws, max abs err {worst:.2e}")
    assert ok


# ----------------------------------------------------------------------
# 4. gamma against quadrature
# ----------------------------------------------------------------------
def _gamma1_quad(lam):
    f = lambda z: math.exp(-z) * z ** (lam - 1)
    return integrate.quad(f, 0, 1)[0] + integrate.quad(f, 1, np.inf)[0]


def _gamma_chain2_quad(l1, l2):
    """Iterated adaptive quadrature of exp(-tr Z) z11^{l1-l2} det(Z)^{l2-3/2} over 2x2 SPD Z."""
    s = l2 - 1.5

    def inner(z22, z11):
        # z21 = sqrt(z11 z22) u, u in (-1, 1); the endpoint power is the quad weight
        w = integrate.quad(lambda u: 1.0, -1, 1, weight="alg", wvar=(s, s))[0]
        d = z11 * z22
        return math.exp(-z11 - z22) * z11 ** (l1 - l2) * d ** s * math.sqrt(d) * w

    val = 0.0
    for r11 in [(0, 1), (1, 60)]:
        for r22 in [(0, 1), (1, 60)]:
            val += integrate.nquad(inner, [r22, r11], opts={"epsrel": 1e-11, "limit": 200})[0]
    return val


def test_c04_gamma_quadrature():
    errs = []
    a1 = build_algebra(Poset(["1"], []))
    for lam in (0.6, 1.0, 2.5):
        errs.append(abs(gamma_cone(a1, [lam]) / _gamma1_quad(lam) - 1))
    a2 = build_algebra(chain(2))
    for lam in ((1.0, 1.0), (2.5, 2.5), (0.8, 1.7), (1.6, 0.9)):
        errs.append(abs(gamma_cone(a2, list(lam)) / _gamma_chain2_quad(*lam) - 1))
    quad_ok = max(errs) <= 1e-6
    siegel = [abs(gamma_cone(a2, [p, p]) / (math.sqrt(math.pi) * G(p) * G(p - 0.5)) - 1)
              for p in (0.75, 1.0, 1.75, 3.2)]
    ok = quad_ok and max(siegel) <= 1e-12
    record(4, "gamma_cone vs quadrature and Siegel Gamma_2", ok,
           f"quadrature max rel {max(errs):.1e}, Siegel max rel {max(siegel):.1e}")
    assert ok


# ----------------------------------------------------------------------
# 5. orbit gamma product and exponent bookkeeping
# ----------------------------------------------------------------------
def test_c05_orbit_gamma_product():
    cases = [("P4", p4(), [1, 1, 2, 1]), ("P4", p4(), [1.3, 2.2, 3.1, 1.7])]
    cases += [(f"chain{k}", chain(k), [1 + 0.7 * j for j in range(k)]) for k in (1, 2, 3, 4, 5)]
    worst, book_ok, ones_ok = 0.0, True, True
    for name, p, chi in cases:
        a = build_algebra(p)
        ss = structure_sets(p)
        wit = classify_measure(a, chi).witness
        tilde = wit.tilde(a)
        lhs = sum(log_gamma_orbit(a, i, OrbitSignature.ones(a, i), tilde[i]) for i in wit.psi)
        rhs = log_gamma_cone(a, chi) - a.n * math.log(2)
        worst = max(worst, abs(math.expm1(lhs - rhs)))
        ones_ok &= all(OrbitSignature.ones(a, i).values == wit.psi[i].values for i in wit.psi)
        tot = {lab: 0 for lab in p.order}
        for anc in ss.anchors(p):
            for lab, v in n_profile(a, anc, OrbitSignature.ones(a, anc)).n.items():
                tot[lab] += v
        book_ok &= tot == dict(a.dims.n_below)
    ok = worst <= 1e-12 and book_ok and ones_ok
    record(5, "product of orbit gammas = 2^-|I| gamma_cone; exponents add up", ok,
           f"{len(cases)} cases, max rel {worst:.1e}, bookkeeping exact: {book_ok}, "
           f"1_i equals the witness signatures: {ones_ok}")
    assert ok


# ----------------------------------------------------------------------
# 6, 7. Laplace transform by Monte Carlo
# ----------------------------------------------------------------------
def _laplace_check(a, chi, seed, n=200_000):
    Z = sample_riesz(a, chi, None, n, seed)
    pts = random_dual_points(a, 10, np.random.default_rng(seed + 1))
    hits = 0
    for s in pts:
        closed = gen_power(inverse_dual(a.unit + s), chi)
        est, se = mc_laplace(a, Z, s)
        hits += abs(est - closed) <= 4 * se
    return Z, hits


def test_c06_laplace_ac():
    a = build_algebra(p4())
    t0 = time.perf_counter()
    _, hits = _laplace_check(a, [1, 1, 2, 1], SEED)
    dt = time.perf_counter() - t0
    ok = hits >= 9 and dt <= 60
    record(6, "Laplace transform, absolutely continuous chi=(1,1,2,1)", ok,
           f"{hits}/10 points within 4 stderr, {dt:.1f} s")
    assert ok


def test_c07_laplace_singular():
    a = build_algebra(p4())
    chi = [0, 0, 1.5, 0]
    Z, hits = _laplace_check(a, chi, SEED + 7)
    psi, _, inside = classify_orbit_batch(a, Z)
    wit = classify_measure(a, chi).witness
    # the orbit of a sum of component draws is the union of the signatures
    pattern = np.array([max(w.values[k] for w in wit.psi.values()) for k in range(a.n)])
    same = bool(inside.all() and (psi == pattern).all())
    z4 = float(np.abs(Z[:, a.idx("4")]).max())
    ok = hits >= 9 and same and z4 == 0.0
    record(7, "Laplace transform, singular chi=(0,0,1.5,0) and orbit of every draw", ok,
           f"{hits}/10 points within 4 stderr, signatures match: {same}, max |z_44| = {z4:g}")
    assert ok


# ----------------------------------------------------------------------
# 8. witness independence
# ----------------------------------------------------------------------
def test_c08_witness_independence():
    a = build_algebra(chain(4))
    chi = [0, 0, 1, 2]
    wits = list(xi_witnesses(a, chi))
    assert not is_absolutely_continuous(a, chi) and len(wits) >= 2
    pts = random_dual_points(a, 5, np.random.default_rng(SEED))
    worst = 0.0
    for w1, w2 in itertools.combinations(wits, 2):
        Z1 = sample_riesz(a, chi, None, 100_000, SEED, witness=w1)
        Z2 = sample_riesz(a, chi, None, 100_000, SEED + 1, witness=w2)
        for s in pts:
            (e1, s1), (e2, s2) = mc_laplace(a, Z1, s), mc_laplace(a, Z2, s)
            worst = max(worst, abs(e1 - e2) / math.hypot(s1, s2))
    ok = worst <= 4
    record(8, "distinct witnesses give the same Laplace transform", ok,
           f"chain4 chi=(0,0,1,2), {len(wits)} witnesses, max |diff|/stderr {worst:.2f}")
    assert ok


# ----------------------------------------------------------------------
# 9. NEF derivatives
# ----------------------------------------------------------------------
def test_c09_nef_derivatives():
    out = []
    ok = True
    for name, a, chi in (("P4", build_algebra(p4()), [1, 1, 2, 1]),
                         ("chain3", build_algebra(chain(3)), [1, 1.5, 2.5])):
        F = RieszFamily(a, chi)
        rng = np.random.default_rng(SEED)
        g_err = h_err = rt_err = 0.0
        z_max = 0.0
        for k in range(5):
            th = rand_dual(a, rng)
            m = mean_map(F, th)
            g_err = max(g_err, rel_err(a.pair(a.h_basis(), m.coef), -fd_gradient(F, th)))
            V = variance_function(F, m).form
            H = hessian_k(F, th).form
            fd = fd_hessian(F, th)
            h_err = max(h_err, rel_err(V, fd), rel_err(H, fd))
            rt_err = max(rt_err, rel_err(mean_inverse(F, m).coef, th.coef))
            _, _, cov, cov_se = mc_moments(a, sample_riesz(a, chi, th, 200_000, SEED + k))
            z_max = max(z_max, float(np.max(np.abs(cov - V) / cov_se)))
        part = g_err <= 1e-5 and h_err <= 1e-5 and rt_err <= 1e-8 and z_max <= 5
        ok &= part
        out.append(f"{name}: grad {g_err:.1e}, hess {h_err:.1e}, roundtrip {rt_err:.1e}, cov z {z_max:.2f}")
    record(9, "mean map, Hessian, inverse and covariance vs oracles", ok, "; ".join(out))
    assert ok


# ----------------------------------------------------------------------
# 10. Wishart collapse
# ----------------------------------------------------------------------
def test_c10_wishart_collapse():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    literal = {}
    for name, a in (("P4", build_algebra(p4())), ("chain3", build_algebra(chain(3)))):
        for lam in (1.4, 2.3):
            F = RieszFamily(a, [lam] * a.n)
            for _ in range(5):
                m = rand_cone(a, rng)
                V = variance_function(F, m)
                T = cholesky(m)
                for B in a.h_basis():
                    K = a.element(B)
                    want = quadratic_rep_factor(T, K).coef / lam
                    worst = max(worst, rel_err(V.apply(K).coef, want))
                    literal[name] = max(literal.get(name, 0.0),
                                        rel_err(quadratic_rep(m, K).coef, quadratic_rep_factor(T, K).coef))
    ok = worst <= 1e-10
    record(10, "constant chi: variance function = P(m)/lambda on the full basis", ok,
           f"max rel {worst:.1e}; X(KX) vs factor form: P4 {literal['P4']:.1e}, chain3 {literal['chain3']:.1e}")
    assert ok


# ----------------------------------------------------------------------
# 11. derivative of the inverse
# ----------------------------------------------------------------------
def test_c11_inverse_derivative():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for name in ("P4", "chain3", "Lambda", "lorentz", "complex3"):
        a = ALGEBRAS[name]()
        X = rand_cone(a, rng)
        for _ in range(20):
            K = a.element(a.hermitian_from_h(rng.standard_normal(a.dim_H)))
            eps = 1e-6
            fd = (inverse_primal(X + K * eps).coef - inverse_primal(X - K * eps).coef) / (2 * eps)
            worst = max(worst, rel_err(inverse_derivative(X, K).coef, fd))
    ok = worst <= 1e-6
    record(11, "inverse derivative vs finite differences, 20 directions", ok, f"max rel {worst:.1e}")
    assert ok


# ----------------------------------------------------------------------
# 12. Gindikin set against brute force
# ----------------------------------------------------------------------
def test_c12_gindikin_brute_force():
    grid = [k / 4 for k in range(13)]
    n_pts = n_bad = n_ac_bad = 0
    for p in (chain(2), chain(3), p4()):
        a = build_algebra(p)
        oracle = XiOracle(p)
        thr = {lab: a.dims.n_below[lab] / 2 for lab in p.order}
        for lam in itertools.product(grid, repeat=len(p)):
            d = dict(zip(p.order, lam))
            n_pts += 1
            n_bad += in_xi(a, d) != oracle.member(d)
            n_ac_bad += is_absolutely_continuous(a, d) != all(d[k] > thr[k] for k in p.order)
    ok = n_bad == 0 and n_ac_bad == 0
    record(12, "Gindikin membership and AC rule vs brute force on the 1/4 grid", ok,
           f"{n_pts} grid points, {n_bad} membership and {n_ac_bad} AC disagreements")
    assert ok
