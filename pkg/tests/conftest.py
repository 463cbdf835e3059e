import numpy as np
import pytest

from rieszcone import Poset, StructureConstants, build_algebra, chain

P4_REL = [("1", "3"), ("1", "4"), ("2", "3")]


def p4() -> Poset:
    return Poset(["1", "2", "3", "4"], P4_REL)


def complex_tensor() -> np.ndarray:
    """Multiplication of complex numbers as a real (2, 2, 2) tensor."""
    L = np.zeros((2, 2, 2))
    L[0, 0, 0], L[0, 1, 1], L[1, 0, 1], L[1, 1, 0] = 1, -1, 1, 1
    return L


def complex_chain3(involution=None, tensor=None):
    L = complex_tensor() if tensor is None else tensor
    inv = {} if involution is None else {k: involution for k in ("1|2", "2|3", "1|3")}
    sc = StructureConstants(products={"3|2|1": L}, involutions=inv)
    return build_algebra(chain(3), {("1", "2"): 2, ("2", "3"): 2, ("1", "3"): 2}, sc)


def lorentz():
    return build_algebra(chain(2), {("1", "2"): 3}, StructureConstants())


def rand_lower(alg, rng, k=None, spread=1.0):
    """Lower triangular rows with positive diagonal."""
    shape = (alg.dim,) if k is None else (k, alg.dim)
    t = np.zeros(shape)
    t[..., : alg.dim_H] = spread * rng.standard_normal(shape[:-1] + (alg.dim_H,))
    t[..., : alg.n] = rng.uniform(0.5, 1.5, shape[:-1] + (alg.n,))
    return t


def rand_cone(alg, rng):
    return alg.element(alg.gram(rand_lower(alg, rng)))


def rand_dual(alg, rng):
    return alg.element(alg.gram_dual(rand_lower(alg, rng, spread=0.5)))


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)


@pytest.fixture
def P4():
    return p4()


@pytest.fixture
def a4():
    return build_algebra(p4())


ALGEBRAS = {
    "P4": lambda: build_algebra(p4()),
    "chain3": lambda: build_algebra(chain(3)),
    "chain4": lambda: build_algebra(chain(4)),
    "V": lambda: build_algebra(Poset("123", [("1", "2"), ("1", "3")])),
    "Lambda": lambda: build_algebra(Poset("123", [("1", "3"), ("2", "3")])),
    "lorentz": lorentz,
    "complex3": complex_chain3,
}


@pytest.fixture(params=sorted(ALGEBRAS))
def any_alg(request):
    return ALGEBRAS[request.param]()


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict[int, str] = {}


def record(num: int, title: str, ok: bool, detail: str = "") -> None:
    line = f"criterion {num:2d} {'PASS' if ok else 'FAIL'}  {title}"
    ACCEPTANCE[num] = line + (f"  [{detail}]" if detail else "")
    print(ACCEPTANCE[num])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
