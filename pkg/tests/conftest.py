import json
from pathlib import Path

import numpy as np
import pytest

from singext.gram import GramSpec, antitriangular_gram
from singext.model_space import SingularFamily
from singext.spectral import SpectralOperator

ORACLE = json.loads((Path(__file__).parent / "oracle_values.json").read_text())


def oracle(key):
    v = ORACLE[key]
    if isinstance(v, list) and len(v) == 2 and all(isinstance(x, float) for x in v):
        return complex(*v)
    return v


def oracle_matrix(key):
    rows = ORACLE[key]
    return np.array([[complex(*x) if isinstance(x, list) else x for x in row] for row in rows])


@pytest.fixture(scope="session")
def op():
    return SpectralOperator.power(N=2000)


@pytest.fixture(scope="session")
def op_half():
    return SpectralOperator.power(N=1000)


@pytest.fixture(scope="session")
def fam(op):
    return SingularFamily.power_law(op, 2, 1)


@pytest.fixture(scope="session")
def fam2(op):
    return SingularFamily.power_law(op, 2, 2)


@pytest.fixture(scope="session")
def fam1(op):
    return SingularFamily.power_law(op, 1, 1)


@pytest.fixture(scope="session")
def gtilde(fam):
    return fam.gram_spec()


@pytest.fixture(scope="session")
def gtilde2(fam2):
    return fam2.gram_spec()


@pytest.fixture(scope="session")
def ganti():
    """m = 2, d = 1 anti-triangular Gram matrix [[0, 1], [1, 1]]."""
    return GramSpec(antitriangular_gram([1.0, 1.0], 2), 2, 1)


@pytest.fixture(scope="session")
def ganti2():
    H = np.zeros((2, 2, 2), dtype=complex)
    H[0, 0] = [1.0, 0.5]
    H[1, 1] = [2.0, -0.3]
    H[0, 1] = [0.2 + 0.1j, 0.4]
    H[1, 0] = np.conj(H[0, 1])
    return GramSpec(antitriangular_gram(H, 2), 2, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def cvec(rng, n):
    return rng.normal(size=n) + 1j * rng.normal(size=n)


def finite_vector(op, index, rng, modes=8):
    c = np.zeros(op.N, dtype=complex)
    c[:modes] = cvec(rng, modes)
    return op.vector(c, index)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """record(n, ok, message): print and keep one line per acceptance criterion."""

    def record(n, ok, message):
        line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {message}"
        print(line)
        ACCEPTANCE_LINES.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
