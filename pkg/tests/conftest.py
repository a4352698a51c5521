import numpy as np
import pytest

from lienambu.matrix import PAULI

SX, SY, SZ = PAULI[1], PAULI[2], PAULI[3]
I2 = PAULI[0]
RHO_34 = np.diag([0.75, 0.25]).astype(complex)


def random_hermitian(rng, d, scale=1.0):
    X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * 0.5 * (X + X.conj().T)


def random_density(rng, d, rank=None):
    rank = d if rank is None else rank
    X = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = X @ X.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def random_pure(rng, d):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    v /= np.linalg.norm(v)
    return np.outer(v, v.conj())


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# (criterion number, passed, detail) rows filled in by test_acceptance.py
ACCEPTANCE = []


def record_acceptance(number, title, passed, detail):
    ACCEPTANCE.append((number, title, bool(passed), detail))
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} ({detail})"
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} ({detail})")
