import numpy as np
import pytest

from strongmono.qstate import ket_from_amplitudes

YY = np.array([[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=complex)


def cgauss(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_ket(rng, n=4):
    return ket_from_amplitudes(cgauss(rng, 2**n))


def random_density(rng, dim=4, rank=None):
    g = cgauss(rng, dim, rank or dim)
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import ACCEPTANCE
    except ImportError:
        return
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"ACCEPTANCE {n} {'PASS' if ok else 'FAIL'}: {detail}")
