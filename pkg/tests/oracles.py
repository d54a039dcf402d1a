"""Independent reference computations used by the tests."""
import numpy as np
from scipy.optimize import minimize

from conftest import YY


def brute_force_concurrence(rho, m=5, starts=2, rng=None):
    """Minimum average pure-state concurrence over m-element decompositions.

    Every decomposition is ``phi = U V`` with ``V`` the scaled eigenvectors and
    ``U`` an isometry; the pure concurrence of an unnormalized ``phi`` times
    its weight is ``|phi^T (Y x Y) phi|``.  A tiny smoothing keeps BFGS happy
    at zero.  The result is an upper bound on the true concurrence.
    """
    rng = rng or np.random.default_rng(0)
    w, v = np.linalg.eigh(rho)
    vv = v * np.sqrt(np.clip(w, 0, None))
    t = vv.T @ YY @ vv

    def polar(mat):
        u, _, vh = np.linalg.svd(mat, full_matrices=False)
        return u @ vh

    def f(x):
        u = polar((x[: 4 * m] + 1j * x[4 * m:]).reshape(m, 4))
        z = np.einsum("ki,ij,kj->k", u, t, u)
        return np.sum(np.sqrt(np.abs(z) ** 2 + 1e-14))

    best = np.inf
    for _ in range(starts):
        r = minimize(f, rng.normal(size=8 * m), method="BFGS", options={"gtol": 1e-10, "maxiter": 5000})
        best = min(best, r.fun)
    return best


def cayley_bracket(psi):
    """Cayley hyperdeterminant as the discriminant of ``det(A + t B)``.

    ``A`` and ``B`` are the two slices of the 2x2x2 tensor along qubit 1.
    """
    a = psi.reshape(2, 2, 2)
    A, B = a[0], a[1]
    # det(A + t B) = d0 + d1 t + d2 t^2
    d0 = np.linalg.det(A)
    d2 = np.linalg.det(B)
    d1 = A[0, 0] * B[1, 1] + B[0, 0] * A[1, 1] - A[0, 1] * B[1, 0] - B[0, 1] * A[1, 0]
    return d1 * d1 - 4 * d0 * d2


def pure_concurrence(psi4):
    return abs(psi4 @ YY @ psi4) / np.vdot(psi4, psi4).real


def one_tangle_direct(psi, focus, n):
    t = np.moveaxis(psi.reshape([2] * n), focus - 1, 0).reshape(2, -1)
    r = t @ t.conj().T
    return 4 * np.real(r[0, 0] * r[1, 1] - r[0, 1] * r[1, 0])
