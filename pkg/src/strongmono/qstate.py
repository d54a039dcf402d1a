"""States and operators on registers of two to four qubits.

Basis order is lexicographic with qubit 1 the most significant bit, so the
amplitude of ``|q1 q2 ... qn>`` sits at index ``int("q1q2...qn", 2)``.  Qubit
indices in the public API are 1-based.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import BadIndexSet, BadLength, NotDensity, NotHermitian, ZeroState

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-10
NEG_EIG_TOL = 1e-10

__all__ = [
    "Ket",
    "DensityOp",
    "LocalOp",
    "ket_from_amplitudes",
    "basis_ket",
    "density",
    "partial_trace",
    "reduced",
    "apply_local",
    "hermitian_eig",
    "jacobi_eigh",
    "read_state",
    "write_state",
    "ket_to_json",
    "ket_from_json",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Ket:
    """Unit-norm pure state.  Build it with :func:`ket_from_amplitudes`."""

    amplitudes: np.ndarray

    @property
    def n_qubits(self) -> int:
        return int(self.amplitudes.size).bit_length() - 1

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis of length 2 per qubit."""
        return self.amplitudes.reshape([2] * self.n_qubits)


@dataclass(frozen=True, eq=False)
class DensityOp:
    matrix: np.ndarray

    @property
    def n_qubits(self) -> int:
        return int(self.matrix.shape[0]).bit_length() - 1

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


@dataclass(frozen=True, eq=False)
class LocalOp:
    """Tensor product ``A1 x A2 x A3 x A4`` of single-qubit operators."""

    factors: tuple
    slocc: bool = False

    def __post_init__(self):
        facs = tuple(_frozen(np.asarray(f, dtype=complex).reshape(2, 2)) for f in self.factors)
        if not all(np.all(np.isfinite(f)) for f in facs):
            raise ValueError("local operator factors must be finite")
        if self.slocc:
            for f in facs:
                if abs(np.linalg.det(f) - 1) > 1e-10:
                    raise ValueError("SLOCC factors must have unit determinant")
        object.__setattr__(self, "factors", facs)

    @classmethod
    def on(cls, n_qubits: int, ops: dict, slocc: bool = False) -> "LocalOp":
        """Identity everywhere except the 1-based slots given in ``ops``."""
        facs = [np.eye(2)] * n_qubits
        for q, m in ops.items():
            facs[q - 1] = m
        return cls(tuple(facs), slocc=slocc)


def _check_length(n: int) -> int:
    if n not in (4, 8, 16):
        raise BadLength(f"amplitude vector must have length 4, 8 or 16, got {n}")
    return n.bit_length() - 1


def ket_from_amplitudes(amps) -> Ket:
    """Normalize ``amps`` into a :class:`Ket`."""
    v = np.asarray(amps, dtype=np.complex128).ravel()
    _check_length(v.size)
    norm = np.linalg.norm(v)
    if not norm > NORM_TOL:
        raise ZeroState("state vector has (numerically) zero norm")
    return Ket(_frozen(v / norm))


def basis_ket(bits: str) -> Ket:
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1
    return ket_from_amplitudes(v)


def density(k: Ket) -> DensityOp:
    v = k.amplitudes
    return DensityOp(_frozen(np.outer(v, v.conj())))


def _validate_keep(keep: Iterable[int], n: int) -> list:
    keep = list(keep)
    if not keep or len(set(keep)) != len(keep) or len(keep) >= n:
        raise BadIndexSet(f"keep={keep} must be a nonempty strict subset of 1..{n}")
    if any(not isinstance(q, (int, np.integer)) or q < 1 or q > n for q in keep):
        raise BadIndexSet(f"keep={keep} contains indices outside 1..{n}")
    return [int(q) - 1 for q in keep]


def reduced(k: Ket, keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix of a pure state on the qubits in ``keep``.

    Faster than ``partial_trace(density(k), keep)``; the kept qubits appear in
    the order given.
    """
    n = k.n_qubits
    idx = _validate_keep(keep, n)
    rest = [i for i in range(n) if i not in idx]
    m = np.transpose(k.amplitudes.reshape([2] * n), idx + rest).reshape(2 ** len(idx), -1)
    return m @ m.conj().T


def partial_trace(rho: DensityOp, keep: Sequence[int]) -> DensityOp:
    """Trace out every qubit not in ``keep`` (1-based, kept in the given order)."""
    mat = np.asarray(rho.matrix if isinstance(rho, DensityOp) else rho)
    n = int(mat.shape[0]).bit_length() - 1
    idx = _validate_keep(keep, n)
    rest = [i for i in range(n) if i not in idx]
    t = mat.reshape([2] * (2 * n))
    # bring kept axes first on both ket and bra side, then contract the rest
    t = np.transpose(t, idx + rest + [n + i for i in idx] + [n + i for i in rest])
    dk, dr = 2 ** len(idx), 2 ** len(rest)
    t = t.reshape(dk, dr, dk, dr)
    return DensityOp(_frozen(np.einsum("ajbj->ab", t)))


def apply_local(ops: LocalOp, k: Ket) -> Ket:
    """Return the normalized image ``(A1 x ... x An)|k>``."""
    n = k.n_qubits
    if len(ops.factors) != n:
        raise ValueError(f"operator has {len(ops.factors)} factors for a {n}-qubit state")
    t = k.amplitudes.reshape([2] * n)
    for q, a in enumerate(ops.factors):
        t = np.moveaxis(np.tensordot(a, t, axes=([1], [q])), 0, q)
    v = t.reshape(-1)
    if not np.linalg.norm(v) > NORM_TOL:
        raise ZeroState("local operator annihilates the state")
    return ket_from_amplitudes(v)


def jacobi_eigh(m, tol: float = 1e-13, max_sweeps: int = 60):
    """Cyclic Jacobi diagonalization of a small complex Hermitian matrix.

    Stops when the off-diagonal Frobenius norm drops below ``tol`` (relative
    to the Frobenius norm of ``m`` when that exceeds one).  Returns ascending
    eigenvalues and the matching eigenvector columns, like ``numpy.linalg.eigh``.
    """
    a = np.array(m, dtype=np.complex128)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    scale = max(1.0, np.linalg.norm(a))
    for _ in range(max_sweeps):
        off = np.sqrt(max(0.0, np.sum(np.abs(a) ** 2) - np.sum(np.abs(np.diag(a)) ** 2)))
        if off < tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                b = abs(apq)
                if b < 1e-300:
                    continue
                phase = apq / b
                theta = 0.5 * np.arctan2(-2 * b, a[p, p].real - a[q, q].real)
                c, s = np.cos(theta), np.sin(theta)
                g = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                cols = [p, q]
                a[:, cols] = a[:, cols] @ g
                a[cols, :] = g.conj().T @ a[cols, :]
                v[:, cols] = v[:, cols] @ g
                a[p, q] = a[q, p] = 0
    w = np.diag(a).real.copy()
    order = np.argsort(w)
    return w[order], v[:, order]


def hermitian_eig(m, method: str = "lapack"):
    """Eigen-decomposition of a Hermitian matrix, eigenvalues descending.

    ``method="jacobi"`` selects :func:`jacobi_eigh`; the default uses LAPACK.
    """
    mat = np.asarray(m.matrix if isinstance(m, DensityOp) else m, dtype=np.complex128)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise NotHermitian("matrix must be square")
    if np.max(np.abs(mat - mat.conj().T), initial=0.0) > HERMITIAN_TOL:
        raise NotHermitian("matrix is not Hermitian within 1e-10")
    herm = 0.5 * (mat + mat.conj().T)
    if method == "jacobi":
        w, v = jacobi_eigh(herm)
    elif method == "lapack":
        w, v = np.linalg.eigh(herm)
    else:
        raise ValueError(f"unknown method {method!r}")
    return w[::-1].copy(), v[:, ::-1].copy()


def clamp_spectrum(w: np.ndarray) -> np.ndarray:
    """Clamp roundoff negatives in ``[-1e-10, 0)`` to zero, reject the rest."""
    if np.any(w < -NEG_EIG_TOL):
        raise NotDensity(f"eigenvalue {w.min():.3e} below -1e-10")
    return np.where(w < 0, 0.0, w)


def as_density_matrix(rho, require_unit_trace: bool = True) -> np.ndarray:
    """Validate a density operator (or raw matrix) and return the array."""
    mat = np.asarray(rho.matrix if isinstance(rho, DensityOp) else rho, dtype=np.complex128)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise NotDensity("density operator must be a square matrix")
    if np.max(np.abs(mat - mat.conj().T)) > HERMITIAN_TOL:
        raise NotDensity("density operator is not Hermitian")
    if require_unit_trace and abs(np.trace(mat) - 1) > 1e-10:
        raise NotDensity(f"trace {np.trace(mat).real:.12f} != 1")
    return mat


# -- state file -------------------------------------------------------------

def ket_to_json(k: Ket) -> dict:
    v = k.amplitudes / np.linalg.norm(k.amplitudes)
    return {
        "n_qubits": k.n_qubits,
        "amplitudes": [[float(f"{z.real:.17g}"), float(f"{z.imag:.17g}")] for z in v],
    }


def ket_from_json(obj: dict) -> Ket:
    amps = obj["amplitudes"]
    v = np.array([complex(re, im) for re, im in amps])
    k = ket_from_amplitudes(v)
    if "n_qubits" in obj and obj["n_qubits"] != k.n_qubits:
        raise BadLength(f"n_qubits={obj['n_qubits']} but {len(amps)} amplitudes given")
    return k


def read_state(path) -> Ket:
    with open(path) as fh:
        return ket_from_json(json.load(fh))


def write_state(k: Ket, path) -> None:
    Path(path).write_text(json.dumps(ket_to_json(k), indent=1) + "\n")
