"""Pure-state tangles: one-tangle, concurrence / two-tangle and three-tangle."""
from __future__ import annotations

import numpy as np

from .errors import BadIndex, BadLength, NotDensity
from .qstate import Ket, as_density_matrix, clamp_spectrum, ket_from_amplitudes, reduced

__all__ = [
    "one_tangle",
    "concurrence",
    "two_tangle",
    "three_tangle_pure",
    "tangle_bracket",
    "ckw_residual",
    "BRACKET_MONOMIALS",
]

_YY = np.array([[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=complex)


RANK_ZERO_TOL = 1e-14


def _clamp(value: float) -> float:
    return 0.0 if -1e-10 <= value < 0 else float(value)


def _check_focus(q, n: int) -> int:
    if not isinstance(q, (int, np.integer)) or not 1 <= q <= n:
        raise BadIndex(f"qubit index {q!r} outside 1..{n}")
    return int(q)


def one_tangle(k: Ket, focus: int = 1) -> float:
    """Linear entropy ``4 det(rho_focus)`` of one qubit against the rest."""
    focus = _check_focus(focus, k.n_qubits)
    r = reduced(k, [focus])
    return _clamp(4 * np.linalg.det(r).real)


def concurrence(rho) -> float:
    """Wootters concurrence of a two-qubit density operator.

    The spin-flip values ``lambda_i`` are taken as the singular values of
    ``V^T (Y x Y) V``, with columns ``sqrt(p_i) e_i`` from the eigenpairs of
    ``rho``.  They equal the square roots of the spectrum of
    ``rho (Y x Y) rho* (Y x Y)``, but avoid square roots of roundoff-sized
    eigenvalues, which would cost half the digits on low-rank inputs.
    Eigenvalues below ``1e-14`` are treated as exact zeros.
    """
    mat = as_density_matrix(rho)
    if mat.shape != (4, 4):
        raise NotDensity("concurrence needs a 4x4 two-qubit operator")
    w, v = np.linalg.eigh(0.5 * (mat + mat.conj().T))
    w = clamp_spectrum(w)
    keep = w > RANK_ZERO_TOL
    vs = v[:, keep] * np.sqrt(w[keep])
    lam = np.zeros(4)
    if vs.shape[1]:
        s = np.linalg.svd(vs.T @ _YY @ vs, compute_uv=False)
        lam[: s.size] = s
    return _clamp(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def two_tangle(k: Ket, i: int, j: int) -> float:
    n = k.n_qubits
    i, j = _check_focus(i, n), _check_focus(j, n)
    if i == j:
        raise BadIndex("two_tangle needs two distinct qubits")
    pair = sorted((i, j))
    return _clamp(concurrence(reduced(k, pair)) ** 2)


def _idx(bits: str) -> int:
    return int(bits, 2)


# Cayley hyperdeterminant d1 - 2 d2 + 4 d3 as (weight, four amplitude indices).
_D1 = [("000", "000", "111", "111"), ("001", "001", "110", "110"),
       ("010", "010", "101", "101"), ("100", "100", "011", "011")]
_D2 = [("000", "111", "011", "100"), ("000", "111", "101", "010"),
       ("000", "111", "110", "001"), ("011", "100", "101", "010"),
       ("011", "100", "110", "001"), ("101", "010", "110", "001")]
_D3 = [("000", "110", "101", "011"), ("111", "001", "010", "100")]

BRACKET_MONOMIALS = (
    [(1.0, tuple(map(_idx, m))) for m in _D1]
    + [(-2.0, tuple(map(_idx, m))) for m in _D2]
    + [(4.0, tuple(map(_idx, m))) for m in _D3]
)
_W = np.array([w for w, _ in BRACKET_MONOMIALS])
_I = np.array([m for _, m in BRACKET_MONOMIALS])


def tangle_bracket(v) -> np.ndarray:
    """Degree-4 polynomial ``d1 - 2 d2 + 4 d3`` of (unnormalized) 3-qubit amplitudes.

    Vectorized over leading axes; the last axis has length 8.  The pure
    three-tangle of a normalized vector is ``4 |bracket|``.
    """
    v = np.asarray(v, dtype=np.complex128)
    if v.shape[-1] != 8:
        raise BadLength("three-qubit amplitudes need 8 entries")
    prods = v[..., _I[:, 0]] * v[..., _I[:, 1]] * v[..., _I[:, 2]] * v[..., _I[:, 3]]
    return prods @ _W


def three_tangle_pure(k) -> float:
    """Three-tangle of a pure three-qubit state (``Ket`` or 8 amplitudes)."""
    if not isinstance(k, Ket):
        k = ket_from_amplitudes(k)
    if k.n_qubits != 3:
        raise BadLength("three_tangle_pure needs a 3-qubit state")
    return _clamp(4 * abs(tangle_bracket(k.amplitudes)))


def ckw_residual(k: Ket, focus: int = 1) -> float:
    """One-tangle of ``focus`` minus all its two-tangles."""
    others = [q for q in range(1, k.n_qubits + 1) if q != focus]
    return one_tangle(k, focus) - sum(two_tangle(k, focus, j) for j in others)
