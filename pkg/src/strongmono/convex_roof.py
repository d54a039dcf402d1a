"""Convex roof of the three-tangle on rank-2 three-qubit operators.

A rank-2 operator ``rho = v1 v1^+ + v2 v2^+`` (``v1``, ``v2`` orthogonal,
subnormalized eigenvectors) is decomposed by ensembles
``phi_k = U_k1 v1 + U_k2 v2`` where ``U`` is an ``m x 2`` isometry.  The
unnormalized tangle along the range line ``v1 + t v2`` is a quartic in ``t``;
its zeros drive both the one-root certificate and the seeding of the upper
bound search.

The upper bound search works on the Bloch sphere of the range: writing the
rows of ``U`` as ``sqrt(w_k) n_k`` with unit ``n_k``, the isometry condition
becomes ``sum w_k = 2`` and ``sum w_k r_k = 0`` for the Bloch vectors ``r_k``,
and the ensemble objective is linear in the weights.  A linear program over a
candidate set of Bloch points therefore gives a certified decomposition, which
is then sharpened by adding points around the support (column generation).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import linprog, minimize, nnls

from .errors import IdenticallyZero, NotOneRoot, RankTooHigh
from .qstate import as_density_matrix, hermitian_eig
from .tangles import BRACKET_MONOMIALS, tangle_bracket

__all__ = [
    "RangeBasis",
    "RootCluster",
    "RoofValue",
    "RoofOptions",
    "FAST_OPTIONS",
    "COARSE_OPTIONS",
    "range_basis",
    "tangle_quartic",
    "tangle_zeros",
    "is_one_root",
    "roof_exact_one_root",
    "roof_upper_bound",
    "roof",
    "eig_average",
    "ensemble_objective",
]

RANK_TOL = 1e-9
RANK1_TOL = 1e-12
ZERO_QUARTIC_TOL = 1e-14
DEGREE_DROP_TOL = 1e-12
GAP_TOL = 1e-7


@dataclass(frozen=True)
class RoofOptions:
    """Settings for the upper-bound search.

    ``m`` is the ensemble size.  ``n_grid`` Bloch points (antipodally
    symmetric) plus ``n_random * m`` random points seed the linear program;
    up to ``refine_rounds`` column-generation rounds and a continuous
    polish of the support (``polish``) follow.  With ``nested`` the
    two-element optimum is always folded in, which makes the bound
    non-increasing in ``m``.
    """

    m: int = 6
    n_random: int = 8
    n_grid: int = 400
    refine_rounds: int = 12
    nested: bool = True
    polish: bool = True
    seed: int = 0
    cluster_tol: float = 1e-6
    rank_tol: float = RANK_TOL
    maxiter: int = 2000


FAST_OPTIONS = RoofOptions(n_grid=240, refine_rounds=3, nested=False, polish=False, n_random=2)
#: Grid LP only, for screening states far from the boundary.
COARSE_OPTIONS = RoofOptions(n_grid=120, refine_rounds=0, nested=False, polish=False, n_random=1)


@dataclass(frozen=True, eq=False)
class RangeBasis:
    v1: np.ndarray
    v2: np.ndarray
    p1: float
    p2: float
    quartic: np.ndarray

    @property
    def rank(self) -> int:
        return 1 if self.p2 == 0 else 2

    @property
    def scale(self) -> float:
        """Natural size of the quartic coefficients, ``(p1 + p2)**2``."""
        return (self.p1 + self.p2) ** 2


@dataclass(frozen=True, eq=False)
class RootCluster:
    """Zeros of the tangle quartic on the projective line ``[alpha : beta]``.

    ``roots`` holds ``t = beta/alpha`` (``complex('inf')`` when ``alpha = 0``);
    ``points`` the same roots as unit 2-vectors ``(alpha, beta)``.
    """

    roots: tuple
    multiplicities: tuple
    points: np.ndarray
    fit_residual: float

    @property
    def n_distinct(self) -> int:
        return len(self.roots)


@dataclass(frozen=True, eq=False)
class RoofValue:
    value: float
    exact: bool
    power: float = 2.0
    decomposition: np.ndarray = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {"value": self.value, "exact": self.exact, "power": self.power}


# -- range and quartic ------------------------------------------------------

def range_basis(rho, rank_tol: float = RANK_TOL) -> RangeBasis:
    """Two leading eigenpairs of a three-qubit operator, scaled by sqrt(eigenvalue).

    Subnormalized (trace below one) inputs are accepted.
    """
    mat = as_density_matrix(rho, require_unit_trace=False)
    if mat.shape != (8, 8):
        raise ValueError("range_basis needs a three-qubit (8x8) operator")
    w, v = hermitian_eig(mat)
    if w[2] >= rank_tol:
        raise RankTooHigh(f"third eigenvalue {w[2]:.3e} >= {rank_tol:g}")
    if w[-1] < -1e-10:
        raise ValueError("operator is not positive semidefinite")
    p1 = float(max(w[0], 0.0))
    p2 = float(w[1]) if w[1] > RANK1_TOL else 0.0
    v1 = np.sqrt(p1) * v[:, 0]
    v2 = np.sqrt(p2) * v[:, 1]
    return RangeBasis(v1, v2, p1, p2, _expand_bracket(v1, v2))


_MON_W = np.array([w for w, _ in BRACKET_MONOMIALS])
_MON_I = np.array([m for _, m in BRACKET_MONOMIALS])


def _expand_bracket(v1: np.ndarray, v2: np.ndarray) -> np.ndarray:
    # each monomial is a product of four linear factors x + t y
    x, y = v1[_MON_I], v2[_MON_I]
    poly = np.zeros((len(_MON_W), 5), dtype=complex)
    poly[:, 0], poly[:, 1] = x[:, 0], y[:, 0]
    for j in range(1, 4):
        nxt = poly * x[:, j, None]
        nxt[:, 1:] += poly[:, :-1] * y[:, j, None]
        poly = nxt
    return _MON_W @ poly


def tangle_quartic(rb: RangeBasis) -> np.ndarray:
    """Coefficients ``c0..c4`` of ``bracket(v1 + t v2) = sum c_k t^k``."""
    return _expand_bracket(rb.v1, rb.v2)


# -- zeros of the quartic ----------------------------------------------------

def _set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


_PARTITIONS = sorted((tuple(map(tuple, p)) for p in _set_partitions([0, 1, 2, 3])), key=len)


def _unit(alpha, beta) -> np.ndarray:
    z = np.array([alpha, beta], dtype=complex)
    return z / np.linalg.norm(z)


def _center(points: np.ndarray):
    # arithmetic mean in an affine chart where the whole block is finite; the
    # mean of a perturbed k-fold root is accurate to first order.  None when
    # the block holds both t = 0 and t = inf.
    a, b = np.abs(points[:, 0]), np.abs(points[:, 1])
    if a.min() >= b.min() and a.min() > 1e-150:
        return _unit(1.0, np.mean(points[:, 1] / points[:, 0]))
    if b.min() > 1e-150:
        return _unit(np.mean(points[:, 0] / points[:, 1]), 1.0)
    return None


def _form_from_roots(points: np.ndarray) -> np.ndarray:
    # linear factor vanishing at [a:b] is b*alpha - a*beta, i.e. b - a t
    f = np.array([1.0 + 0j])
    for a, b in points:
        f = np.convolve(f, np.array([b, -a]))
    return f


def _fit_residual(points: np.ndarray, c: np.ndarray, ref: float) -> float:
    f = _form_from_roots(points)
    lam = np.vdot(f, c) / np.vdot(f, f)
    return float(np.linalg.norm(c - lam * f) / ref)


def tangle_zeros(c, tol: float = 1e-6, scale: float = None) -> RootCluster:
    """Projective zeros of a tangle quartic, grouped by multiplicity.

    A k-fold root splits under roundoff into k roots spread like
    ``eps**(1/k)``, so roots are grouped by how well the polynomial is
    reproduced, not by their distance: a grouping is accepted when the
    quartic rebuilt from the group centers matches ``c`` to within
    ``tol**2``, and the grouping with the fewest distinct roots wins.  The
    mismatch is measured relative to ``scale`` (default ``|c|``).  Pass the squared trace of the operator when
    ``c`` comes from a range basis: roundoff in ``c`` lives at that scale, so
    nearly tangle-free ranges are not split into spurious distinct roots.
    """
    c = np.asarray(c, dtype=complex)
    ref = np.linalg.norm(c) if scale is None else max(scale, np.linalg.norm(c))
    scale = np.max(np.abs(c))
    if scale < ZERO_QUARTIC_TOL:
        raise IdenticallyZero("tangle vanishes on the whole range")
    deg = 4
    while abs(c[deg]) < DEGREE_DROP_TOL * scale:
        deg -= 1
    pts = [_unit(1.0, t) for t in np.roots(c[: deg + 1][::-1])]
    pts += [np.array([0j, 1.0 + 0j])] * (4 - deg)
    pts = np.array(pts)

    best = None
    for part in _PARTITIONS:
        if best is not None and len(part) > len(best[0]):
            break
        centers = [_center(pts[list(blk)]) for blk in part]
        if any(z is None for z in centers):
            continue
        rebuilt = np.array([centers[b] for b, blk in enumerate(part) for _ in blk])
        res = _fit_residual(rebuilt, c, ref)
        if res <= tol**2 or len(part) == 4:
            if best is None or res < best[2]:
                best = (part, centers, res)
    part, centers, res = best
    roots = tuple(complex("inf") if abs(z[0]) < 1e-300 else complex(z[1] / z[0]) for z in centers)
    return RootCluster(roots, tuple(len(b) for b in part), np.array(centers), res)


def is_one_root(rho, options: RoofOptions = RoofOptions()) -> bool:
    """True when the range holds a single zero-tangle state (or only such states)."""
    rb = range_basis(rho, options.rank_tol)
    if rb.rank == 1:
        return True
    try:
        return tangle_zeros(rb.quartic, options.cluster_tol, rb.scale).n_distinct == 1
    except IdenticallyZero:
        return True


# -- ensemble objective ------------------------------------------------------

def _rows_terms(u: np.ndarray, c: np.ndarray, p: np.ndarray, q: float) -> np.ndarray:
    """Per-element ``||phi||^2 tau(phi/||phi||)^(1/q)`` for coordinate rows ``u``."""
    al, be = u[:, 0], u[:, 1]
    br = c[0] * al**4 + c[1] * al**3 * be + c[2] * al**2 * be**2 + c[3] * al * be**3 + c[4] * be**4
    nrm2 = np.abs(al) ** 2 * p[0] + np.abs(be) ** 2 * p[1]
    tau4 = 4 * np.abs(br)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = nrm2 ** (1 - 2 / q) * tau4 ** (1 / q)
    return np.where(nrm2 > 0, out, 0.0)


def ensemble_objective(u: np.ndarray, rb: RangeBasis, q: float = 2.0) -> float:
    """``sum_k ||phi_k||^2 tau(phi_k)^(1/q)`` for ``phi_k = u_k1 v1 + u_k2 v2``."""
    return float(np.sum(_rows_terms(np.asarray(u, dtype=complex), rb.quartic, (rb.p1, rb.p2), q)))


def _polar(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m.conj().T @ m)
    return m @ (v * (1 / np.sqrt(np.maximum(w, 1e-300)))) @ v.conj().T


def eig_average(rho, q: float = 2.0) -> float:
    """Roof objective of the eigen-decomposition, raised to ``q``."""
    rb = range_basis(rho)
    if rb.rank == 1:
        return _pure_value(rb, q)
    return ensemble_objective(np.eye(2), rb, q) ** q


def _pure_value(rb: RangeBasis, q: float) -> float:
    # (p1 tau^(1/q))^q, so subnormalized inputs scale like any decomposition
    if rb.p1 == 0:
        return 0.0
    tau = min(1.0, 4 * abs(tangle_bracket(rb.v1)) / rb.p1**2)
    return float(rb.p1**q * tau)


# -- exact one-root evaluation ------------------------------------------------

def roof_exact_one_root(rho, options: RoofOptions = RoofOptions()) -> RoofValue:
    """Exact convex roof of ``sqrt(tau3)`` (squared) for a one-root operator.

    Every decomposition gives the same ensemble average here, so the
    eigen-decomposition is used.
    """
    rb = range_basis(rho, options.rank_tol)
    if rb.rank == 1:
        return RoofValue(_pure_value(rb, 2.0), True, 2.0, np.eye(2)[:1])
    try:
        clus = tangle_zeros(rb.quartic, options.cluster_tol, rb.scale)
    except IdenticallyZero:
        return RoofValue(0.0, True, 2.0, np.eye(2))
    if clus.n_distinct != 1:
        raise NotOneRoot(f"range has {clus.n_distinct} distinct zero-tangle states")
    s = ensemble_objective(np.eye(2), rb, 2.0)
    return RoofValue(float(s * s), True, 2.0, np.eye(2))


# -- upper bound ---------------------------------------------------------------

def _bloch(n: np.ndarray) -> np.ndarray:
    a, b = n[:, 0], n[:, 1]
    ab = np.conj(a) * b
    return np.stack([2 * ab.real, 2 * ab.imag, np.abs(a) ** 2 - np.abs(b) ** 2], axis=1)


def _spinor(r: np.ndarray) -> np.ndarray:
    r = r / np.linalg.norm(r, axis=1, keepdims=True)
    th = np.arccos(np.clip(r[:, 2], -1.0, 1.0))
    ph = np.arctan2(r[:, 1], r[:, 0])
    return np.stack([np.cos(th / 2) + 0j, np.exp(1j * ph) * np.sin(th / 2)], axis=1)


def _fibonacci(n: int) -> np.ndarray:
    i = np.arange(n) + 0.5
    z = 1 - i / n  # upper hemisphere; mirrored below
    th = np.pi * (1 + 5**0.5) * i
    rr = np.sqrt(1 - z * z)
    half = np.stack([rr * np.cos(th), rr * np.sin(th), z], axis=1)
    return np.vstack([half, -half])


_GRID_CACHE: dict = {}


def _grid(n: int) -> np.ndarray:
    if n not in _GRID_CACHE:
        _GRID_CACHE[n] = _fibonacci(max(n // 2, 1))
    return _GRID_CACHE[n]


class _Problem:
    """Bloch-sphere form of the roof minimization for one range basis."""

    def __init__(self, rb: RangeBasis, q: float, zeros: np.ndarray = None):
        self.c = rb.quartic
        self.p = np.array([rb.p1, rb.p2])
        self.q = q
        self.zeros = np.zeros((0, 3)) if zeros is None else zeros

    def g(self, r: np.ndarray) -> np.ndarray:
        """Weight-one objective ``g(r)``; exactly 0 on the tangle zeros.

        At a float approximation of a root the computed tangle is of order
        ``eps`` and ``g`` of order ``eps**(1/q)``, which for large ``q`` is
        far above the optimizer's resolution.  The zero-tangle state itself
        is a valid ensemble member, so its column is given its true value 0.
        """
        out = _rows_terms(_spinor(r), self.c, self.p, self.q)
        if len(self.zeros):
            d = np.min(np.sum((r[:, None, :] - self.zeros[None, :, :]) ** 2, axis=2), axis=1)
            out = np.where(d < 1e-26, 0.0, out)
        return out

    def lp(self, pts: np.ndarray):
        """Best weights on ``pts``: (value, support, weights, duals)."""
        gv = self.g(pts)
        a = np.vstack([pts.T, np.ones(len(pts))])
        b = np.array([0.0, 0.0, 0.0, 2.0])
        res = linprog(gv, A_eq=a, b_eq=b, bounds=(0, None), method="highs",
                      options={"primal_feasibility_tolerance": 1e-10,
                               "dual_feasibility_tolerance": 1e-10})
        if res.status != 0:
            return np.inf, pts[:0], np.zeros(0), None
        sup = res.x > 1e-13
        s_pts = pts[sup]
        w, _ = nnls(np.vstack([s_pts.T, np.ones(len(s_pts))]), b)
        return self.value(s_pts, w), s_pts, w, np.asarray(res.eqlin.marginals)

    def reduced_cost(self, r: np.ndarray, y: np.ndarray) -> np.ndarray:
        return self.g(r) - r @ y[:3] - y[3]

    def rows(self, pts: np.ndarray, w: np.ndarray) -> np.ndarray:
        return _polar(np.sqrt(w)[:, None] * _spinor(pts))

    def value(self, pts: np.ndarray, w: np.ndarray) -> float:
        # the objective is linear in the weights: row sqrt(w) n contributes w g(n)
        if len(pts) == 0:
            return np.inf
        return float(np.dot(w, self.g(pts)))


def _tangent_ring(s: np.ndarray, radius: float, k: int = 10) -> np.ndarray:
    return _tangent_rings(s[None, :], np.array([radius]), k)[0]


_RING8 = np.exp(2j * np.pi * np.arange(8) / 8)


def _tangent_frame(s: np.ndarray):
    """Orthonormal tangent vectors ``e1, e2`` at each unit row of ``s``."""
    x, y, z = s[:, 0], s[:, 1], s[:, 2]
    use_x = np.abs(x) < 0.9
    # s cross (1,0,0) = (0, z, -y);  s cross (0,1,0) = (-z, 0, x)
    e1 = np.where(use_x[:, None], np.stack([0 * x, z, -y], axis=1), np.stack([-z, 0 * x, x], axis=1))
    e1 /= np.sqrt(np.einsum("ij,ij->i", e1, e1))[:, None]
    a, b, c = e1[:, 0], e1[:, 1], e1[:, 2]
    e2 = np.stack([y * c - z * b, z * a - x * c, x * b - y * a], axis=1)
    return e1, e2


def _tangent_rings(s: np.ndarray, radius: np.ndarray, k: int) -> np.ndarray:
    """``k`` points at distance ``radius`` around each row of ``s``: shape (n, k, 3)."""
    e1, e2 = _tangent_frame(s)
    ring = _RING8 if k == 8 else np.exp(2j * np.pi * np.arange(k) / k)
    off = ring.real[None, :, None] * e1[:, None, :] + ring.imag[None, :, None] * e2[:, None, :]
    pts = s[:, None, :] + radius[:, None, None] * off
    return pts / np.sqrt(np.einsum("ijk,ijk->ij", pts, pts))[:, :, None]


def _pattern_minimize(f, starts: np.ndarray, radius: float, stop: float = 1e-10,
                      max_steps: int = 400) -> tuple:
    """Shrinking-ring pattern search of ``f`` on the sphere, all starts at once."""
    r = starts.copy()
    val = f(r)
    rad = np.full(len(r), radius)
    for _ in range(max_steps):
        live = rad >= stop
        if not live.any():
            break
        ring = _tangent_rings(r[live], rad[live], 8)
        fv = f(ring.reshape(-1, 3)).reshape(ring.shape[:2])
        j = np.argmin(fv, axis=1)
        best = fv[np.arange(len(j)), j]
        idx = np.flatnonzero(live)
        better = best < val[idx]
        r[idx[better]] = ring[better, j[better]]
        val[idx[better]] = best[better]
        rad[idx[~better]] *= 0.5
    return r, val


def _polish_support(prob: "_Problem", sup: np.ndarray, w: np.ndarray, val: float,
                    opts: RoofOptions):
    """Move the non-zero support points continuously, weights fixed by the constraints.

    With four support points the constraints ``sum w r = 0``, ``sum w = 2``
    determine the weights, so only the free points' positions remain.
    """
    free = prob.g(sup) > 0
    if not opts.polish or len(sup) != 4 or not free.any():
        return val, sup, w
    base = sup[free]
    e1, e2 = _tangent_frame(base)
    b = np.array([0.0, 0.0, 0.0, 2.0])

    def place(x):
        x = x.reshape(-1, 2)
        r = sup.copy()
        moved = base + x[:, :1] * e1 + x[:, 1:] * e2
        r[free] = moved / np.linalg.norm(moved, axis=1, keepdims=True)
        return r

    def f(x):
        r = place(x)
        try:
            ww = np.linalg.solve(np.vstack([r.T, np.ones(4)]), b)
        except np.linalg.LinAlgError:
            return np.inf
        if ww.min() < 0:
            return val * (1 + 1e-3) - ww.min()
        return float(ww @ prob.g(r))

    res = minimize(f, np.zeros(2 * int(free.sum())), method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-18, "maxiter": opts.maxiter, "adaptive": True})
    if not res.fun < val:
        return val, sup, w
    r = place(res.x)
    ww = np.clip(np.linalg.solve(np.vstack([r.T, np.ones(4)]), b), 0.0, None)
    return prob.value(r, ww), r, ww


def _column_generation(prob: "_Problem", pts: np.ndarray, fixed: np.ndarray,
                       opts: RoofOptions):
    """LP over ``pts`` refined by pricing new columns from the LP duals.

    Each round minimizes the reduced cost ``g(r) - y.(r, 1)`` over the
    sphere, starting from the support and the cheapest grid points, and adds
    the minimizers as columns.  ``fixed`` columns (the tangle zeros, where
    ``g`` has a cusp) are always kept.  Since the weights sum to 2, the LP
    value exceeds the optimum by at most ``-2 min(rc)``; the rounds stop
    once that gap is below ``GAP_TOL`` relative to the value, and the
    remaining tail is left to the continuous polish.
    """
    val, sup, w, y = prob.lp(pts)
    grid = _grid(opts.n_grid)
    radius = 0.5 * np.sqrt(4 * np.pi / max(opts.n_grid, 1))
    pool = np.empty((0, 3))
    stalled = 0
    for _ in range(opts.refine_rounds):
        if y is None or len(sup) == 0:
            break
        rc = prob.reduced_cost(grid, y)
        starts = np.vstack([sup, grid[np.argsort(rc)[:8]]])
        new, new_rc = _pattern_minimize(lambda r: prob.reduced_cost(r, y), starts, radius)
        if -2 * min(new_rc.min(), rc.min()) <= GAP_TOL * max(abs(val), 1e-12):
            break
        # columns are pooled: under degeneracy a pivot may not lower the value
        pool = np.vstack([pool, new[new_rc < 0]])
        cols = np.vstack([sup, fixed, pool, -sup])
        val2, sup2, w2, y2 = prob.lp(cols)
        if y2 is None:
            break
        stalled = stalled + 1 if not val2 < val else 0
        if val2 <= val:
            val, sup, w, y = val2, sup2, w2, y2
        if stalled >= 3:
            break
    return _polish_support(prob, sup, w, val, opts)


def _angles_to_r(th, ph):
    return np.array([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])


def _pair_stage(prob: _Problem, seeds: np.ndarray, opts: RoofOptions):
    """Best two-element (antipodal Bloch pair) decomposition.

    Grid search followed by a shrinking-ring pattern search on the sphere.
    """
    grid = np.vstack([seeds, _grid(opts.n_grid)])
    h = prob.g(grid) + prob.g(-grid)
    order = np.argsort(h)[:3]
    best_r, best = grid[order[0]], float(h[order[0]])
    for i in order:
        r, val = grid[i], float(h[i])
        radius = 0.5 * np.sqrt(4 * np.pi / max(opts.n_grid, 1))
        for _ in range(opts.maxiter):
            if radius < 1e-10:
                break
            ring = _tangent_ring(r, radius, 8)
            hr = prob.g(ring) + prob.g(-ring)
            j = int(np.argmin(hr))
            if hr[j] < val:
                r, val = ring[j], float(hr[j])
            else:
                radius *= 0.5
        if val < best:
            best, best_r = val, r
    pts = np.array([best_r, -best_r])
    w = np.ones(2)
    return prob.value(pts, w), pts, w


def _isometry_stage(prob: _Problem, m: int, starts, opts: RoofOptions):
    """Nelder-Mead over unconstrained m x 2 matrices, orthonormalized."""

    def f(x):
        mm = (x[: 2 * m] + 1j * x[2 * m:]).reshape(m, 2)
        return float(np.sum(_rows_terms(_polar(mm), prob.c, prob.p, prob.q)))

    best, best_u = np.inf, None
    for u0 in starts:
        x0 = np.concatenate([u0.real.ravel(), u0.imag.ravel()])
        res = minimize(f, x0, method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": opts.maxiter,
                                "adaptive": True})
        if res.fun < best:
            best = float(res.fun)
            best_u = _polar((res.x[: 2 * m] + 1j * res.x[2 * m:]).reshape(m, 2))
    return best, best_u


def _zero_seeds(rb: RangeBasis, opts: RoofOptions) -> np.ndarray:
    try:
        clus = tangle_zeros(rb.quartic, opts.cluster_tol, rb.scale)
    except IdenticallyZero:
        return np.zeros((0, 3))
    return _bloch(clus.points)


def _frame_from_zeros(zeros: np.ndarray, m: int) -> np.ndarray:
    """Isometry whose first rows point at the given zero directions."""
    n = _spinor(zeros)
    proj = sum(np.outer(z, z.conj()) for z in n)
    lam = 1.0 / max(np.linalg.eigvalsh(proj).max(), 1e-12)
    rows = [np.sqrt(lam) * z for z in n]
    w, v = np.linalg.eigh(np.eye(2) - lam * proj)
    rows += [np.sqrt(wi) * v[:, i] for i, wi in sorted(enumerate(w), key=lambda t: -t[1]) if wi > 1e-12]
    if len(rows) >= m:
        return _polar(np.array(rows[:m]))
    return np.array(rows + [np.zeros(2)] * (m - len(rows)))


def roof_upper_bound(rho, q: float = 2.0, m: int = None,
                     options: RoofOptions = RoofOptions()) -> RoofValue:
    """Optimized upper bound on ``[min sum p_k tau(psi_k)^(1/q)]^q``.

    Never exceeds the eigen-decomposition average.  The returned
    ``decomposition`` is the ``m x 2`` isometry that attains the value.
    """
    m = options.m if m is None else m
    if q < 2:
        raise ValueError("q must be >= 2")
    if m < 2:
        raise ValueError("ensemble size m must be >= 2")
    rb = range_basis(rho, options.rank_tol)
    if rb.rank == 1:
        return RoofValue(_pure_value(rb, q), False, q, np.eye(m, 2))
    if np.max(np.abs(rb.quartic)) < ZERO_QUARTIC_TOL:
        return RoofValue(0.0, False, q, np.eye(m, 2))

    zeros = _zero_seeds(rb, options)
    prob = _Problem(rb, q, zeros)
    rng = np.random.default_rng(options.seed)
    axis = np.array([[0, 0, 1.0], [0, 0, -1.0]])
    # eigen-decomposition is the reference every stage must beat
    cands = [(prob.value(axis, np.ones(2)), axis, np.ones(2))]

    if m <= 3 or options.nested:
        cands.append(_pair_stage(prob, np.vstack([axis, zeros]), options))
    if m == 3:
        starts = [np.vstack([prob.rows(cands[-1][1], cands[-1][2]), np.zeros(2)])]
        if len(zeros):
            starts.append(_frame_from_zeros(zeros, 3))
        starts += [rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2)) for _ in range(options.n_random)]
        val, u = _isometry_stage(prob, 3, starts, options)
        wts = np.sum(np.abs(u) ** 2, axis=1)
        keep = wts > 1e-300
        u = u[keep]
        cands.append((val, _bloch(u / np.sqrt(wts[keep])[:, None]), wts[keep]))
    if m >= 4:
        extra = rng.normal(size=(options.n_random * m, 3))
        fixed = np.vstack([axis, zeros, -zeros])
        pts = np.vstack([fixed, _grid(options.n_grid), extra / np.linalg.norm(extra, axis=1, keepdims=True)]
                        + [c[1] for c in cands])
        cands.append(_column_generation(prob, pts, np.vstack([fixed] + [c[1] for c in cands]), options))

    val, pts, w = min(cands, key=lambda c: c[0])
    u = prob.rows(pts, w)
    u = np.vstack([u, np.zeros((max(0, m - len(u)), 2))])
    return RoofValue(min(val**q, 1.0), False, q, u)


def roof(rho, q: float = 2.0, options: RoofOptions = RoofOptions()) -> RoofValue:
    """Mixed three-tangle: exact for one-root operators at ``q = 2``, else a bound."""
    if q == 2:
        try:
            return roof_exact_one_root(rho, options)
        except NotOneRoot:
            pass
    return roof_upper_bound(rho, q, options.m, options)


def with_options(options: RoofOptions, **kw) -> RoofOptions:
    return replace(options, **kw)
