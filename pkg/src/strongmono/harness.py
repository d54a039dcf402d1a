"""Monte Carlo scans, parameter sweeps, histograms, minimization and self-tests."""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import minimize

from . import convex_roof as cr
from .convex_roof import COARSE_OPTIONS, FAST_OPTIONS, RoofOptions
from .errors import NoConvergence
from .families import (A0, ClassSpec, family_rho1, family_rho2, generalized_w, generator_g4, ghz4,
                       haar_ket, random_class_state, random_unitary, slocc_ax, stream)
from .monogamy import HOLDS_TOL, NATURAL, VariantSpec, pairwise_residual, residual
from .qstate import (Ket, LocalOp, apply_local, hermitian_eig, jacobi_eigh, ket_from_amplitudes,
                     partial_trace, density, reduced)
from .tangles import one_tangle, three_tangle_pure, two_tangle

__all__ = [
    "ScanConfig",
    "ScanSummary",
    "run_scan",
    "draw_sample",
    "Histogram",
    "histogram",
    "default_edges",
    "SweepGrid",
    "sweep_grid",
    "axis_values",
    "DEFAULT_AXES",
    "minimize_residual",
    "SelftestReport",
    "selftest",
    "FAMILIES",
]

FAMILIES = ("rho1", "rho2")


def _cplx(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


# -- scans ---------------------------------------------------------------------

@dataclass(frozen=True)
class ScanConfig:
    """One Monte Carlo scan.

    ``source`` is a :class:`ClassSpec`, ``"haar"`` or ``"rho1"`` (random
    ``a`` uniform in ``a_range``, ``x`` uniform in ``x_range``).  ``focus``
    is a qubit index or ``"all"``.  ``screen`` holds cheaper roof options,
    cheapest first (a single :class:`RoofOptions` is accepted too); each
    residual goes through them in turn and stops at the first tier whose
    value reaches ``screen_margin``, falling back to ``options``.  Screened
    values are still valid lower bounds.
    """

    source: object = "haar"
    n_samples: int = 10_000
    master_seed: int = 0
    variant: VariantSpec = NATURAL
    focus: object = 1
    options: RoofOptions = RoofOptions()
    screen: tuple = (COARSE_OPTIONS, FAST_OPTIONS)
    screen_margin: float = 1e-4
    out_dir: str = None
    n_workers: int = 1
    registry: Mapping = None
    a_range: tuple = (0.0, 2.0)
    x_range: tuple = (-3.0, 3.0)

    def __post_init__(self):
        if not isinstance(self.n_samples, (int, np.integer)) or self.n_samples < 1:
            raise ValueError("n_samples must be a positive integer")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ValueError("master_seed must fit in 64 bits")
        if self.focus != "all" and self.focus not in (1, 2, 3, 4):
            raise ValueError("focus must be 1..4 or 'all'")
        if not (isinstance(self.source, ClassSpec) or self.source in ("haar", "rho1")):
            raise ValueError(f"unknown scan source {self.source!r}")
        if self.n_workers < 1:
            raise ValueError("n_workers must be >= 1")

    @property
    def foci(self) -> list:
        return [1, 2, 3, 4] if self.focus == "all" else [int(self.focus)]


@dataclass
class ScanSummary:
    count: int
    min_residual: float
    violations: int
    worst_index: int
    worst_amplitudes: list
    records_path: str = None

    @property
    def violation_fraction(self) -> float:
        return self.violations / self.count

    def to_dict(self) -> dict:
        return {"schema": 1, "count": self.count, "min_residual": self.min_residual,
                "violations": self.violations, "violation_fraction": self.violation_fraction,
                "worst_index": self.worst_index, "worst_amplitudes": self.worst_amplitudes}


def draw_sample(cfg: ScanConfig, index: int):
    """The state and its parameters for sample ``index`` (reproducible)."""
    rng = stream(cfg.master_seed, index)
    if cfg.source == "haar":
        return haar_ket(rng), {}
    if cfg.source == "rho1":
        a = rng.uniform(*cfg.a_range)
        x = rng.uniform(*cfg.x_range)
        return family_rho1(a, x), {"a": a, "x": x}
    k, params = random_class_state(cfg.source, rng, cfg.registry, return_params=True)
    return k, {p: _cplx(v) for p, v in params.items()}


def _screens(cfg: ScanConfig) -> tuple:
    if cfg.screen is None:
        return ()
    return (cfg.screen,) if isinstance(cfg.screen, RoofOptions) else tuple(cfg.screen)


def _state_residual(k: Ket, focus: int, cfg: ScanConfig):
    screens = _screens(cfg)
    for opts in screens:
        rep = residual(k, focus, cfg.variant, opts)
        if rep.exact or rep.residual >= cfg.screen_margin:
            return rep.residual, rep.exact, False
    rep = residual(k, focus, cfg.variant, cfg.options)
    return rep.residual, rep.exact, bool(screens)


def _evaluate(cfg: ScanConfig, index: int) -> dict:
    k, params = draw_sample(cfg, index)
    out = [_state_residual(k, f, cfg) for f in cfg.foci]
    res = [o[0] for o in out]
    rec = {"schema": 1, "index": index, "params": params}
    if cfg.focus == "all":
        rec.update(focus="all", residual=res, exact=[o[1] for o in out],
                   refined=[o[2] for o in out])
    else:
        rec.update(focus=cfg.foci[0], residual=res[0], exact=out[0][1], refined=out[0][2])
    if min(res) < -HOLDS_TOL:
        rec["amplitudes"] = [_cplx(z) for z in k.amplitudes]
    return rec


def _evaluate_chunk(args):
    cfg, indices = args
    return [_evaluate(cfg, i) for i in indices]


def _records(cfg: ScanConfig) -> Iterable[dict]:
    idx = list(range(cfg.n_samples))
    if cfg.n_workers == 1:
        for i in idx:
            yield _evaluate(cfg, i)
        return
    size = max(1, min(256, len(idx) // (4 * cfg.n_workers) or 1))
    chunks = [(cfg, idx[i:i + size]) for i in range(0, len(idx), size)]
    with ProcessPoolExecutor(cfg.n_workers) as pool:
        # map preserves submission order, so records come back in index order
        for batch in pool.map(_evaluate_chunk, chunks):
            yield from batch


def run_scan(cfg: ScanConfig, progress: Callable = None) -> ScanSummary:
    """Evaluate ``cfg.n_samples`` states; write ``records.jsonl`` and ``summary.json``.

    Output is identical for any ``n_workers``: every sample draws from its
    own stream and records are written in index order.
    """
    out = None
    if cfg.out_dir is not None:
        Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)
        out = open(Path(cfg.out_dir) / "records.jsonl", "w")
    count = viol = 0
    worst, worst_idx, worst_amp = math.inf, -1, None
    try:
        for rec in _records(cfg):
            r = rec["residual"]
            rmin = min(r) if isinstance(r, list) else r
            count += 1
            if rmin < -HOLDS_TOL:
                viol += 1
            if rmin < worst:
                worst, worst_idx = rmin, rec["index"]
                worst_amp = rec.get("amplitudes")
            if out is not None:
                out.write(json.dumps(rec) + "\n")
            if progress is not None:
                progress(count)
    finally:
        if out is not None:
            out.close()
    if worst_amp is None:
        k, _ = draw_sample(cfg, worst_idx)
        worst_amp = [_cplx(z) for z in k.amplitudes]
    summary = ScanSummary(count, worst, viol, worst_idx, worst_amp,
                          None if out is None else str(Path(cfg.out_dir) / "records.jsonl"))
    if cfg.out_dir is not None:
        (Path(cfg.out_dir) / "summary.json").write_text(json.dumps(summary.to_dict(), indent=1) + "\n")
    return summary


def read_residuals(path) -> list:
    """All residual values of a JSONL record file (``focus = all`` records flattened)."""
    vals = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                r = json.loads(line)["residual"]
                vals.extend(r if isinstance(r, list) else [r])
    return vals


# -- histograms -------------------------------------------------------------------

def default_edges(bins: int = 60, lo: float = -0.12, hi: float = 1.0) -> np.ndarray:
    return np.linspace(lo, hi, bins + 1)


@dataclass(frozen=True, eq=False)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    total: int

    def rows(self):
        for lo, hi, c in zip(self.edges[:-1], self.edges[1:], self.counts):
            yield float(lo), float(hi), int(c), math.log10(int(c) + 1)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["bin_low", "bin_high", "count", "log10_count_plus_1"])
            for lo, hi, c, lg in self.rows():
                w.writerow([repr(lo), repr(hi), c, repr(lg)])


def histogram(values: Iterable[float], edges: Sequence[float] = None) -> Histogram:
    """Bin ``values``; the last bin is closed on the right.

    Values outside the edges go to an underflow bin ``[-inf, edges[0])`` or
    an overflow bin ``(edges[-1], inf]``, added only when populated.
    """
    edges = default_edges() if edges is None else np.asarray(edges, dtype=float)
    if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("edges must be strictly increasing with at least two entries")
    v = np.fromiter(values, dtype=float)
    counts, _ = np.histogram(v, bins=edges)
    under = int(np.sum(v < edges[0]))
    over = int(np.sum(v > edges[-1]))
    if under:
        edges, counts = np.concatenate([[-np.inf], edges]), np.concatenate([[under], counts])
    if over:
        edges, counts = np.concatenate([edges, [np.inf]]), np.concatenate([counts, [over]])
    return Histogram(edges, counts.astype(int), int(v.size))


# -- sweeps ---------------------------------------------------------------------------

def axis_values(lo: float, hi: float, step: float) -> np.ndarray:
    """Inclusive grid ``lo, lo+step, ..., hi`` (rounded to suppress drift)."""
    if step <= 0 or hi < lo:
        raise ValueError("axis needs step > 0 and max >= min")
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    digits = max(0, -int(math.floor(math.log10(step))) + 6)
    return np.round(lo + step * np.arange(n), digits)


def _family(name: str) -> Callable:
    if name == "rho1":
        return family_rho1
    if name == "rho2":
        return lambda a, x: family_rho2(x)
    raise ValueError(f"unknown family {name!r}; choose from {FAMILIES}")


@dataclass(frozen=True, eq=False)
class SweepGrid:
    family: str
    axes: dict       # name -> values
    values: np.ndarray
    exact: np.ndarray
    variant: VariantSpec

    def argmin(self) -> dict:
        i = np.unravel_index(np.argmin(self.values), self.values.shape)
        return {n: float(self.axes[n][j]) for n, j in zip(self.axes, i)}

    def write_csv(self, path) -> None:
        a_vals, x_vals = self.axes["a"], self.axes["x"]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["a", "x", "residual", "exact"])
            for i, a in enumerate(a_vals):
                for j, x in enumerate(x_vals):
                    w.writerow([repr(float(a)), repr(float(x)), repr(float(self.values[i, j])),
                                str(bool(self.exact[i, j])).lower()])


#: CLI sweep axes when none are given; both contain the minimum at (a0, 0).
DEFAULT_AXES = {
    "rho1": {"a": (0.0, 1.2, 0.02), "x": (-2.0, 2.0, 0.05)},
    "rho2": {"x": (-10.0, 10.0, 0.05)},
}


def sweep_grid(family: str, axes: Mapping[str, Sequence[float]], variant: VariantSpec = NATURAL,
               focus: int = 1, options: RoofOptions = RoofOptions()) -> SweepGrid:
    """Residual on the product grid of ``axes`` (keys ``a`` and ``x``).

    For ``rho2`` the ``a`` axis is fixed to ``a0``.
    """
    fam = _family(family)
    unknown = set(axes) - {"a", "x"}
    if unknown:
        raise ValueError(f"unknown axes {sorted(unknown)}")
    a_vals = np.array([A0]) if family == "rho2" else np.asarray(axes.get("a", [A0]), dtype=float)
    x_vals = np.asarray(axes.get("x", [0.0]), dtype=float)
    vals = np.empty((len(a_vals), len(x_vals)))
    exact = np.empty_like(vals, dtype=bool)
    for i, a in enumerate(a_vals):
        for j, x in enumerate(x_vals):
            rep = residual(fam(a, x), focus, variant, options)
            vals[i, j], exact[i, j] = rep.residual, rep.exact
    return SweepGrid(family, {"a": a_vals, "x": x_vals}, vals, exact, variant)


# -- minimization -------------------------------------------------------------------

def minimize_residual(family: str = "rho1", variant: VariantSpec = NATURAL,
                      start: Sequence[float] = (0.6, 0.1), freeze_x: bool = False,
                      focus: int = 1, tol: float = 1e-8, maxiter: int = 5000,
                      options: RoofOptions = RoofOptions()):
    """Nelder-Mead minimum of the residual over ``(a, x)`` of ``rho1``.

    Returns ``(params, value)``.  With ``freeze_x`` only ``a`` moves.
    ``a`` enters through ``|a|`` so the simplex may cross zero freely.
    """
    if family != "rho1":
        raise ValueError("minimize_residual supports family 'rho1'")
    a0, x0 = float(start[0]), float(start[1])
    if a0 < 0:
        raise ValueError("start a must be >= 0")

    def f(p):
        a, x = (p[0], x0) if freeze_x else p
        return residual(family_rho1(abs(a), x), focus, variant, options).residual

    init = [a0] if freeze_x else [a0, x0]
    res = minimize(f, init, method="Nelder-Mead",
                   options={"xatol": tol, "fatol": tol, "maxiter": maxiter, "maxfev": 4 * maxiter})
    if not res.success:
        raise NoConvergence(f"Nelder-Mead stopped: {res.message}")
    a = abs(float(res.x[0]))
    x = x0 if freeze_x else float(res.x[1])
    return {"a": a, "x": x}, float(res.fun)


# -- self test ------------------------------------------------------------------------

@dataclass
class SelftestReport:
    results: list = field(default_factory=list)  # (name, passed, detail)

    @property
    def ok(self) -> bool:
        return all(p for _, p, _ in self.results)

    def text(self) -> str:
        return "\n".join(f"{'PASS' if p else 'FAIL'}  {n}: {d}" for n, p, d in self.results)


def _suite(report: SelftestReport, name: str, fn: Callable) -> None:
    try:
        ok, detail = fn()
    except Exception as exc:  # failures are report content
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    report.results.append((name, bool(ok), detail))


def selftest(three_tangle: Callable = three_tangle_pure, roof_m: int = None,
             n: int = 20, seed: int = 1234) -> SelftestReport:
    """Run reduced-size invariant suites.

    ``three_tangle`` and ``roof_m`` exist for mutation testing: a wrong
    three-tangle must fail the identity suite, a too-small ensemble the
    upper-bound suite.
    """
    rng = np.random.default_rng(seed)
    rep = SelftestReport()

    def cg(*shape):
        return rng.normal(size=shape) + 1j * rng.normal(size=shape)

    def qstate_suite():
        err = 0.0
        for _ in range(n):
            k = ket_from_amplitudes(cg(16))
            keep = list(rng.permutation([1, 2, 3, 4])[: rng.integers(1, 4)])
            err = max(err, np.abs(reduced(k, keep) - partial_trace(density(k), keep).matrix).max())
            h = cg(4, 4)
            h = h + h.conj().T
            err = max(err, np.abs(jacobi_eigh(h)[0] - np.linalg.eigvalsh(h)).max())
        return err < 1e-10, f"max deviation {err:.2e}"

    def identity_suite():
        err = 0.0
        for _ in range(5 * n):
            k = ket_from_amplitudes(cg(8))
            lhs = one_tangle(k, 1)
            rhs = two_tangle(k, 1, 2) + two_tangle(k, 1, 3) + three_tangle(k)
            err = max(err, abs(lhs - rhs))
        return err < 1e-9, f"max |tau1 - tau12 - tau13 - tau123| = {err:.2e}"

    def ax_suite():
        # float64 roundoff in the determinant grows like |x|^2 eps, so stay at |x| <= 10
        err = max(abs(np.linalg.det(slocc_ax(x)) - 1) for x in rng.uniform(-10, 10, n))
        return err < 1e-12, f"max |det - 1| = {err:.2e}"

    def g4_suite():
        v = generator_g4(0, 0).amplitudes * 2 / 1j
        ok = np.allclose(v[[1, 2, 7, 11]], [-1, -1, 1, 1]) and np.allclose(
            np.delete(v, [1, 2, 7, 11]), 0)
        return ok, "sign pattern (-,-,+,+) on |0001>,|0010>,|0111>,|1011>"

    def upper_bound_suite():
        opts = RoofOptions() if roof_m is None else RoofOptions(m=roof_m)
        err = 0.0
        for _ in range(max(2, n // 5)):
            k = family_rho1(rng.uniform(0, 1.5), rng.uniform(-2, 2))
            keep = [[1, 2, 3], [1, 2, 4], [1, 3, 4], [2, 3, 4]][rng.integers(4)]
            r = reduced(k, keep)
            ex = cr.roof_exact_one_root(r).value
            ub = cr.roof_upper_bound(r, 2.0, opts.m, opts).value
            err = max(err, abs(ub - ex))
        return err < 1e-6, f"max |upper bound - exact| = {err:.2e}"

    def saturation_suite():
        err = abs(residual(ghz4()).residual - 1)
        for _ in range(max(2, n // 5)):
            k = generalized_w(*cg(4))
            for v in (NATURAL, VariantSpec("mu", 3.0), VariantSpec("q", 4.0)):
                err = max(err, abs(residual(k, int(rng.integers(1, 5)), v).residual))
        return err < 1e-8, f"max deviation {err:.2e}"

    def lu_suite():
        err = 0.0
        k = random_class_state(ClassSpec("g2", "a_eq_c"), rng)
        u = LocalOp(tuple(random_unitary(rng) for _ in range(4)))
        ku = apply_local(u, k)
        for v in (NATURAL, VariantSpec("mu", 3.0)):
            err = max(err, abs(residual(k, 1, v).residual - residual(ku, 1, v).residual))
        return err < 1e-8, f"max deviation {err:.2e}"

    def ckw_suite():
        worst = min(pairwise_residual(ket_from_amplitudes(cg(16)), int(rng.integers(1, 5)))
                    for _ in range(5 * n))
        return worst >= -HOLDS_TOL, f"min pairwise residual {worst:.3e}"

    for name, fn in [("qstate", qstate_suite), ("three-tangle identity", identity_suite),
                     ("det A_x", ax_suite), ("G4 signs", g4_suite),
                     ("upper bound vs exact", upper_bound_suite), ("pairwise floor", ckw_suite),
                     ("saturation", saturation_suite), ("local-unitary invariance", lu_suite)]:
        _suite(rep, name, fn)
    return rep
