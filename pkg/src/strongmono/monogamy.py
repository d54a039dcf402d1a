"""Strong-monogamy residual of four-qubit pure states in its three variants.

For a focus qubit ``f`` the residual is the one-tangle of ``f`` minus its
three two-tangles minus one three-tangle term per three-qubit marginal that
contains ``f``.  The three-tangle terms are

* ``natural``: the convex roof of ``sqrt(tau3)``, squared;
* ``mu``: that same roof raised to ``mu / 2``;
* ``q``: the roof of ``tau3 ** (1/q)``, raised to ``q``.

Exactness propagates: when any roof is only an upper bound the residual is a
lower bound on the true value (``is_lower_bound``).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Sequence

import numpy as np

from .convex_roof import RoofOptions, RoofValue, roof
from .errors import BadIndex, NotFound
from .qstate import Ket, reduced
from .tangles import one_tangle, two_tangle

__all__ = [
    "VariantSpec",
    "NATURAL",
    "ResidualReport",
    "residual",
    "residual_all_foci",
    "pairwise_residual",
    "threshold_scan",
    "HOLDS_TOL",
]

#: Residuals at or above ``-HOLDS_TOL`` count as satisfying the inequality.
HOLDS_TOL = 1e-9
KINDS = ("natural", "mu", "q")


@dataclass(frozen=True)
class VariantSpec:
    kind: str = "natural"
    exponent: float = 2.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown variant {self.kind!r}; choose from {KINDS}")
        if self.kind == "natural":
            object.__setattr__(self, "exponent", 2.0)
        elif self.kind == "mu" and not self.exponent >= 1:
            raise ValueError("mu exponent must be >= 1")
        elif self.kind == "q" and not self.exponent >= 2:
            raise ValueError("q exponent must be >= 2")
        object.__setattr__(self, "exponent", float(self.exponent))

    @property
    def roof_power(self) -> float:
        return self.exponent if self.kind == "q" else 2.0

    def term(self, rv: RoofValue) -> float:
        if self.kind == "mu":
            return rv.value ** (self.exponent / 2)
        return rv.value

    def to_dict(self) -> dict:
        return {"kind": self.kind, "exponent": self.exponent}


NATURAL = VariantSpec()


def _label(qubits) -> str:
    return "|".join(str(q) for q in qubits)


@dataclass(frozen=True, eq=False)
class ResidualReport:
    focus: int
    variant: VariantSpec
    one_tangle: float
    two_tangles: dict   # (f, j) -> value
    three_tangles: dict  # (f, j, k) sorted -> RoofValue
    terms: dict          # same keys -> processed three-tangle term
    residual: float
    is_lower_bound: bool

    @property
    def exact(self) -> bool:
        return not self.is_lower_bound

    def to_dict(self) -> dict:
        return {
            "schema": 1,
            "focus": self.focus,
            "variant": self.variant.to_dict(),
            "one_tangle": self.one_tangle,
            "two_tangles": {_label(k): v for k, v in self.two_tangles.items()},
            "three_tangles": {
                _label(k): {**rv.to_dict(), "term": self.terms[k]}
                for k, rv in self.three_tangles.items()
            },
            "residual": self.residual,
            "is_lower_bound": self.is_lower_bound,
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def _check_four(k: Ket, focus) -> int:
    if k.n_qubits != 4:
        raise ValueError("the residual is defined for four-qubit states")
    if not isinstance(focus, (int, np.integer)) or not 1 <= focus <= 4:
        raise BadIndex(f"focus {focus!r} outside 1..4")
    return int(focus)


def residual(k: Ket, focus: int = 1, variant: VariantSpec = NATURAL,
             options: RoofOptions = RoofOptions()) -> ResidualReport:
    focus = _check_four(k, focus)
    others = [q for q in range(1, 5) if q != focus]
    t1 = one_tangle(k, focus)
    t2 = {(focus, j): two_tangle(k, focus, j) for j in others}
    t3, terms = {}, {}
    for pair in combinations(others, 2):
        key = tuple(sorted((focus,) + pair))
        rv = roof(reduced(k, key), variant.roof_power, options)
        t3[key] = rv
        terms[key] = variant.term(rv)
    res = t1 - sum(t2.values()) - sum(terms.values())
    lower = any(not rv.exact for rv in t3.values())
    return ResidualReport(focus, variant, t1, t2, t3, terms, float(res), lower)


def residual_all_foci(k: Ket, variant: VariantSpec = NATURAL,
                      options: RoofOptions = RoofOptions()) -> list:
    return [residual(k, f, variant, options) for f in range(1, 5)]


def pairwise_residual(k: Ket, focus: int = 1) -> float:
    """Residual with the three-tangle terms dropped: one-tangle minus two-tangles."""
    focus = _check_four(k, focus)
    return one_tangle(k, focus) - sum(two_tangle(k, focus, j) for j in range(1, 5) if j != focus)


# -- threshold search --------------------------------------------------------

class _FamilyCache:
    """Per-x memo of the exponent-independent parts of the residual."""

    def __init__(self, family: Callable, focus: int, options: RoofOptions,
                 screen: RoofOptions = None):
        self.family, self.focus = family, focus
        self.options, self.screen = options, screen
        self.kets, self.base, self.q2 = {}, {}, {}
        self.qroofs = {}

    def ket(self, x):
        if x not in self.kets:
            self.kets[x] = self.family(x)
        return self.kets[x]

    def _triples(self, x):
        others = [q for q in range(1, 5) if q != self.focus]
        return [tuple(sorted((self.focus,) + p)) for p in combinations(others, 2)]

    def base_part(self, x):
        if x not in self.base:
            self.base[x] = pairwise_residual(self.ket(x), self.focus)
        return self.base[x]

    def mu_residual(self, x, mu):
        if x not in self.q2:
            k = self.ket(x)
            self.q2[x] = [roof(reduced(k, t), 2.0, self.options).value for t in self._triples(x)]
        return self.base_part(x) - sum(v ** (mu / 2) for v in self.q2[x])

    def q_residual(self, x, q, opts):
        key = (x, q, opts)
        if key not in self.qroofs:
            k = self.ket(x)
            self.qroofs[key] = sum(roof(reduced(k, t), q, opts).value for t in self._triples(x))
        return self.base_part(x) - self.qroofs[key]

    def holds(self, kind, e, x) -> tuple:
        """(holds, residual) at one grid point; screening pass first for ``q``."""
        if kind == "mu":
            r = self.mu_residual(x, e)
            return r >= -HOLDS_TOL, r
        if self.screen is not None:
            # a looser bound that already clears the tolerance settles the point
            r = self.q_residual(x, e, self.screen)
            if r >= -HOLDS_TOL:
                return True, r
        r = self.q_residual(x, e, self.options)
        return r >= -HOLDS_TOL, r


def threshold_scan(family: Callable, kind: str, exponents: Sequence[float],
                   xs: Sequence[float], focus: int = 1,
                   options: RoofOptions = RoofOptions(),
                   screen: RoofOptions = None) -> float:
    """Smallest grid exponent whose residual is ``>= -1e-9`` at every ``x``.

    ``family`` maps a real ``x`` to a four-qubit :class:`Ket`.  The residual
    is non-decreasing in the exponent, so the grid is bisected.  For the ``q``
    variant, ``screen`` (cheaper roof options) may be given: points where
    its lower-bound residual already clears the tolerance are not refined.
    Grid exponents below the variant's minimum (``mu >= 1``, ``q >= 2``)
    are skipped.
    """
    if kind not in ("mu", "q"):
        raise ValueError("threshold_scan needs kind 'mu' or 'q'")
    lo_ok = 1.0 if kind == "mu" else 2.0
    grid = [float(e) for e in exponents if e >= lo_ok - 1e-12]
    xs = [float(x) for x in xs]
    if not grid or not xs:
        raise ValueError("exponent and x grids must be nonempty")
    if any(b < a for a, b in zip(grid, grid[1:])) or any(b < a for a, b in zip(xs, xs[1:])):
        raise ValueError("grids must be sorted")
    cache = _FamilyCache(family, focus, options, screen if kind == "q" else None)
    order = list(xs)

    def passes(e):
        # the point that failed last is tried first, so failures exit early
        for i, x in enumerate(order):
            ok, _ = cache.holds(kind, e, x)
            if not ok:
                order.insert(0, order.pop(i))
                return False
        return True

    if not passes(grid[-1]):
        raise NotFound(f"residual still negative at the largest exponent {grid[-1]:g}")
    lo, hi = -1, len(grid) - 1  # grid[hi] passes; grid[lo] fails (lo = -1: virtual)
    if passes(grid[0]):
        return grid[0]
    lo = 0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if passes(grid[mid]):
            hi = mid
        else:
            lo = mid
    return grid[hi]
