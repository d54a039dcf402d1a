"""Generator states, the A_x operator, the violating families and random sampling.

Generators are stored as amplitude templates: every amplitude is an affine
combination ``w0 + wa a + wb b + wc c + wd d``.  The built-in ``g2`` and
``g4`` go through the same evaluation path as user-supplied definition files.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import ParseError, Singular, ZeroState
from .qstate import Ket, LocalOp, apply_local, ket_from_amplitudes

__all__ = [
    "A0",
    "GeneratorTemplate",
    "ClassSpec",
    "SUBCLASSES",
    "BUILTIN_GENERATORS",
    "generator_g2",
    "generator_g4",
    "slocc_ax",
    "family_rho1",
    "family_rho2",
    "generalized_w",
    "ghz4",
    "w4",
    "stream",
    "random_sl2c",
    "random_unitary",
    "haar_ket",
    "random_class_state",
    "load_generator_definitions",
]

#: The parameter value ``5 / (6 sqrt 2)`` of the most violating rho1 member.
A0 = 5 / (6 * np.sqrt(2))

PARAMS = ("a", "b", "c", "d")
SUBCLASSES = ("none", "a_eq_c", "b_eq_c", "b_eq_c_eq_ia")


@dataclass(frozen=True)
class GeneratorTemplate:
    """Amplitude template: ``terms`` maps a basis index to 5 weights (1, a, b, c, d)."""

    key: str
    terms: tuple  # ((index, (w1, wa, wb, wc, wd)), ...)
    n_qubits: int = 4

    @property
    def params(self) -> tuple:
        used = set()
        for _, w in self.terms:
            used.update(p for p, wp in zip(PARAMS, w[1:]) if wp != 0)
        return tuple(p for p in PARAMS if p in used)

    def amplitudes(self, a=0, b=0, c=0, d=0) -> np.ndarray:
        vals = (1.0, a, b, c, d)
        v = np.zeros(2 ** self.n_qubits, dtype=complex)
        for idx, w in self.terms:
            amp = 0j
            for wk, pk in zip(w, vals):
                amp = amp + wk * pk
            v[idx] = v[idx] + amp
        return v

    def __call__(self, a=0, b=0, c=0, d=0) -> Ket:
        v = self.amplitudes(a, b, c, d)
        if not np.linalg.norm(v) > 1e-12:
            raise ZeroState(f"generator {self.key} vanishes at a={a}, b={b}, c={c}, d={d}")
        return ket_from_amplitudes(v)


def _template(key: str, spec: Mapping[str, Mapping[str, complex]]) -> GeneratorTemplate:
    terms = []
    for bits, coeff in spec.items():
        w = tuple(complex(coeff.get(p, 0)) for p in ("const",) + PARAMS)
        terms.append((int(bits, 2), w))
    return GeneratorTemplate(key, tuple(terms), len(next(iter(spec))))


_S = 1j / np.sqrt(2)
BUILTIN_GENERATORS = {
    "g2": _template("g2", {
        "0000": {"a": 0.5, "b": 0.5}, "1111": {"a": 0.5, "b": 0.5},
        "0011": {"a": 0.5, "b": -0.5}, "1100": {"a": 0.5, "b": -0.5},
        "0101": {"c": 1}, "1010": {"c": 1},
        "0110": {"const": 1},
    }),
    # corrected form: note the two minus signs on |0001> and |0010>
    "g4": _template("g4", {
        "0000": {"a": 1}, "1111": {"a": 1},
        "0101": {"a": 0.5, "b": 0.5}, "1010": {"a": 0.5, "b": 0.5},
        "0110": {"a": 0.5, "b": -0.5}, "1001": {"a": 0.5, "b": -0.5},
        "0001": {"const": -_S}, "0010": {"const": -_S},
        "0111": {"const": _S}, "1011": {"const": _S},
    }),
}


def generator_g2(a, b, c) -> Ket:
    """Class-2 generator ``|G2_abc>``, normalized."""
    return BUILTIN_GENERATORS["g2"](a=a, b=b, c=c)


def generator_g4(a, b) -> Ket:
    return BUILTIN_GENERATORS["g4"](a=a, b=b)


def slocc_ax(x: float) -> np.ndarray:
    """Determinant-one operator A_x (the determinant is identically 1 in x)."""
    return np.array([
        [(1 + 1j) * (x + 1 / 3), (1 / 3 - 1j) + x],
        [1j * (x - 2 / 3), (1 + 1j) / 6 * (3 * x - 2 - 3j)],
    ])


def _ax_on(qubit: int, x: float) -> LocalOp:
    return LocalOp.on(4, {qubit: slocc_ax(x)})


def family_rho1(a: float, x: float) -> Ket:
    """``(A_x x 1 x 1 x 1)|G2_{a, ia, ia}>``, normalized."""
    if a < 0:
        raise ValueError("family_rho1 needs a >= 0")
    return apply_local(_ax_on(1, x), generator_g2(a, 1j * a, 1j * a))


def family_rho2(x: float) -> Ket:
    """``(1 x A_x x 1 x 1)|G2_{a0, i a0, i a0}>`` with ``a0 = 5/(6 sqrt 2)``."""
    return apply_local(_ax_on(2, x), generator_g2(A0, 1j * A0, 1j * A0))


def generalized_w(c1, c2, c3, c4) -> Ket:
    v = np.zeros(16, dtype=complex)
    v[[8, 4, 2, 1]] = [c1, c2, c3, c4]
    return ket_from_amplitudes(v)


def ghz4() -> Ket:
    v = np.zeros(16, dtype=complex)
    v[[0, 15]] = 1
    return ket_from_amplitudes(v)


def w4() -> Ket:
    return generalized_w(1, 1, 1, 1)


# -- random sampling ---------------------------------------------------------

def stream(master_seed: int, index: int) -> np.random.Generator:
    """Independent counter-based (Philox) stream for sample ``index``."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(ss))


def _cgauss(rng: np.random.Generator, size=None):
    return rng.standard_normal(size) + 1j * rng.standard_normal(size)


def random_sl2c(rng: np.random.Generator) -> np.ndarray:
    """Ginibre 2x2 matrix rescaled to unit determinant."""
    for _ in range(100):
        m = _cgauss(rng, (2, 2))
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if abs(det) > 1e-12:
            return m / np.sqrt(det)
    raise Singular("100 consecutive singular draws")


def random_unitary(rng: np.random.Generator) -> np.ndarray:
    """Haar-random 2x2 unitary (QR of a Ginibre matrix with phase fix)."""
    q, r = np.linalg.qr(_cgauss(rng, (2, 2)))
    d = np.diag(r)
    return q * (d / np.abs(d))


def haar_ket(rng: np.random.Generator, n_qubits: int = 4) -> Ket:
    return ket_from_amplitudes(_cgauss(rng, 2**n_qubits))


@dataclass(frozen=True)
class ClassSpec:
    """Which generator to sample and how.

    ``params`` names the distribution of a, b, c, d (only ``"gaussian"``:
    i.i.d. standard complex normal); ``slocc`` that of the local operators
    (``"ginibre"``: :func:`random_sl2c` on each qubit, or ``"none"``).
    """

    generator: str = "g2"
    subclass: str = "none"
    params: str = "gaussian"
    slocc: str = "ginibre"

    def __post_init__(self):
        if self.subclass not in SUBCLASSES:
            raise ValueError(f"unknown subclass {self.subclass!r}; choose from {SUBCLASSES}")
        if self.params != "gaussian":
            raise ValueError(f"unknown parameter distribution {self.params!r}")
        if self.slocc not in ("ginibre", "none"):
            raise ValueError(f"unknown SLOCC distribution {self.slocc!r}")

    def resolve(self, registry: Mapping[str, GeneratorTemplate] = None) -> GeneratorTemplate:
        key = self.generator[4:] if self.generator.startswith("def:") else self.generator
        reg = dict(BUILTIN_GENERATORS)
        if registry:
            reg.update(registry)
        if key not in reg:
            raise KeyError(f"unknown generator {self.generator!r}")
        return reg[key]


def _constrain(subclass: str, p: dict) -> dict:
    p = dict(p)
    if subclass == "a_eq_c":
        p["c"] = p["a"]
    elif subclass == "b_eq_c":
        p["c"] = p["b"]
    elif subclass == "b_eq_c_eq_ia":
        p["b"] = p["c"] = 1j * p["a"]
    return p


def random_class_state(spec: ClassSpec, rng: np.random.Generator,
                       registry: Mapping[str, GeneratorTemplate] = None,
                       return_params: bool = False):
    """Random state of a SLOCC class: random parameters, then random local operators."""
    tpl = spec.resolve(registry)
    for _ in range(100):
        draws = _cgauss(rng, 4)
        params = _constrain(spec.subclass, dict(zip(PARAMS, draws)))
        ops = [random_sl2c(rng) for _ in range(tpl.n_qubits)] if spec.slocc == "ginibre" else None
        try:
            k = tpl(**params)
            if ops is not None:
                k = apply_local(LocalOp(tuple(ops)), k)
        except ZeroState:
            continue
        return (k, {p: params[p] for p in tpl.params}) if return_params else k
    raise ZeroState("could not draw a nonzero state in 100 attempts")


# -- definition files ----------------------------------------------------------

def _parse_complex(val, where: str) -> complex:
    if isinstance(val, (int, float)) and not isinstance(val, bool):
        return complex(val)
    if isinstance(val, (list, tuple)) and len(val) == 2 and all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in val):
        return complex(val[0], val[1])
    raise ParseError(f"{where}: expected [re, im], got {val!r}")


def load_generator_definitions(path) -> dict:
    """Read a JSON generator definition file into a registry.

    An empty file gives an empty registry.  Format::

        {"generators": {"<key>": {"terms": [
            {"ket": "0101", "coeff": {"const": [re, im], "a": [re, im], ...}}, ...]}}}
    """
    text = Path(path).read_text()
    if not text.strip():
        return {}
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    gens = doc.get("generators") if isinstance(doc, dict) else None
    if not isinstance(gens, dict):
        raise ParseError(f"{path}: top-level object needs a 'generators' mapping")
    registry = {}
    for key, body in gens.items():
        terms_in = body.get("terms") if isinstance(body, dict) else None
        if not isinstance(terms_in, list):
            raise ParseError(f"generator {key!r}: 'terms' must be a list")
        terms, width = [], None
        for n, term in enumerate(terms_in):
            where = f"generator {key!r} term {n}"
            ket = term.get("ket") if isinstance(term, dict) else None
            if not isinstance(ket, str) or not ket or set(ket) - {"0", "1"}:
                raise ParseError(f"{where}: bad ket {ket!r}")
            if width is None:
                width = len(ket)
            elif len(ket) != width:
                raise ParseError(f"{where}: ket {ket!r} has the wrong number of qubits")
            coeff = term.get("coeff")
            if not isinstance(coeff, dict) or set(coeff) - {"const", *PARAMS}:
                raise ParseError(f"{where}: coeff must map const/a/b/c/d to [re, im]")
            w = tuple(_parse_complex(coeff.get(p, 0), f"{where} coeff {p!r}")
                      for p in ("const",) + PARAMS)
            terms.append((int(ket, 2), w))
        if width not in (2, 3, 4):
            raise ParseError(f"generator {key!r}: needs 2-4 qubit kets")
        registry[key] = GeneratorTemplate(key, tuple(terms), width)
    return registry
