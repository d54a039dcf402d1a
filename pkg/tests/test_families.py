import json
from fractions import Fraction

import numpy as np
import pytest

from conftest import cgauss
from strongmono.convex_roof import is_one_root, range_basis, tangle_zeros
from strongmono.errors import ParseError, ZeroState
from strongmono.families import (A0, BUILTIN_GENERATORS, ClassSpec, family_rho1, family_rho2,
                                 generalized_w, generator_g2, generator_g4, haar_ket,
                                 load_generator_definitions, random_class_state, random_sl2c,
                                 slocc_ax, stream)
from strongmono.qstate import reduced
from strongmono.tangles import one_tangle, two_tangle

S3 = 1 / np.sqrt(3)
TRIPLES = ([1, 2, 3], [1, 2, 4], [1, 3, 4], [2, 3, 4])


def basis(*bits, coeffs=None):
    v = np.zeros(16, dtype=complex)
    for i, b in enumerate(bits):
        v[int(b, 2)] = 1 if coeffs is None else coeffs[i]
    return v / np.linalg.norm(v)


def test_g2_substitutions():
    assert np.allclose(generator_g2(1, 1, 0).amplitudes, basis("0000", "1111", "0110"))
    assert np.allclose(generator_g2(1, -1, 0).amplitudes, basis("0011", "1100", "0110"))
    raw = generator_g2(A0, 1j * A0, 1j * A0).amplitudes
    assert raw[0b0101] == pytest.approx(raw[0b1010])
    assert raw[0b0101] / raw[0b0110] == pytest.approx(1j * A0)


def test_g4_corrected_signs():
    k = generator_g4(0, 0).amplitudes
    assert np.allclose(k, basis("0001", "0010", "0111", "1011", coeffs=[-1j, -1j, 1j, 1j]))
    raw = BUILTIN_GENERATORS["g4"].amplitudes(a=1, b=1)
    assert raw[0b0101] == raw[0b1010] == 1
    assert raw[0b0110] == raw[0b1001] == 0
    for z in (0b0100, 0b1000, 0b1101, 0b1110):
        assert BUILTIN_GENERATORS["g4"].amplitudes(a=0.3, b=-2j)[z] == 0


def test_zero_generator():
    with pytest.raises(ZeroState):
        generalized_w(0, 0, 0, 0)


def test_ax_determinant_float(rng):
    assert abs(np.linalg.det(slocc_ax(0.0)) - 1) < 1e-14
    assert abs(np.linalg.det(slocc_ax(1.0)) - 1) < 1e-14
    assert slocc_ax(0.0)[0, 0] == pytest.approx((1 + 1j) / 3)
    for x in rng.uniform(-10, 10, 100):
        assert abs(np.linalg.det(slocc_ax(x)) - 1) < 1e-12


def _cplx_frac(re, im=0):
    return (Fraction(re), Fraction(im))


def _mul(p, q):
    return (p[0] * q[0] - p[1] * q[1], p[0] * q[1] + p[1] * q[0])


def test_ax_determinant_exact(rng):
    # exact rational arithmetic: det(A_x) = 1 identically, for any float x
    third = Fraction(1, 3)
    for xf in rng.uniform(-1e3, 1e3, 100):
        x = Fraction(float(xf))
        a = _mul((Fraction(1), Fraction(1)), (x + third, Fraction(0)))
        b = (third + x, Fraction(-1))
        c = _mul((Fraction(0), Fraction(1)), (x - Fraction(2, 3), Fraction(0)))
        d = _mul((Fraction(1, 6), Fraction(1, 6)), (3 * x - 2, Fraction(-3)))
        det = tuple(u - v for u, v in zip(_mul(a, d), _mul(b, c)))
        assert det == (1, 0)


def test_family_members_are_one_root(rng):
    for _ in range(25):
        for k in (family_rho1(rng.uniform(0, 2), rng.uniform(-5, 5)), family_rho2(rng.uniform(-20, 20))):
            assert abs(np.linalg.norm(k.amplitudes) - 1) < 1e-12
            for t in TRIPLES:
                rb = range_basis(reduced(k, t))
                assert rb.rank == 1 or tangle_zeros(rb.quartic, scale=rb.scale).n_distinct == 1


def test_family_rho1_domain():
    with pytest.raises(ValueError):
        family_rho1(-0.1, 0)


def test_generalized_w():
    assert np.allclose(generalized_w(1, 1, 1, 1).amplitudes, basis("1000", "0100", "0010", "0001"))
    prod = generalized_w(1, 0, 0, 0)
    assert np.allclose(prod.amplitudes, basis("1000"))
    assert one_tangle(prod, 1) == 0 and two_tangle(prod, 1, 2) == 0


def test_random_sl2c(rng):
    m = random_sl2c(stream(42, 0))
    assert abs(np.linalg.det(m) - 1) < 1e-12
    assert np.array_equal(m, random_sl2c(stream(42, 0)))
    r = stream(7, 1)
    for _ in range(10_000):
        random_sl2c(r)


def test_streams_independent_and_reproducible():
    a = stream(1, 0).standard_normal(4)
    assert np.array_equal(a, stream(1, 0).standard_normal(4))
    assert not np.array_equal(a, stream(1, 1).standard_normal(4))
    assert not np.array_equal(a, stream(2, 0).standard_normal(4))


def test_class_state_subclass_constraints():
    spec = ClassSpec("g2", "a_eq_c", slocc="none")
    k, p = random_class_state(spec, stream(3, 0), return_params=True)
    raw = BUILTIN_GENERATORS["g2"].amplitudes(**p)
    assert p["c"] == p["a"]
    assert np.allclose(k.amplitudes, raw / np.linalg.norm(raw))
    _, p = random_class_state(ClassSpec("g2", "b_eq_c_eq_ia"), stream(3, 1), return_params=True)
    assert p["b"] == p["c"] == 1j * p["a"]


def test_class_state_determinism_and_validation():
    spec = ClassSpec("g4")
    a = [random_class_state(spec, stream(5, i)).amplitudes for i in range(3)]
    b = [random_class_state(spec, stream(5, i)).amplitudes for i in range(3)]
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    with pytest.raises(ValueError):
        ClassSpec("g2", "c_eq_d")
    with pytest.raises(KeyError):
        random_class_state(ClassSpec("g9"), stream(0, 0))


def test_subclass_states_are_one_root():
    spec = ClassSpec("g2", "a_eq_c")
    for i in range(10):
        k = random_class_state(spec, stream(11, i))
        assert all(is_one_root(reduced(k, t)) for t in TRIPLES)


def test_haar_ket_normalized():
    k = haar_ket(stream(0, 0))
    assert k.n_qubits == 4 and abs(np.linalg.norm(k.amplitudes) - 1) < 1e-14


def _g2_file(path):
    half = [0.5, 0.0]
    doc = {"generators": {"mine": {"terms": [
        {"ket": "0000", "coeff": {"a": half, "b": half}},
        {"ket": "1111", "coeff": {"a": half, "b": half}},
        {"ket": "0011", "coeff": {"a": half, "b": [-0.5, 0.0]}},
        {"ket": "1100", "coeff": {"a": half, "b": [-0.5, 0.0]}},
        {"ket": "0101", "coeff": {"c": [1, 0]}},
        {"ket": "1010", "coeff": {"c": [1, 0]}},
        {"ket": "0110", "coeff": {"const": [1, 0]}},
    ]}}}
    path.write_text(json.dumps(doc, indent=1))


def test_definition_file_round_trip(tmp_path):
    path = tmp_path / "defs.json"
    _g2_file(path)
    reg = load_generator_definitions(path)
    a, b, c = 0.3 + 0.1j, -1.2j, 0.7
    assert reg["mine"](a=a, b=b, c=c).amplitudes.tobytes() == generator_g2(a, b, c).amplitudes.tobytes()
    spec = ClassSpec("def:mine", "a_eq_c")
    x = random_class_state(spec, stream(9, 4), reg).amplitudes
    y = random_class_state(ClassSpec("g2", "a_eq_c"), stream(9, 4)).amplitudes
    assert x.tobytes() == y.tobytes()


def test_definition_file_errors(tmp_path):
    empty = tmp_path / "empty.json"
    empty.write_text("")
    assert load_generator_definitions(empty) == {}
    assert random_class_state(ClassSpec("g2"), stream(0, 0), {}) is not None

    bad_json = tmp_path / "bad.json"
    bad_json.write_text('{"generators": {\n  "x": [}\n}')
    with pytest.raises(ParseError, match="line 2"):
        load_generator_definitions(bad_json)

    bad_amp = tmp_path / "amp.json"
    bad_amp.write_text(json.dumps({"generators": {"broken": {"terms": [
        {"ket": "0000", "coeff": {"a": "one"}}]}}}))
    with pytest.raises(ParseError, match="broken"):
        load_generator_definitions(bad_amp)

    bad_ket = tmp_path / "ket.json"
    bad_ket.write_text(json.dumps({"generators": {"k": {"terms": [
        {"ket": "0000", "coeff": {"a": [1, 0]}}, {"ket": "012", "coeff": {}}]}}}))
    with pytest.raises(ParseError, match="bad ket"):
        load_generator_definitions(bad_ket)
