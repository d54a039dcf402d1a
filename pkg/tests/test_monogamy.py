import json

import numpy as np
import pytest

from conftest import cgauss, random_ket
from strongmono.convex_roof import FAST_OPTIONS
from strongmono.errors import BadIndex, NotFound
from strongmono.families import (A0, ClassSpec, family_rho1, family_rho2, generalized_w, ghz4,
                                 random_class_state, random_unitary, stream, w4)
from strongmono.monogamy import (NATURAL, VariantSpec, pairwise_residual, residual,
                                 residual_all_foci, threshold_scan)
from strongmono.qstate import LocalOp, apply_local, ket_from_amplitudes

MU3 = VariantSpec("mu", 3.0)
Q4 = VariantSpec("q", 4.0)


def bell_bell():
    b = np.array([1, 0, 0, 1]) / np.sqrt(2)
    return ket_from_amplitudes(np.kron(b, b))


def test_variant_validation():
    assert VariantSpec("natural", 7).exponent == 2.0
    with pytest.raises(ValueError):
        VariantSpec("mu", 0.5)
    with pytest.raises(ValueError):
        VariantSpec("q", 1.9)
    with pytest.raises(ValueError):
        VariantSpec("tau")


def test_ghz_and_w():
    rep = residual(ghz4())
    assert rep.residual == pytest.approx(1, abs=1e-12)
    assert rep.one_tangle == pytest.approx(1, abs=1e-12)
    assert all(v == 0 for v in rep.two_tangles.values())
    assert all(v.value < 1e-12 for v in rep.three_tangles.values())
    for v in (NATURAL, MU3, Q4):
        assert abs(residual(w4(), 1, v).residual) < 1e-8


def test_minimum_violation_member():
    rep = residual(family_rho1(A0, 0.0))
    assert rep.exact and not rep.is_lower_bound
    assert rep.residual == pytest.approx(-0.076, abs=2e-3)
    parts = rep.one_tangle - sum(rep.two_tangles.values()) - sum(rep.terms.values())
    assert abs(parts - rep.residual) < 1e-12


def test_report_layout_and_json():
    rep = residual(family_rho1(0.4, 0.3), 2)
    assert set(rep.two_tangles) == {(2, 1), (2, 3), (2, 4)}
    assert set(rep.three_tangles) == {(1, 2, 3), (1, 2, 4), (2, 3, 4)}
    doc = json.loads(rep.to_json())
    assert doc["schema"] == 1 and doc["focus"] == 2
    assert set(doc["three_tangles"]["1|2|3"]) == {"value", "exact", "power", "term"}
    assert doc["is_lower_bound"] is False


def test_bound_direction_flag():
    rep = residual(family_rho1(0.4, 0.3), 1, Q4)
    assert rep.is_lower_bound
    assert rep.is_lower_bound == any(not v.exact for v in rep.three_tangles.values())


def test_variant_identity(rng):
    for _ in range(3):
        k = random_ket(rng)
        nat = residual(k, 1, NATURAL, FAST_OPTIONS).residual
        assert residual(k, 1, VariantSpec("mu", 2.0), FAST_OPTIONS).residual == pytest.approx(nat, abs=1e-9)
        assert residual(k, 1, VariantSpec("q", 2.0), FAST_OPTIONS).residual == pytest.approx(nat, abs=1e-9)


def test_mu_ordering_and_pairwise_floor(rng):
    for i in range(8):
        k = random_class_state(ClassSpec("g2", "a_eq_c"), stream(2, i))
        nat = residual(k).residual
        assert residual(k, 1, MU3).residual >= nat - 1e-9
        assert pairwise_residual(k) >= nat - 1e-12
    assert min(pairwise_residual(random_ket(rng), int(rng.integers(1, 5))) for _ in range(300)) >= -1e-9


def test_generalized_w_saturates(rng):
    for _ in range(5):
        k = generalized_w(*cgauss(rng, 4))
        for v in (NATURAL, MU3, Q4):
            assert abs(residual(k, int(rng.integers(1, 5)), v).residual) < 1e-8


def test_all_foci():
    reps = residual_all_foci(ghz4())
    assert [r.focus for r in reps] == [1, 2, 3, 4]
    assert all(r.residual == pytest.approx(1, abs=1e-12) for r in reps)
    for r in residual_all_foci(bell_bell()):
        partner = {1: 2, 2: 1, 3: 4, 4: 3}[r.focus]
        assert r.one_tangle == pytest.approx(1, abs=1e-12)
        assert r.two_tangles[(r.focus, partner)] == pytest.approx(1, abs=1e-12)
        assert abs(r.residual) < 1e-12
    vals = [r.residual for r in residual_all_foci(family_rho1(A0, 0.4))]
    assert max(vals) - min(vals) > 1e-3


def test_local_unitary_invariance(rng):
    for i in range(3):
        k = random_class_state(ClassSpec("g2", "a_eq_c"), stream(8, i))
        ku = apply_local(LocalOp(tuple(random_unitary(rng) for _ in range(4))), k)
        a, b = residual(k, 1, MU3), residual(ku, 1, MU3)
        assert a.residual == pytest.approx(b.residual, abs=1e-8)
        assert a.one_tangle == pytest.approx(b.one_tangle, abs=1e-8)
        for key in a.three_tangles:
            assert a.three_tangles[key].value == pytest.approx(b.three_tangles[key].value, abs=1e-8)


def test_focus_validation():
    with pytest.raises(BadIndex):
        residual(ghz4(), 5)
    with pytest.raises(ValueError):
        residual(ket_from_amplitudes(np.ones(8)))


def test_threshold_scan_mu_small_grid():
    xs = np.round(np.arange(-2, 2.001, 0.1), 2)
    th = threshold_scan(family_rho2, "mu", np.round(np.arange(1, 4.001, 0.01), 2), xs)
    assert 2.0 <= th <= 2.2
    # a grid starting at 2 with a nonnegative family returns its first entry
    assert threshold_scan(lambda x: generalized_w(1, x, 1, 2), "mu", [2.0, 2.5, 3.0], [0.5, 1.0]) == 2.0
    with pytest.raises(NotFound):
        threshold_scan(family_rho2, "mu", [1.0, 1.5], xs)
    with pytest.raises(ValueError):
        threshold_scan(family_rho2, "mu", [3.0, 2.0], xs)


def test_rho2_eventually_decays():
    for x in (-100.0, 100.0):
        rep = residual(family_rho2(x))
        assert rep.exact and abs(rep.residual) < 0.01
