import numpy as np
import pytest

from conftest import cgauss, random_density, random_ket
from strongmono.convex_roof import (FAST_OPTIONS, RoofOptions, eig_average, ensemble_objective,
                                    is_one_root, range_basis, roof, roof_exact_one_root,
                                    roof_upper_bound, tangle_quartic, tangle_zeros)
from strongmono.errors import IdenticallyZero, NotOneRoot, RankTooHigh
from strongmono.families import A0, family_rho1, family_rho2
from strongmono.qstate import reduced
from strongmono.tangles import tangle_bracket, three_tangle_pure

GHZ = np.zeros(8)
GHZ[[0, 7]] = 1 / np.sqrt(2)
W = np.zeros(8)
W[[1, 2, 4]] = 1 / np.sqrt(3)
# boundary of the zero-tangle region of p GHZ + (1 - p) W (known closed form)
P0 = 4 * 2 ** (1 / 3) / (3 + 4 * 2 ** (1 / 3))
TRIPLES = ([1, 2, 3], [1, 2, 4], [1, 3, 4], [2, 3, 4])


def ghz_w(p):
    return p * np.outer(GHZ, GHZ) + (1 - p) * np.outer(W, W)


def one_root_marginals(rng, n):
    out = []
    for _ in range(n):
        k = family_rho1(rng.uniform(0, 1.5), rng.uniform(-3, 3))
        out.append(reduced(k, TRIPLES[rng.integers(4)]))
    return out


def rank2(rng):
    return reduced(random_ket(rng), [1, 2, 3])


def sqrt_tau_average(rho, u):
    # independent of the quartic: build the ensemble members explicitly
    w, v = np.linalg.eigh(rho)
    vecs = v[:, -2:] * np.sqrt(np.clip(w[-2:], 0, None))
    total = 0.0
    for row in u:
        phi = vecs @ row
        nrm2 = np.vdot(phi, phi).real
        if nrm2 > 1e-300:
            total += nrm2 * np.sqrt(three_tangle_pure(phi))
    return total


def random_isometry(rng, m):
    q, _ = np.linalg.qr(cgauss(rng, m, 2))
    return q


def test_quartic_against_interpolation(rng):
    for _ in range(20):
        rb = range_basis(rank2(rng))
        ts = np.arange(5.0)
        vals = tangle_bracket(rb.v1[None, :] + ts[:, None] * rb.v2[None, :])
        coef = np.linalg.solve(np.vander(ts, 5, increasing=True), vals)
        assert np.allclose(tangle_quartic(rb), coef, atol=1e-12)


def test_range_basis_ranks(rng):
    rb = range_basis(rank2(rng))
    assert rb.rank == 2 and rb.p1 >= rb.p2 > 0
    assert abs(np.vdot(rb.v1, rb.v2)) < 1e-14
    psi = random_ket(rng, 3).amplitudes
    assert range_basis(np.outer(psi, psi.conj())).rank == 1
    with pytest.raises(RankTooHigh):
        range_basis(random_density(rng, 8, 3))


@pytest.mark.parametrize("roots,mult", [
    ([2, 2, 2, 2], (4,)),
    ([1, 2, 3, 4], (1, 1, 1, 1)),
    ([1, 1, -1, -1], (2, 2)),
    ([0.5j, 0.5j, 0.5j, 3], (3, 1)),
])
def test_tangle_zeros_multiplicities(roots, mult):
    c = np.poly(roots)[::-1] * (0.3 - 0.2j)
    cl = tangle_zeros(c)
    assert sorted(cl.multiplicities) == sorted(mult)
    for r in roots:
        assert min(abs(r - t) for t in cl.roots) < 1e-6


def test_tangle_zeros_root_at_infinity():
    # degree drop: (t - 1)^3 with an extra root at t = inf
    c = np.concatenate([np.poly([1, 1, 1])[::-1], [0]])
    cl = tangle_zeros(c)
    assert sorted(cl.multiplicities) == [1, 3]
    assert np.isinf(abs(sorted(cl.roots, key=abs)[-1]))
    cl = tangle_zeros(np.array([0, 0, 0, 0, 1.0]))
    assert cl.multiplicities == (4,) and cl.roots[0] == 0


def test_tangle_zeros_perturbed_fourfold_root(rng):
    c = np.poly([0.7 - 0.2j] * 4)[::-1]
    cl = tangle_zeros(c + 1e-13 * cgauss(rng, 5))
    assert cl.n_distinct == 1
    with pytest.raises(IdenticallyZero):
        tangle_zeros(np.zeros(5))


def test_generic_marginals_are_not_one_root(rng):
    assert not any(is_one_root(rank2(rng)) for _ in range(10))


def test_one_root_family_marginals(rng):
    for rho in one_root_marginals(rng, 20):
        rb = range_basis(rho)
        assert is_one_root(rho)
        assert tangle_zeros(rb.quartic, scale=rb.scale).multiplicities in ((4,),)


def test_exact_roof_is_decomposition_independent(rng):
    for rho in one_root_marginals(rng, 10):
        ref = np.sqrt(roof_exact_one_root(rho).value)
        for _ in range(20):
            u = random_isometry(rng, int(rng.integers(2, 7)))
            assert sqrt_tau_average(rho, u) == pytest.approx(ref, abs=1e-9)


def test_exact_roof_special_inputs(rng):
    psi = random_ket(rng, 3)
    v = roof_exact_one_root(np.outer(psi.amplitudes, psi.amplitudes.conj()))
    assert v.exact and v.value == pytest.approx(three_tangle_pure(psi), abs=1e-12)
    # GHZ-free mixture of W and |000>: tangle vanishes on the whole range
    z = np.zeros(8)
    z[0] = 1
    v = roof_exact_one_root(0.4 * np.outer(W, W) + 0.6 * np.outer(z, z))
    assert v.exact and v.value == 0
    with pytest.raises(NotOneRoot):
        roof_exact_one_root(ghz_w(0.8))


def test_exact_roof_scaling(rng):
    for rho in one_root_marginals(rng, 5):
        base = roof_exact_one_root(rho).value
        for c in (0.1, 0.5, 1.0):
            # sqrt of the roof scales linearly with the operator
            assert np.sqrt(roof_exact_one_root(c * rho).value) == pytest.approx(
                c * np.sqrt(base), abs=1e-10)


def test_upper_bound_matches_exact_on_one_root(rng):
    for rho in one_root_marginals(rng, 8):
        ub = roof_upper_bound(rho, 2.0)
        assert not ub.exact
        assert ub.value == pytest.approx(roof_exact_one_root(rho).value, abs=1e-6)


@pytest.mark.parametrize("q", [2.0, 3.0, 4.0])
def test_upper_bound_below_eigen_average(rng, q):
    for _ in range(4):
        rho = rank2(rng)
        ub = roof_upper_bound(rho, q, options=FAST_OPTIONS)
        assert 0 <= ub.value <= eig_average(rho, q) + 1e-12


def test_upper_bound_attained_by_its_decomposition(rng):
    rho = rank2(rng)
    ub = roof_upper_bound(rho, 3.0)
    u = ub.decomposition
    assert np.allclose(u.conj().T @ u, np.eye(2), atol=1e-10)
    rb = range_basis(rho)
    # rows sitting on a float-rounded tangle zero carry tau ~ 1e-16, an exact
    # zero up to rounding; the bound counts them as zero
    al, be = u[:, 0], u[:, 1]
    br = sum(rb.quartic[j] * al ** (4 - j) * be**j for j in range(5))
    nrm2 = np.abs(al) ** 2 * rb.p1 + np.abs(be) ** 2 * rb.p2
    live = 4 * np.abs(br) > 1e-13 * np.maximum(nrm2, 1e-300) ** 2
    full = ensemble_objective(u, rb, 3.0) ** 3
    assert ensemble_objective(u[live], rb, 3.0) ** 3 == pytest.approx(ub.value, rel=1e-9)
    assert full >= ub.value * (1 - 1e-12)


def test_upper_bound_monotone_in_ensemble_size(rng):
    rho = rank2(rng)
    vals = [roof_upper_bound(rho, 2.0, m).value for m in (2, 4, 6, 8)]
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


def test_ghz_w_zero_region():
    for p in (0.3, 0.5, 0.6):
        assert roof_upper_bound(ghz_w(p), 2.0).value < 1e-10
    assert roof_upper_bound(ghz_w(P0 + 0.03), 2.0).value > 1e-4
    assert roof_upper_bound(ghz_w(1.0), 2.0).value == pytest.approx(1, abs=1e-12)


def test_roof_dispatch(rng):
    rho = one_root_marginals(rng, 1)[0]
    assert roof(rho, 2.0).exact
    q4 = roof(rho, 4.0)
    assert not q4.exact and q4.power == 4.0
    assert not roof(ghz_w(0.8), 2.0).exact


def test_argument_validation(rng):
    rho = rank2(rng)
    with pytest.raises(ValueError):
        roof_upper_bound(rho, 1.5)
    with pytest.raises(ValueError):
        roof_upper_bound(rho, 2.0, m=1)


def test_seed_determinism(rng):
    rho = rank2(rng)
    opts = RoofOptions(seed=3)
    assert roof_upper_bound(rho, 3.0, options=opts).value == roof_upper_bound(rho, 3.0, options=opts).value


def test_rho2_marginals_far_out():
    for x in (-100.0, 100.0):
        k = family_rho2(x)
        for t in TRIPLES:
            assert is_one_root(reduced(k, t))
