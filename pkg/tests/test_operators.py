"""Assembled forms against pointwise integrand oracles."""

import numpy as np
import pytest

from nsab.basis import BasisCache, gauss_legendre
from nsab.field import grid_quadrature, layout_for, potentials_to_velocity, \
    random_field, zero_field
from nsab.operators import OperatorSet, apply_form, assemble_mode
from nsab.params import ChannelGeometry, Resolution, derive_params

from conftest import (a_form_oracle, grad_omega_sq_oracle,
                      mode_velocity_profiles, mode_vorticity_gradient,
                      params_with_k, random_block_coeffs)


@pytest.fixture(scope="module")
def setup(geo_odd, res_small, cache_odd):
    par = derive_params(0.2, 0.1, 0.5, 0.05)
    return OperatorSet(par, geo_odd, res_small, cache_odd)


def _block_energy(mops, ct, cp, form):
    bt, bp = mops.blocks["toroidal"], mops.blocks["poloidal"]
    return 2.0 * (np.vdot(ct, getattr(bt, form) @ ct).real
                  + np.vdot(cp, getattr(bp, form) @ cp).real)


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("gamma,k", [(0.0, 0.0), (0.7, 0.0), (-1.0, 5.0), (0.3, 2.0)])
def test_a_form_matches_pointwise_oracle(geo_odd, res_small, cache_odd, gamma, k, seed):
    par = params_with_k(gamma, k)
    ops = OperatorSet(par, geo_odd, res_small, cache_odd)
    mops = ops.mode_ops(2, -1)
    ct, cp = random_block_coeffs(cache_odd, 2, -1, 100 + seed)
    a_mat = _block_energy(mops, ct, cp, "K_a")
    a_ref = a_form_oracle(par, cache_odd, 2, -1, ct, cp)
    assert a_mat == pytest.approx(a_ref, rel=1e-12)


@pytest.mark.parametrize("gamma", [-1.0, -0.5, 0.0, 0.5, 1.0])
@pytest.mark.parametrize("k", [0.0, 5.0])
def test_form_symmetry(geo, gamma, k):
    par = params_with_k(gamma, k)
    res = Resolution(N1=8, N2=8, P=24)
    ops = OperatorSet(par, geo, res)
    for kk in ((1, 0), (2, 3), (0, 0)):
        mops = ops.mode_ops(*kk)
        for blk in mops.blocks.values():
            m = blk.K_a
            assert np.abs(m - m.T).max() <= 1e-12 * np.abs(m).max()


def test_gamma_minus_one_bilaplacian_identity(geo_odd, res_small, cache_odd):
    """With k = 0 the form energy equals ||Lap u||^2 exactly (flat walls)."""
    par = params_with_k(-1.0, 0.0)
    ops = OperatorSet(par, geo_odd, res_small, cache_odd)
    z2, w2 = gauss_legendre(3 * res_small.Q, geo_odd.H)
    for seed in range(20):
        k1, k2 = [(1, 0), (2, 1), (1, -1), (3, 2)][seed % 4]
        ct, cp = random_block_coeffs(cache_odd, k1, k2, 300 + seed)
        a_val = _block_energy(ops.mode_ops(k1, k2), ct, cp, "K_a")
        prof = mode_velocity_profiles(cache_odd, k1, k2, ct, cp, z2, dmax=2)
        m = cache_odd.block(k1, k2).m
        lap = prof[2] - m * prof[0]
        lap_sq = 2.0 * geo_odd.area * float(np.sum(w2 * np.abs(lap) ** 2))
        assert abs(a_val - lap_sq) <= 1e-12 * lap_sq


def test_flat_wall_gamma_independence(geo_odd, res_small, cache_odd):
    ct, cp = random_block_coeffs(cache_odd, 1, 2, 1)
    vals = []
    for gamma in (-1.0, 0.0, 1.0):
        ops = OperatorSet(params_with_k(gamma, 2.0), geo_odd, res_small, cache_odd)
        vals.append(_block_energy(ops.mode_ops(1, 2), ct, cp, "K_a"))
    assert max(vals) - min(vals) <= 1e-13 * max(abs(v) for v in vals)


def test_boundary_term_against_surface_quadrature(geo_odd, res_small, cache_odd):
    """a_k(u,u) - a_0(u,u) = k * wall integral, recomputed from traces."""
    k = 3.7
    par_k = params_with_k(0.4, k)
    par_0 = params_with_k(0.4, 0.0)
    ops_k = OperatorSet(par_k, geo_odd, res_small, cache_odd)
    ops_0 = OperatorSet(par_0, geo_odd, res_small, cache_odd)
    for seed in (0, 1, 2):
        k1, k2 = 2, 1
        ct, cp = random_block_coeffs(cache_odd, k1, k2, 500 + seed)
        diff = (_block_energy(ops_k.mode_ops(k1, k2), ct, cp, "K_a")
                - _block_energy(ops_0.mode_ops(k1, k2), ct, cp, "K_a"))
        wall = 0.0
        for zw, sgn in ((0.0, -1.0), (geo_odd.H, +1.0)):
            zp = np.array([zw])
            wv, _ = mode_vorticity_gradient(cache_odd, k1, k2, ct, cp, zp)
            du = mode_velocity_profiles(cache_odd, k1, k2, ct, cp, zp, dmax=1)[1][:, 0]
            nxw = np.array([-sgn * wv[1, 0], sgn * wv[0, 0], 0.0])
            wall += geo_odd.area * float(np.real(np.vdot(sgn * du, nxw)))
        assert diff == pytest.approx(2.0 * k * wall, rel=1e-10)


@pytest.mark.parametrize("gamma", [-0.5, 0.0, 0.5])
def test_garding_sign_structure(geo_odd, res_small, cache_odd, gamma):
    """k = 0: a(u,u) >= (1-|gamma|) * independent grad-omega energy."""
    ops = OperatorSet(params_with_k(gamma, 0.0), geo_odd, res_small, cache_odd)
    for seed in range(4):
        ct, cp = random_block_coeffs(cache_odd, 1, 1, 700 + seed)
        a_val = _block_energy(ops.mode_ops(1, 1), ct, cp, "K_a")
        ref = grad_omega_sq_oracle(cache_odd, 1, 1, ct, cp)
        assert a_val >= (1.0 - abs(gamma)) * ref - 1e-10 * abs(ref)


def test_cross_mode_forms_vanish(geo_odd, res_small, cache_odd):
    """Distinct tangential modes never couple: evaluate the a-form integrand
    between two single-mode fields by physical-space quadrature."""
    par = params_with_k(0.5, 2.0)
    ops = OperatorSet(par, geo_odd, res_small, cache_odd)
    f = zero_field(geo_odd, res_small)
    g = zero_field(geo_odd, res_small)
    lay = layout_for(res_small)
    (i1, i2, k1, k2), (j1, j2, q1, q2) = lay.reps[0], lay.reps[3]
    f.psi[i1, i2, 0] = 1.0
    f.phi[i1, i2, 0] = 0.5
    g.psi[j1, j2, 1] = 1.0
    c1, c2 = lay.conj_index(i1, i2)
    f.psi[c1, c2] = np.conj(f.psi[i1, i2])
    f.phi[c1, c2] = np.conj(f.phi[i1, i2])
    c1, c2 = lay.conj_index(j1, j2)
    g.psi[c1, c2] = np.conj(g.psi[j1, j2])
    # volume integrand G(f) : grad(omega(g)) on the padded physical grid:
    # the tangential factor int e^{i(eta_f - eta_g).x} is evaluated as an
    # actual grid sum (exact for distinct stored modes)
    z = cache_odd.z
    _, Gf = mode_vorticity_gradient(cache_odd, k1, k2, f.psi[i1, i2], f.phi[i1, i2], z)
    _, Gg = mode_vorticity_gradient(cache_odd, q1, q2, g.psi[j1, j2],
                                    np.zeros(res_small.n_poloidal, complex), z)
    M1, M2 = res_small.padded_shape
    x = np.arange(M1) * geo_odd.L1 / M1
    y = np.arange(M2) * geo_odd.L2 / M2
    e1f, e2f = cache_odd.wavenumber(k1, k2)
    e1g, e2g = cache_odd.wavenumber(q1, q2)
    phase = np.exp(1j * ((e1f - e1g) * x[:, None] + (e2f - e2g) * y[None, :]))
    tang = phase.sum() * (geo_odd.L1 / M1) * (geo_odd.L2 / M2)
    zprof = np.sum(cache_odd.w * np.einsum("ijq,ijq->q", Gf, np.conj(Gg)))
    assert abs(tang * zprof) <= 1e-12 * abs(zprof) * geo_odd.area
    # and the assembled machinery agrees: the full-form inner product is zero
    assert ops.form_inner("K_a", f, g) == pytest.approx(0.0, abs=1e-13)


def _wall_pieces(cache, k1, k2, gamma, ct, cp, zw, sgn):
    """(n x omega, n x Gn, d_n u) for one wall, from pointwise profiles."""
    zp = np.array([zw])
    wv, Gt = mode_vorticity_gradient(cache, k1, k2, ct, cp, zp)
    e1, e2 = cache.wavenumber(k1, k2)
    # Gn = sgn*(d_z w + gamma * grad w3) rows 1..3 at the wall
    Gn = sgn * (Gt[:, 2, 0] + gamma * np.array([1j * e1, 1j * e2, 0.0]) * wv[2, 0])
    nxw = np.array([-sgn * wv[1, 0], sgn * wv[0, 0], 0.0])
    nxGn = np.array([-sgn * Gn[1], sgn * Gn[0], 0.0])
    du = mode_velocity_profiles(cache, k1, k2, ct, cp, zp, dmax=1)[1][:, 0]
    return nxw, nxGn, sgn * du


@pytest.mark.parametrize("gamma,k", [(0.0, 0.0), (0.6, 2.5), (-1.0, 1.0)])
def test_strong_form_integration_by_parts(geo_odd, res_small, cache_odd, gamma, k):
    """a(u, w) = int (Lap^2 u) . conj(w) + sum_walls (k n x omega - n x Gn)
    . conj(d_n w) for solenoidal Dirichlet fields (div-free kills the
    grad-div terms).  Left side from the assembled matrices, right side from
    pointwise profiles and an independent quadrature."""
    par = params_with_k(gamma, k)
    ops = OperatorSet(par, geo_odd, res_small, cache_odd)
    k1, k2 = 2, 1
    blk = cache_odd.block(k1, k2)
    ct, cp = random_block_coeffs(cache_odd, k1, k2, 61)
    dt_, dp_ = random_block_coeffs(cache_odd, k1, k2, 62)
    mops = ops.mode_ops(k1, k2)
    lhs = 2.0 * np.real(np.vdot(dt_, mops.blocks["toroidal"].K_a @ ct)
                        + np.vdot(dp_, mops.blocks["poloidal"].K_a @ cp))
    # volume: bilaplacian of the trial against the test velocity
    z2, w2 = gauss_legendre(3 * res_small.Q, geo_odd.H)
    m = blk.m
    e1, e2 = cache_odd.wavenumber(k1, k2)
    P = res_small.P
    Et = blk.tor.evaluate(z2, geo_odd.H, P, "dirichlet", dmax=4)
    Ep = blk.pol.evaluate(z2, geo_odd.H, P, "clamped", dmax=5)
    t = [Et[d] @ ct for d in range(5)]
    p = [Ep[d] @ cp for d in range(6)]
    LLt = t[4] - 2 * m * t[2] + m * m * t[0]
    DLLp = p[5] - 2 * m * p[3] + m * m * p[1]
    LLp = p[4] - 2 * m * p[2] + m * m * p[0]
    bih = np.stack([1j * e2 * LLt + 1j * e1 * DLLp,
                    -1j * e1 * LLt + 1j * e2 * DLLp,
                    m * LLp])
    wvel = mode_velocity_profiles(cache_odd, k1, k2, dt_, dp_, z2)[0]
    rhs = geo_odd.area * float(np.real(np.sum(w2 * np.einsum(
        "iq,iq->q", bih, np.conj(wvel)))))
    for zw, sgn in ((0.0, -1.0), (geo_odd.H, +1.0)):
        nxw, nxGn, _ = _wall_pieces(cache_odd, k1, k2, gamma, ct, cp, zw, sgn)
        _, _, dnw = _wall_pieces(cache_odd, k1, k2, gamma, dt_, dp_, zw, sgn)
        rhs += geo_odd.area * float(np.real(
            np.vdot(dnw, par.k * nxw - nxGn)))
    assert lhs == pytest.approx(2.0 * rhs, rel=1e-10)


@pytest.mark.parametrize("gamma,k", [(0.3, 1.5)])
def test_bilaplacian_form_integration_by_parts(geo_odd, res_small, cache_odd,
                                               gamma, k):
    """a(u, w) = int Lap u . conj(Lap w) + sum_walls [(k n x omega - n x Gn)
    - Lap u] . conj(d_n w) for solenoidal Dirichlet fields."""
    par = params_with_k(gamma, k)
    ops = OperatorSet(par, geo_odd, res_small, cache_odd)
    k1, k2 = 1, 2
    blk = cache_odd.block(k1, k2)
    ct, cp = random_block_coeffs(cache_odd, k1, k2, 71)
    dt_, dp_ = random_block_coeffs(cache_odd, k1, k2, 72)
    mops = ops.mode_ops(k1, k2)
    lhs = 2.0 * np.real(np.vdot(dt_, mops.blocks["toroidal"].K_a @ ct)
                        + np.vdot(dp_, mops.blocks["poloidal"].K_a @ cp))
    z2, w2 = gauss_legendre(3 * res_small.Q, geo_odd.H)
    m = blk.m

    def lap_profiles(a, b, z):
        prof = mode_velocity_profiles(cache_odd, k1, k2, a, b, z, dmax=2)
        return prof[2] - m * prof[0]

    lap_u = lap_profiles(ct, cp, z2)
    lap_w = lap_profiles(dt_, dp_, z2)
    rhs = geo_odd.area * float(np.real(np.sum(w2 * np.einsum(
        "iq,iq->q", lap_u, np.conj(lap_w)))))
    for zw, sgn in ((0.0, -1.0), (geo_odd.H, +1.0)):
        nxw, nxGn, _ = _wall_pieces(cache_odd, k1, k2, gamma, ct, cp, zw, sgn)
        _, _, dnw = _wall_pieces(cache_odd, k1, k2, gamma, dt_, dp_, zw, sgn)
        lap_u_wall = lap_profiles(ct, cp, np.array([zw]))[:, 0]
        rhs += geo_odd.area * float(np.real(
            np.vdot(dnw, par.k * nxw - nxGn - lap_u_wall)))
    assert lhs == pytest.approx(2.0 * rhs, rel=1e-10)


def test_apply_form_examples(setup):
    ops = setup
    mops = ops.mode_ops(1, 1)
    bt = mops.blocks["toroidal"]
    n = bt.n
    for j in (0, n // 2, n - 1):
        e = np.zeros(n)
        e[j] = 1.0
        assert apply_form(bt.M, e, e).real > 0.0
    rng = np.random.default_rng(3)
    u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    # filter form dominates the mass form for alpha > 0
    assert apply_form(bt.M_lambda, u, u).real >= apply_form(bt.M, u, u).real
    # Hermitian symmetry of the a-form
    assert apply_form(bt.K_a, u, v) == pytest.approx(
        np.conj(apply_form(bt.K_a, v, u)), rel=1e-12)
    with pytest.raises(ValueError, match="dimension mismatch"):
        apply_form(bt.K_a, u[:-1], v)


def test_mode_operator_invariants(setup):
    ops = setup
    for kk in ((1, 0), (1, 1), (2, -1)):
        mops = ops.mode_ops(*kk)
        for blk in mops.blocks.values():
            assert np.linalg.eigvalsh(blk.M)[0] > 0.99
            assert np.linalg.eigvalsh(blk.M_lambda)[0] > 0.99
            assert np.linalg.eigvalsh(blk.K_grad)[0] > 0.0
    full = ops.mode_ops(1, 1).K_a
    assert np.abs(full - full.T).max() <= 1e-12 * np.abs(full).max()


def test_sobolev_norms(setup, geo_odd, res_small):
    ops = setup
    z = zero_field(geo_odd, res_small)
    nz = ops.sobolev_norms(z)
    assert all(v == 0.0 for k, v in nz.items() if k != "shift")
    # single eigenvector: ||(A+shift)^{1/2} u|| = sqrt(lam + shift)
    blk = ops.mode_ops(1, 1).blocks["toroidal"]
    lam, V = ops.block_eig(blk)
    f = zero_field(geo_odd, res_small)
    lay = layout_for(res_small)
    rep = next(r for r in lay.reps if (abs(r[2]), abs(r[3])) == (1, 1))
    f.psi[rep[0], rep[1]] = V[:, -1] / np.sqrt(2.0)  # unit L2 norm overall
    j1, j2 = lay.conj_index(rep[0], rep[1])
    f.psi[j1, j2] = np.conj(f.psi[rep[0], rep[1]])
    sn = ops.sobolev_norms(f)
    assert sn["L2"] == pytest.approx(1.0, rel=1e-12)
    assert sn["A_half"] == pytest.approx(np.sqrt(lam[-1] + sn["shift"]), rel=1e-10)
    # Parseval: total L2 from the physical grid equals the form energy
    u = random_field(geo_odd, res_small, seed=21, amplitude=1.7)
    wq = grid_quadrature(ops.cache, res_small)
    U = potentials_to_velocity(u, ops.cache)
    phys = float(np.sum(U**2 * wq))
    assert ops.form_energy("M", u) == pytest.approx(phys, rel=1e-12)


def test_mean_block_wall_coupling_can_lose_coercivity(geo):
    # z(H-z)-type profiles make the wall term dominate for large k: the
    # assembled mean block must reproduce the sign change of a(u,u)
    res = Resolution(N1=4, N2=4, P=12)
    for k, positive in ((0.0, True), (5.0, False)):
        ops = OperatorSet(params_with_k(0.0, k), geo, res)
        blk = ops.mean_ops.blocks["mean1"]
        lam = np.linalg.eigvalsh(blk.K_a)
        assert (lam[0] > 0) == positive
