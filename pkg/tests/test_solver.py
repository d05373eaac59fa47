import numpy as np
import pytest

from ansflow.data import gen_random_bandlimited, gen_shear
from ansflow.dyadic import split_hh_ll
from ansflow.heat import semigroup
from ansflow.pseudo import half_space
from ansflow.solver import (IFRK4, SolverConfig, continuous_dependence_run, friedrichs_projectors,
                            max_friedrichs_radius, rhs_w, solve_u, solve_w, step)
from ansflow.spectral import Grid, VectorField


def test_projector_examples():
    g = Grid.cube(16)
    n = 4.0
    Pn, P1n, P2n = friedrichs_projectors(g, n)
    ix = lambda a, b, c: (a % 16, b % 16, c % 16)
    assert Pn[ix(3, 0, 1)] == 1 and P1n[ix(3, 0, 1)] == 1
    assert Pn[ix(4, 1, 0)] == 0
    assert P2n[ix(5, 5, 0)] == 1 and P1n[ix(2, 0, 0)] == 0
    # P1n = Pn (1 - P2n)
    assert np.array_equal(P1n, Pn * (1 - P2n))
    with pytest.raises(ValueError):
        friedrichs_projectors(g, max_friedrichs_radius(g) + 1)


def test_config_validation(g16):
    with pytest.raises(ValueError):
        SolverConfig(g16, dt=0)
    with pytest.raises(ValueError):
        SolverConfig(g16, nu_h=0)
    with pytest.raises(ValueError):
        SolverConfig(g16, integrator="euler")
    with pytest.raises(ValueError):
        SolverConfig(g16, n_cutoff=100.0)


def test_rhs_w_zero_and_shear(g16):
    cfg = SolverConfig(g16)
    masks = friedrichs_projectors(g16, cfg.cutoff)
    z = VectorField.zeros(g16)
    assert not np.any(rhs_w(z, z, masks, cfg).coeffs)
    s = gen_shear(g16, 1.0, 2)
    out = rhs_w(z, s, masks, cfg)
    assert np.max(np.abs(out.coeffs)) < 1e-12
    with pytest.raises(ValueError):
        bad = gen_random_bandlimited(0, g16)
        rhs_w(bad, z, friedrichs_projectors(g16, 1.5), cfg)


def test_step_without_nonlinearity_is_heat(g16):
    cfg = SolverConfig(g16, nu_h=0.3, nu_3=0.1, dt=0.05, T=0.05)
    hs = half_space(g16)
    u = gen_random_bandlimited(1, g16)
    rate = np.broadcast_to(cfg.nu_h * hs.xi_h_sq + cfg.nu_3 * hs.xi_v_sq, hs.shape)
    out = step(hs.to_half(u.coeffs), 0.0, lambda v, t: np.zeros_like(v), cfg, rate)
    ref = semigroup(u, 0.05, 0.3, 0.1).coeffs
    assert np.max(np.abs(hs.to_full(out) - ref)) < 1e-13


def test_ifrk4_fourth_order():
    # scalar ODE v' = -v + v^2, exact v = 1 / (1 + (1/v0 - 1) e^t)
    rate = np.array([1.0])
    v0, T = 0.5, 1.0
    exact = 1 / (1 + (1 / v0 - 1) * np.exp(T))
    errs = []
    for n in (10, 20, 40):
        s = IFRK4(rate, T / n, lambda v, t: v**2)
        v = np.array([v0])
        for i in range(n):
            v = s(v, i * T / n)
        errs.append(abs(v[0] - exact))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(orders > 3.7)


def test_solve_u_temporal_convergence(g16):
    u0 = gen_random_bandlimited(2, g16, amplitude=1.0)
    finals = {}
    for dt in (0.04, 0.02, 0.005):
        finals[dt] = solve_u(u0, SolverConfig(g16, nu_h=0.05, nu_3=0.05, dt=dt, T=0.4,
                                              track_besov=False)).final.coeffs
    e1 = np.linalg.norm(finals[0.04] - finals[0.005])
    e2 = np.linalg.norm(finals[0.02] - finals[0.005])
    assert e1 / e2 > 10


def test_energy_identity_and_divergence(g16):
    u0 = gen_random_bandlimited(3, g16)
    res = solve_u(u0, SolverConfig(g16, nu_h=0.1, nu_3=0.05, dt=0.01, T=0.5, track_besov=False))
    assert res.record.energy_defect() < 1e-5
    assert res.record.max_div_residual < 1e-10
    assert res.record.energy[-1] < res.record.energy[0]


def test_solve_u_zero_and_shear(g16):
    cfg = SolverConfig(g16, nu_h=0.2, dt=0.01, T=0.2)
    res = solve_u(VectorField.zeros(g16), cfg)
    assert not np.any(res.final.coeffs)
    s = gen_shear(g16, 1.0, 2)
    res = solve_u(s, cfg)
    ref = semigroup(s, 0.2, 0.2, 0.0).coeffs
    assert np.max(np.abs(res.final.coeffs - ref)) < 1e-13


def test_solve_w_zero_and_pure_hh(g16):
    cfg = SolverConfig(g16, nu_h=0.2, nu_3=0.1, dt=0.01, T=0.1)
    res = solve_w(VectorField.zeros(g16), cfg)
    assert not np.any(res.final.coeffs) and not res.record.blew_up
    # a shear has no vertical frequency, hence it is pure hh and u_F solves the system
    s = gen_shear(g16, 1.0, 2)
    hh, ll = split_hh_ll(s)
    assert np.max(np.abs(ll.coeffs)) < 1e-15
    res = solve_w(s, cfg)
    assert np.max(np.abs(res.final.coeffs)) < 1e-12


def test_solve_w_stays_in_ball(g16):
    u0 = gen_random_bandlimited(4, g16, amplitude=0.2)
    cfg = SolverConfig(g16, nu_h=0.2, nu_3=0.1, dt=0.01, T=0.1, n_cutoff=4.0)
    res = solve_w(u0, cfg)
    Pn = friedrichs_projectors(g16, 4.0)[0]
    assert not np.any(res.final.coeffs * (1 - Pn))
    assert res.record.max_div_residual < 1e-10


def test_continuous_dependence(g16):
    u0 = gen_random_bandlimited(5, g16)
    cfg = SolverConfig(g16, nu_h=0.1, nu_3=0.1, dt=0.02, T=0.2)
    rep = continuous_dependence_run(u0, u0 * 1.0, cfg)
    assert np.all(rep.ratio == 1.0)
    with pytest.raises(ValueError):
        continuous_dependence_run(u0, u0, SolverConfig(g16, nu_3=0.0))
