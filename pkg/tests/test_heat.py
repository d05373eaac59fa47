import math

import numpy as np
import pytest

from ansflow.data import gen_random_bandlimited
from ansflow.dyadic import decomposition_for, delta_h, delta_v, split_hh_ll
from ansflow.heat import (HeatFlowParams, decay_times, make_uF, semigroup, time_norm,
                          verify_decay_lemma24, verify_linf_l2_lemma25)
from ansflow.spectral import Grid, SpectralField, VectorField


@pytest.fixture(scope="module")
def g():
    return Grid.cube(32)


def mode_vector(g, m, amp=1.0):
    """Divergence-free real field (0, 0, cos) ... with xi along x1 and x3 handled below."""
    c = np.zeros((3,) + g.shape, complex)
    # (0, 1, 0) is orthogonal to any xi with xi2 = 0
    c[1][m] = 0.5 * amp
    c[1][tuple(-x for x in m)] = 0.5 * amp
    return VectorField(g, c, True, True)


def test_semigroup_single_mode():
    g = Grid.cube(16)
    c = np.zeros(g.shape, complex)
    c[1, 0, 2] = 1.0
    out = semigroup(SpectralField(g, c), 1.0, 0.1, 0.01)
    assert out.coeffs[1, 0, 2] == pytest.approx(math.exp(-0.14), rel=1e-14)


def test_semigroup_identity_and_composition(g):
    u = gen_random_bandlimited(0, g)
    assert np.array_equal(semigroup(u, 0.0, 1.0, 0.3).coeffs, u.coeffs)
    a = semigroup(semigroup(u, 0.2, 1.0, 0.3), 0.5, 1.0, 0.3).coeffs
    b = semigroup(u, 0.7, 1.0, 0.3).coeffs
    assert np.max(np.abs(a - b)) <= 1e-12 * np.max(np.abs(b))
    with pytest.raises(ValueError):
        semigroup(u, -1.0, 1.0, 0.0)


def test_params_validation():
    with pytest.raises(ValueError):
        HeatFlowParams(0.0)
    with pytest.raises(ValueError):
        HeatFlowParams(1.0, -0.1)
    with pytest.raises(ValueError):
        HeatFlowParams(1.0, 0.0, np.array([0.0, 0.5, 0.5]))
    with pytest.raises(ValueError):
        HeatFlowParams(1.0, 0.0, np.array([0.1, 0.5]))


def test_make_uF_basics(g):
    u = gen_random_bandlimited(1, g)
    times = np.linspace(0, 0.5, 6)
    tr = make_uF(u, HeatFlowParams(1.0, 0.1, times))
    hh, _ = split_hh_ll(u)
    assert np.array_equal(tr[0].coeffs, hh.coeffs)
    norms = [f.l2_norm() for f in tr.fields]
    assert all(b <= a for a, b in zip(norms, norms[1:]))
    assert all(f.divergence_residual() < 1e-10 for f in tr.fields)
    dec = decomposition_for(g)
    f3 = tr[3]
    for comp in range(3):
        lhs = delta_v(delta_h(f3.components[comp], 2), 1).coeffs
        rhs = semigroup(delta_v(delta_h(hh.components[comp], 2), 1), times[3], 1.0, 0.1).coeffs
        assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_make_uF_ll_data_is_zero(g):
    u = mode_vector(g, (0, 0, 6))
    tr = make_uF(u, HeatFlowParams(1.0, 0.1, np.array([0.0, 1.0])))
    assert all(f.l2_norm() == 0 for f in tr.fields)


def test_make_uF_single_band_decay(g):
    u = mode_vector(g, (6, 0, 3))
    tr = make_uF(u, HeatFlowParams(1.0, 0.1, np.array([0.0, 0.1, 0.3])))
    for t, f in tr:
        assert f.l2_norm() == pytest.approx(u.l2_norm() * math.exp(-(36 + 0.9) * t), rel=1e-12)


def test_time_norm_closed_forms():
    r = 2.0
    t = decay_times(r, r, 200)
    v = np.exp(-r * t)
    assert time_norm(v, t, 1.0, tail_rate=r) == pytest.approx(1 / r, rel=1e-3)
    assert time_norm(v, t, 2.0, tail_rate=r) == pytest.approx(math.sqrt(1 / (2 * r)), rel=1e-3)
    assert time_norm(v, t, np.inf) == 1.0


def test_decay_bound_single_mode_q1(g):
    # band (k, l) = (2, 1); integral of e^{-rate t} is 1 / rate
    u = mode_vector(g, (6, 0, 3))
    rep = verify_decay_lemma24(u, HeatFlowParams(1.0, 0.1), 1.0, 4.0)
    assert len(rep.rows) == 1
    row = rep.rows[0]
    rate = 36 + 0.1 * 9
    exact = 1 / (rate * min(2.0**-4, 10 * 2.0**-2))
    assert row.ratio == pytest.approx(exact, rel=1e-2)
    assert row.ratio <= 1
    fine = verify_decay_lemma24(u, HeatFlowParams(1.0, 0.1), 1.0, 4.0, n_times=400).rows[0]
    assert fine.ratio == pytest.approx(exact, rel=1e-4)


def test_decay_time_grid_refinement(g):
    u = mode_vector(g, (6, 0, 3)) + mode_vector(g, (4, 3, 1))
    a = verify_decay_lemma24(u, HeatFlowParams(1.0, 0.1), 2.0, 4.0, n_times=48).ratios
    b = verify_decay_lemma24(u, HeatFlowParams(1.0, 0.1), 2.0, 4.0, n_times=96).ratios
    assert np.max(np.abs(a - b) / b) <= 0.01


def test_decay_bound_vertical_branch_skipped(g):
    u = mode_vector(g, (6, 0, 3))
    rep = verify_decay_lemma24(u, HeatFlowParams(1.0, 0.0), 2.0, 2.0)
    assert rep.vertical_branch_skipped and np.isfinite(rep.max_ratio)


def test_decay_bound_random_stability(g):
    dec = decomposition_for(g)
    u = gen_random_bandlimited(2, g, (dec.k_range[0] + 1, dec.k_range[1]),
                               (dec.l_range[0], dec.l_range[1] - 1))
    rep = verify_decay_lemma24(split_hh_ll(u)[0], HeatFlowParams(1.0, 0.1), 2.0, 4.0)
    assert rep.spread <= 10
    assert all(len(r) == 7 for r in rep.csv_rows())


def test_decay_bound_bad_args(g):
    u = mode_vector(g, (6, 0, 3))
    with pytest.raises(ValueError):
        verify_decay_lemma24(u, HeatFlowParams(1.0), 0.5, 2.0)
    with pytest.raises(ValueError):
        verify_decay_lemma24(u, HeatFlowParams(1.0), 1.0, 1.0)


def test_linf_l2_zero_and_single(g):
    z = VectorField.zeros(g)
    rep = verify_linf_l2_lemma25(z, HeatFlowParams(1.0, 0.1))
    assert rep.sequence_sum == 0 and rep.fitted_constant == 0
    u = mode_vector(g, (6, 0, 3))
    rep = verify_linf_l2_lemma25(u, HeatFlowParams(1.0, 0.0))
    # one vertical band: sup_x_h (int |cos|^2 dx3)^(1/2) decays like e^{-36 t}
    lhs = math.sqrt(math.pi) * math.sqrt(1 / (2 * 36))
    assert rep.lhs == pytest.approx([lhs], rel=1e-3)
    assert rep.normalized[0] == pytest.approx(lhs * 2 ** 0.5, rel=1e-3)
