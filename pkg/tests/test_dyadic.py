import numpy as np
import pytest

from ansflow.data import gen_random_bandlimited
from ansflow.dyadic import (DyadicDecomposition, decomposition_for, delta_h, delta_iso, delta_v,
                            ll_part, make_partition, s_h, s_v, split_hh_ll)
from ansflow.spectral import Grid, SpectralField, VectorField, forward_transform


def test_partition_support_and_bounds():
    phi = make_partition()
    assert phi(0.5) == 0 and phi(3.0) == 0
    assert phi(0.75) == 0 and phi(8 / 3) == 0
    v = phi(np.linspace(0, 10, 5001))
    assert v.min() >= 0 and v.max() <= 1


def test_partition_of_unity():
    phi = make_partition()
    assert abs(sum(phi(2.0**-j * 5.37) for j in range(-8, 9)) - 1) < 1e-10
    tau = np.geomspace(2.0**-6, 2.0**6, 999)
    total = sum(phi(2.0**-j * tau) for j in range(-8, 9))
    assert np.max(np.abs(total - 1)) < 1e-10


def test_tampered_partition_breaks_identity():
    phi = make_partition(1.25)
    total = sum(phi(2.0**-j * 5.37) for j in range(-8, 9))
    assert abs(total - 1) > 1e-3


def _field(g, rng):
    return forward_transform(rng.standard_normal(g.shape), g)


def test_masks_partition_resolved_modes(g32):
    dec = decomposition_for(g32)
    h = sum(dec.h_mask(k) for k in dec.k_bands) + dec.sh_mask(dec.k_range[0])
    v = sum(dec.v_mask(l) for l in dec.l_bands) + dec.sv_mask(dec.l_range[0])
    i = sum(dec.iso_mask(j) for j in dec.j_bands)
    d = g32.dealias_mask
    assert np.max(np.abs(np.broadcast_to(h, g32.shape)[d] - 1)) < 1e-10
    assert np.max(np.abs(np.broadcast_to(v, g32.shape)[d] - 1)) < 1e-10
    live = d & (np.broadcast_to(g32.xi_abs, g32.shape) > 0)
    assert np.max(np.abs(np.broadcast_to(i, g32.shape)[live] - 1)) < 1e-10


def test_out_of_range_bands_vanish(g32):
    dec = decomposition_for(g32)
    assert not np.any(dec.h_mask(dec.k_range[1] + 1))
    assert not np.any(dec.v_mask(dec.l_range[0] - 1))


def test_single_shell_multiplier():
    g = Grid.cube(16)
    c = np.zeros(g.shape, complex)
    c[4, 0, 1] = c[-4, 0, -1] = 1.0
    c[0, 4, 2] = c[0, -4, -2] = 0.5
    a = SpectralField(g, c)
    out = delta_h(a, 2)
    assert np.allclose(out.coeffs, make_partition()(1.0) * c)


def test_disjoint_bands(g32, rng):
    a = _field(g32, rng)
    assert not np.any(delta_h(delta_h(a, 1), 3).coeffs)
    assert not np.any(delta_v(delta_v(a, 0), 2).coeffs)
    assert not np.any(delta_iso(delta_iso(a, 0), 2).coeffs)


def test_reconstruction(g32, rng):
    dec = decomposition_for(g32)
    a = _field(g32, rng)
    a = a.with_coeffs(a.coeffs * g32.dealias_mask)
    for k in dec.k_bands:
        rest = sum(delta_h(a, kk).coeffs for kk in dec.k_bands if kk >= k)
        assert np.max(np.abs(s_h(a, k).coeffs + rest - a.coeffs)) < 1e-10
    for l in dec.l_bands:
        rest = sum(delta_v(a, ll).coeffs for ll in dec.l_bands if ll >= l)
        assert np.max(np.abs(s_v(a, l).coeffs + rest - a.coeffs)) < 1e-10


def test_low_pass_examples(g32):
    x1, _, _ = g32.coordinates()
    const = forward_transform(np.full(g32.shape, 2.0), g32)
    dec = decomposition_for(g32)
    for k in dec.k_bands:
        assert np.allclose(s_h(const, k).coeffs, const.coeffs)
    high = forward_transform(np.sin(8 * x1) + np.zeros(g32.shape), g32)
    assert np.max(np.abs(s_h(high, 1).coeffs)) < 1e-15


def test_vertical_of_x3_independent(g32):
    x1, x2, _ = g32.coordinates()
    a = forward_transform(np.cos(x1) * np.sin(2 * x2) + np.zeros(g32.shape), g32)
    dec = decomposition_for(g32)
    for l in dec.l_bands:
        assert np.max(np.abs(delta_v(a, l).coeffs)) < 1e-15


def test_band_operators_commute(g32, rng):
    a = _field(g32, rng)
    x = delta_v(delta_h(a, 2), 1).coeffs
    y = delta_h(delta_v(a, 1), 2).coeffs
    assert np.max(np.abs(x - y)) <= 1e-15 * np.max(np.abs(x))


def test_near_orthogonality(g32, rng):
    # at most two symbols overlap and they sum to one, so 1/2 <= sum phi^2 <= 1
    dec = decomposition_for(g32)
    a = _field(g32, rng)
    a = a.with_coeffs(a.coeffs * g32.dealias_mask * (np.broadcast_to(g32.xi_h, g32.shape) > 0))
    s = sum(delta_h(a, k).l2_norm() ** 2 for k in dec.k_bands)
    n2 = a.l2_norm() ** 2
    assert 0.5 * n2 <= s <= n2 * (1 + 1e-12)


def test_split_hh_ll(g32):
    u = gen_random_bandlimited(3, g32)
    hh, ll = split_hh_ll(u)
    assert np.max(np.abs(hh.coeffs + ll.coeffs - u.coeffs)) < 1e-12
    assert hh.divergence_residual() < 1e-10 and ll.divergence_residual() < 1e-10
    assert np.max(np.abs(ll_part(u).coeffs - ll.coeffs)) < 1e-10


def test_split_dominant_spectra(g32):
    dec = decomposition_for(g32)
    hdom = gen_random_bandlimited(4, g32, h_bands=(3, dec.k_range[1]), v_bands=(-1, 0))
    hh, ll = split_hh_ll(hdom)
    assert ll.l2_norm() < 1e-12 * hdom.l2_norm()
    g = g32
    c = np.zeros((3,) + g.shape, complex)
    c[0, 0, 0, 8] = c[0, 0, 0, -8] = 1.0
    vdom = VectorField(g, c)
    hh, ll = split_hh_ll(vdom)
    assert hh.l2_norm() < 1e-12


def test_custom_decomposition_ranges(g32):
    dec = DyadicDecomposition(g32, k_range=(0, 2))
    assert list(dec.k_bands) == [0, 1, 2]
