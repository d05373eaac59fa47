import numpy as np
import pytest

from ansflow.checks import convolution_oracle, dft_oracle, mixed_norm_oracle
from ansflow.nonlinear import convect
from ansflow.spectral import (Grid, SpectralField, Trajectory, VectorField, dealias,
                              forward_transform, forward_vector, leray_project, mixed_norm,
                              partial_derivative)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(7, 8, 8)
    with pytest.raises(ValueError):
        Grid(6, 8, 8)
    with pytest.raises(ValueError):
        Grid(8, 8, 8, L1=0.0)
    g = Grid.planar(16)
    assert g.is_planar and g.shape == (16, 16, 1)


def test_wavenumbers_follow_box():
    g = Grid(8, 8, 8, L1=np.pi)
    assert np.allclose(sorted(g.wavenumbers[0]), 2 * np.arange(-4, 4))
    assert np.allclose(sorted(g.wavenumbers[1]), np.arange(-4, 4))


def test_constant_field_is_dc(g16):
    f = forward_transform(np.full(g16.shape, 3.0), g16)
    assert f.coeffs[0, 0, 0] == pytest.approx(3.0)
    f.coeffs[0, 0, 0] = 0
    assert np.max(np.abs(f.coeffs)) < 1e-14


def test_sine_single_mode(g16):
    x1, _, _ = g16.coordinates()
    f = forward_transform(np.sin(x1) + np.zeros(g16.shape), g16)
    assert f.coeffs[1, 0, 0] == pytest.approx(-0.5j)
    assert f.coeffs[-1, 0, 0] == pytest.approx(0.5j)
    c = f.coeffs.copy()
    c[1, 0, 0] = c[-1, 0, 0] = 0
    assert np.max(np.abs(c)) < 1e-14


def test_round_trip_and_parseval(rng):
    g = Grid(16, 16, 16, 2.0, 3.0, 5.0)
    x = rng.standard_normal(g.shape)
    f = forward_transform(x, g)
    assert np.max(np.abs(f.to_physical() - x)) < 1e-12
    lhs = np.sum(x**2) * np.prod(g.spacing)
    rhs = np.sum(np.abs(f.coeffs) ** 2) * g.volume
    assert abs(lhs - rhs) / lhs < 1e-12


def test_fft_matches_direct_dft(rng):
    g = Grid.cube(8)
    x = rng.standard_normal(g.shape)
    c = forward_transform(x, g).coeffs
    assert np.max(np.abs(c - dft_oracle(x))) / np.max(np.abs(c)) < 1e-12


def test_shape_mismatch(g16):
    with pytest.raises(ValueError):
        forward_transform(np.zeros((8, 8, 8)), g16)


def test_derivatives(g16, rng):
    x1, _, x3 = g16.coordinates()
    f = forward_transform(np.sin(x1) + np.zeros(g16.shape), g16)
    d = partial_derivative(f, 1).to_physical()
    assert np.max(np.abs(d - np.cos(x1) + 0 * x3)) < 1e-13
    assert np.max(np.abs(partial_derivative(f, 3).coeffs)) < 1e-14
    r = forward_transform(rng.standard_normal(g16.shape), g16)
    a = partial_derivative(partial_derivative(r, 1), 2).coeffs
    b = partial_derivative(partial_derivative(r, 2), 1).coeffs
    assert np.max(np.abs(a - b)) <= 1e-15 * np.max(np.abs(a))
    with pytest.raises(ValueError):
        partial_derivative(r, 4)


def test_mixed_norm_examples(rng):
    g = Grid.cube(16)
    one = forward_transform(np.ones(g.shape), g)
    assert mixed_norm(one, 2, 2) == pytest.approx((2 * np.pi) ** 1.5, rel=1e-12)
    x1, x2, x3 = g.coordinates()
    gh = 2 + np.cos(x1) * np.sin(x2)
    hv = 1.5 + np.sin(2 * x3)
    f = forward_transform(gh * hv, g)
    dx = g.spacing
    ref = (np.sum(np.abs(gh[..., 0]) ** 4) * dx[0] * dx[1]) ** 0.25 * \
        (np.sum(np.abs(hv[0, 0]) ** 3) * dx[2]) ** (1 / 3)
    assert mixed_norm(f, 4, 3) == pytest.approx(ref, rel=1e-12)
    with pytest.raises(ValueError):
        mixed_norm(f, 0.5, 2)


def test_mixed_norm_oracle_and_parseval(rng):
    g = Grid(8, 8, 8, 1.0, 2.0, 3.0)
    x = rng.standard_normal(g.shape)
    f = forward_transform(x, g)
    ref = mixed_norm_oracle(x, g, 4, 2)
    assert abs(mixed_norm(f, 4, 2) - ref) / ref < 1e-12
    assert mixed_norm(f, 2, 2) == pytest.approx(f.l2_norm(), rel=1e-10)
    assert mixed_norm(f * -2.5, 4, 2) == pytest.approx(2.5 * mixed_norm(f, 4, 2), rel=1e-15)


def _random_vector(g, rng):
    return forward_vector(rng.standard_normal((3,) + g.shape), g)


def test_leray_properties(g16, rng):
    v, w = _random_vector(g16, rng), _random_vector(g16, rng)
    p = leray_project(v)
    assert p.divergence_residual() < 1e-10
    assert np.max(np.abs(leray_project(p).coeffs - p.coeffs)) < 1e-12
    assert abs(p.inner(w) - v.inner(leray_project(w))) < 1e-10 * abs(v.inner(w)) + 1e-10
    assert np.allclose(p.coeffs[:, 0, 0, 0], v.coeffs[:, 0, 0, 0])


def test_leray_kills_gradients(g16, rng):
    q = forward_transform(rng.standard_normal(g16.shape), g16)
    q = q.with_coeffs(q.coeffs * (g16.xi_sq > 0) * ~g16.nyquist_mask)
    grad = VectorField.from_components(*(partial_derivative(q, a) for a in (1, 2, 3)))
    assert np.max(np.abs(leray_project(grad).coeffs)) < 1e-12


def test_dealias(g16):
    c = np.zeros(g16.shape, complex)
    c[16 // 2 - 1, 0, 0] = 1
    assert not np.any(dealias(SpectralField(g16, c)).coeffs)
    c = np.zeros(g16.shape, complex)
    c[3, 2, -4] = 1
    assert np.array_equal(dealias(SpectralField(g16, c)).coeffs, c)


def test_trajectory_validation(g16):
    f = VectorField.zeros(g16)
    with pytest.raises(ValueError):
        Trajectory(np.array([0.0, 0.0]), (f, f))
    with pytest.raises(ValueError):
        Trajectory(np.array([0.0]), (f, f))
    tr = Trajectory.frozen(f, 2.0, 3)
    assert len(tr) == 3 and tr.grid == g16


def test_dealiased_product_exact_when_three_divides_n():
    # n = 12: the kept modes stop at |m| = 3 < 4 so two kept modes never alias onto one
    g = Grid.cube(12)
    assert g.mode_cutoff == (3, 3, 3)
    rng = np.random.default_rng(5)
    u, a = (dealias(forward_vector(rng.standard_normal((3,) + g.shape), g)) for _ in range(2))
    ref = convolution_oracle(u.coeffs, a.coeffs, g)
    out = convect(u, a).coeffs
    assert np.max(np.abs(out - ref)) / np.max(np.abs(ref)) < 1e-10
