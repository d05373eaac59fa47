import numpy as np
import pytest

from ansflow.data import (OscillatoryDataSpec, band_mask, gen_oscillatory, gen_random_bandlimited,
                          gen_shear, modulated_profile, snapped_carrier)
from ansflow.dyadic import decomposition_for
from ansflow.spectral import Grid


def test_oscillatory_divergence_free_and_real(g32):
    u = gen_oscillatory(OscillatoryDataSpec(0.25), g32)
    assert u.real
    assert u.divergence_residual() < 1e-10
    # complex inverse transform: the imaginary residue must vanish
    phys = np.fft.ifftn(u.coeffs, axes=(1, 2, 3)) * np.prod(g32.shape)
    assert np.max(np.abs(phys.imag)) <= 1e-10 * np.max(np.abs(phys.real))
    assert not np.any(u.coeffs[0])


def test_oscillatory_carrier_and_amplitude():
    g = Grid(64, 32, 32, 2 * np.pi / 4, 2 * np.pi, 2 * np.pi)
    peak = []
    for eps in (1 / 8, 1 / 16):
        u = gen_oscillatory(OscillatoryDataSpec(eps, q_exponent=4.0), g)
        c = np.abs(u.coeffs[1]).sum(axis=(1, 2))
        peak.append(abs(g.wavenumbers[0][np.argmax(c)]))
        # amplitude eps^{-1/2} for q = 4
        assert np.max(np.abs(u.to_physical())) * eps**0.5 == pytest.approx(
            np.max(np.abs(gen_oscillatory(OscillatoryDataSpec(1 / 8), g).to_physical()))
            * (1 / 8) ** 0.5, rel=0.2)
    assert peak[1] == pytest.approx(2 * peak[0], abs=3)
    assert snapped_carrier(1 / 16, g) == 16.0


def test_oscillatory_unresolvable(g16):
    with pytest.raises(ValueError):
        gen_oscillatory(OscillatoryDataSpec(1 / 64), g16)
    with pytest.raises(ValueError):
        OscillatoryDataSpec(0.0)
    with pytest.raises(ValueError):
        OscillatoryDataSpec(0.1, q_exponent=1.0)


def test_random_deterministic_and_banded(g32):
    a = gen_random_bandlimited(7, g32, h_bands=(1, 2), v_bands=(0, 1), amplitude=0.5)
    b = gen_random_bandlimited(7, g32, h_bands=(1, 2), v_bands=(0, 1), amplitude=0.5)
    assert np.array_equal(a.coeffs, b.coeffs)
    assert not np.array_equal(a.coeffs, gen_random_bandlimited(8, g32).coeffs)
    assert a.divergence_residual() < 1e-10
    rms = a.l2_norm() / np.sqrt(g32.volume)
    assert rms == pytest.approx(0.5, rel=1e-12)
    outside = a.coeffs * (band_mask(g32, (1, 2), (0, 1)) == 0)
    assert np.max(np.abs(outside)) == 0
    dec = decomposition_for(g32)
    assert np.linalg.norm(a.coeffs * dec.h_mask(1)) > 0
    assert np.linalg.norm(a.coeffs * dec.h_mask(2)) > 0


def test_random_empty_band_raises(g16):
    with pytest.raises(ValueError):
        gen_random_bandlimited(0, g16, h_bands=(9, 9))


def test_shear(g16):
    s = gen_shear(g16, 2.0, 3)
    phys = s.to_physical()
    x1 = g16.coordinates()[0]
    assert np.allclose(phys[1], 2.0 * np.sin(3 * x1))
    assert np.max(np.abs(phys[0])) == 0 and np.max(np.abs(phys[2])) == 0


def test_modulated_profile_planar():
    g = Grid.planar(128)
    f = modulated_profile(1 / 8, g)
    assert not f.real
    with pytest.raises(ValueError):
        modulated_profile(1 / 8, Grid.cube(16))
