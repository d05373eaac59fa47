"""Anisotropic Littlewood-Paley blocks and the Besov-type norms built from them."""
import numpy as np

from ansflow.data import OscillatoryDataSpec, gen_oscillatory, gen_random_bandlimited
from ansflow.dyadic import decomposition_for, make_partition, split_hh_ll
from ansflow.norms import BesovParams, besov_b012, besov_static, norm_report_rows
from ansflow.spectral import Grid

# The partition function phi is supported in (3/4, 8/3) and sums to one
# over dyadic dilations.
phi = make_partition()
tau = np.linspace(0.5, 6, 12)
print("sum_j phi(2^-j tau):", np.round(sum(phi(tau / 2.0**j) for j in range(-6, 8)), 12))

g = Grid.cube(32)
dec = decomposition_for(g)
print("horizontal bands", dec.k_range, "vertical bands", dec.l_range)

# Blocks of a random field add back up to the field.
a = gen_random_bandlimited(1, g)
rebuilt = sum(a.coeffs * dec.h_mask(k) for k in dec.k_bands) + a.coeffs * (g.xi_h == 0)
print("reconstruction error from horizontal blocks:", np.max(np.abs(rebuilt - a.coeffs)))

# hh/ll split: hh keeps the modes where the horizontal band dominates.
hh, ll = split_hh_ll(a)
print("||hh||^2 and ||ll||^2 over ||a||^2 (not orthogonal near band edges):",
      hh.l2_norm() ** 2 / a.l2_norm() ** 2, ll.l2_norm() ** 2 / a.l2_norm() ** 2)

# Norm report for one field; p enters only the static Besov norm.
for row in norm_report_rows(a, BesovParams(4.0, 1.0, 0.1)):
    print(f"{row[0]:>16s} {row[4]:.6g}")

# Oscillatory data: the B^{-1/2,1/2}_4 norm stays flat as epsilon shrinks,
# while B^{0,1/2} grows like the carrier frequency to the power 1/2.
g = Grid(64, 16, 16, 2 * np.pi / 4, 2 * np.pi, 2 * np.pi)
for eps in (1 / 4, 1 / 8, 1 / 16, 1 / 32):
    u = gen_oscillatory(OscillatoryDataSpec(eps), g)
    print(f"eps={eps:<8g} B4={besov_static(u, 4.0):8.4f}  B012={besov_b012(u):8.4f}")
