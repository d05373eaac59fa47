"""Pseudo-spectral anisotropic Navier-Stokes and anisotropic Littlewood-Paley toolkit."""
from ansflow.data import (OscillatoryDataSpec, gen_oscillatory, gen_random_bandlimited,
                          gen_shear)
from ansflow.dyadic import (DyadicDecomposition, PartitionFunction, decomposition_for,
                            delta_h, delta_iso, delta_v, make_partition, s_h, s_v, split_hh_ll)
from ansflow.heat import (HeatFlowParams, make_uF, semigroup, verify_decay_lemma24,
                          verify_linf_l2_lemma25)
from ansflow.nonlinear import (EFunctionalReport, bony_vertical_split, convect, e_functional,
                               forcing_norm_L1T_B012, trilinear_Fj, trilinear_Gj,
                               trilinear_diagnostics)
from ansflow.norms import (BesovParams, b_neg1_inf_q, besov_b012, besov_static, calB_norm,
                           calH_norm, h0s_norm, osgood_mu, prop1_norms)
from ansflow.accumulator import NormAccumulator
from ansflow.solver import (RunRecord, SolverConfig, continuous_dependence_run,
                            friedrichs_projectors, solve_u, solve_w)
from ansflow.spectral import (Grid, SpectralField, Trajectory, VectorField, dealias,
                              forward_transform, forward_vector, leray_project, mixed_norm,
                              partial_derivative)

__version__ = "0.1.0"
