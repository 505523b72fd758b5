"""mgtlab: a spectral laboratory for third-order-in-time damped acoustic
waves, their quadratic (potential-form) nonlinear variant, and the
parabolic relaxation limit.

The package is organized around exact per-mode propagation:

``params`` / ``grids`` / ``data``
    model constants, torus and radial-quadrature mode sets, initial data.
``roots`` / ``propagation`` / ``rates``
    characteristic cubics, kernel evolution for the linear flows, and
    decay-rate fitting.
``limits``
    relaxation-limit sweeps, the damped-energy inequality audit, the
    initial-layer probe and the two-scale expansion.
``nonlinear``
    dealiased exponential-integrator evolution of the quadratic flow,
    the weighted evolution norm and the small-data study.
``exponents``
    exact rational feasibility of the interpolation exponents behind the
    small-data argument.
``config`` / ``experiments`` / ``manifest`` / ``reporting`` / ``cli``
    archivable experiment configs, the runner, deterministic artifacts
    and SVG reports.
"""

__version__ = "0.1.0"

from .params import Params
from .grids import (Grid, SpectralField, make_grid, norm, l2_inner,
                    to_coeffs, to_values, save_field, load_field,
                    is_real_field, parse_norm_spec)
from .data import synthesize_initial_data, gaussian_profile
from .roots import (ModeRoots, solve_cubic, solve_cubic_batch,
                    asymptotic_roots, classify_regime, discriminant,
                    discriminant_band, cubic_residual, vieta_residuals)
from .propagation import (StateTrajectory, kernel_eval, kernel_weights,
                          kernel_tables, mgt_evolve, kuznetsov_evolve,
                          kuznetsov_rho, rk4_modes, mode_ode_reference)
from .rates import (dn_coefficient, expected_rate, fit_rate, RateFit,
                    band_split)
from .limits import (compatibility_defect, singular_limit_forcing,
                     energy_inequality_check, singular_limit_sweep,
                     expansion_terms, layer_probe, nonlinear_limit_probe,
                     EnergyLedger, SweepResult, ExpansionTerms, LayerReport)
from .nonlinear import (nonlinearity, jmgt_evolve,
                        kuznetsov_nonlinear_evolve, duhamel_apply,
                        xs_norm, xs_weights, smalldata_study,
                        default_tracked_norms, BlowUpError, XsSeries)
from .exponents import (gn_beta, part1_params, part2_params,
                        decay_exponent_audit, boundary, GnBeta,
                        ExponentSolution, Infeasible)

__all__ = [name for name in dir() if not name.startswith("_")]
