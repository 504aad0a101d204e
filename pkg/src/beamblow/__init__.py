"""Numerical laboratory for finite-time blow-up in a damped extensible
beam equation with a degenerate Kirchhoff stiffness, nonlinear velocity
damping and a focusing source, on clamped intervals and squares.

The package discretizes the model, evaluates the variational constants
and certificate chains that classify initial data, constructs data at
prescribed energy levels, integrates the flow through blow-up, and
checks the certified bound sandwich against the observed blow-up time.
"""

from .bounds import (BoundReport, LowerBounds, Thm31Chain, Thm32Chain,
                     Thm33Chain, Thm34Result, Thm35Result, full_report,
                     growth_functional, growth_series, report_items,
                     report_lines, summary_row, thm31_check,
                     thm31_constants, thm32_upper, thm33_upper, thm34_lower,
                     thm35_lower)
from .config import (RunConfig, SweepConfig, parse_config,
                     parse_sweep_config, serialize_config)
from .dynamics import (DEFAULT_THRESHOLDS, BlowupEstimate, StepControls,
                       Trajectory, adapt_dt, damping_flow, detect_blowup,
                       simulate)
from .errors import (BeamblowError, ConfigError, ConstructionFailure,
                     ConvergenceFailure, SolverFailure)
from .functionals import (FunctionalSnapshot, ModelParams, classify,
                          damping_term, dissipation_rate, energy_E,
                          kirchhoff, lemma21_verdict, nehari_I,
                          nehari_from_parts, potential_J,
                          potential_from_parts, snapshot, source_term)
from .harness import (SuiteResult, VerifyReport, run, sweep, verify,
                      write_artifacts)
from .mesh import (Grid, apply_biharmonic, apply_laplacian,
                   biharmonic_matrix, grad_norm_sq, inner, lap_norm_sq,
                   laplacian_matrix, make_grid, max_norm, norm_l2, norm_lq)
from .scenarios import (InitialData, PRESET_NAMES, chi,
                        construct_energy_level, eigen_pair_basis, preset)
from .spectra import (VariationalConstants, compute_constants,
                      embedding_constant, smallest_eigen, well_depth)

__all__ = [name for name in dir() if not name.startswith("_")]
