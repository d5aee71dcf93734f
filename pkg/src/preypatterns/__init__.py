"""Pattern selection for a nonlocal prey-predator model with hunting cooperation.

Analytic pipeline (equilibria, temporal bifurcations, Turing threshold,
amplitude-equation coefficients) plus a periodic 2-D simulator and a spectral
pattern classifier that verify the analytic predictions.
"""

__version__ = "0.1.0"

from .amplitude import (AmplitudeState, BranchKind, ModeTrajectory, PatternBranch,
                        PatternTarget, WnaCoefficients, classify_branches,
                        hexagon_amplitudes, integrate_modes, mode_rhs, mu_of,
                        mu_thresholds, wna_coefficients)
from .analysis import (ClassifierThresholds, PatternClass, SpectralSummary,
                       classify_pattern, cross_correlation, measured_wavenumber_check,
                       spectral_summary)
from .dispersion import (LinearizationCoefficients, TuringPoint, WaveSample,
                         dispersion_sample, dispersion_scan, kernel_fourier,
                         linearization, turing_curve, turing_threshold)
from .errors import ConfigError, NoTuringBifurcation, NumericalError
from .model import (Equilibrium, EquilibriumKind, JacobianSummary, ModelParams,
                    Stability, SurfacePoint, SurfaceScan, TemporalThresholds,
                    axial_equilibrium, bifurcation_surface_scan, bt_point,
                    classify_equilibrium, coexistence_equilibria, hopf_threshold,
                    jacobian_summary, nullclines, reaction_rates, saddle_node_threshold,
                    solve_hopf, solve_saddle_node, stable_coexistence,
                    temporal_thresholds, trivial_equilibrium)
from .simulate import (ConvolutionPath, FieldPair, Grid2D, SimConfig, SimResult,
                       SnapshotSeries, convolve_periodic, default_grid,
                       initial_condition, laplacian_periodic, run_to_steady, step_euler)
