"""Simulation and spectral analysis of a geometric pointing-and-spin
tracking controller for a fast-spinning rigid body.

The package covers the closed-loop dynamics on SO(3) x R^3, smooth
reference maneuvers, a Lie-group integrator for forward/backward flows,
the coordinate-free linearization at the two closed-loop equilibria, the
eigen-structure and nutation-frequency analysis built on it, and flow
exploration near the stable manifold of the antipodal saddle.
"""

from .dynamics import (BodyState, GainSet, PlantParams, ReferenceSample,
                       attitude_error, closed_loop_field, control_torque,
                       equilibria, error_rates, lyapunov_value,
                       open_loop_field, pointing_error, rate_error,
                       sliding_vector)
from .flows import (ConvergenceVerdict, SeedSpec, antipodal_frame,
                    convergence_check, distance_metric, run_flow_batch,
                    seeds_desired, seeds_saddle)
from .geometry import (hat, half_turn, project_tangent, reorthonormalize,
                       rodrigues_exp, so3_exp, vee)
from .integrator import FlowTrace, IntegratorConfig, flow, flow_batch, step
from .linearization import (LinearizedSystem, assemble_A, constraint_row,
                            fd_jacobian, nullspace_basis, perturbed_errors)
from .config import RunConfig, config_hash, load_config
from .simulate import run_maneuver
from .spectral import (EigenStructure, Euler313, ModalCoefficients,
                       classify_equilibrium, eig6, euler313_extract,
                       euler313_rotation, euler_rates, fft_peak,
                       linearized_solution, modal_coefficients,
                       nutation_freq_estimate, nutation_rate_reconstruction)
from .trajectory import (ManeuverSegment, ReferenceTrajectory,
                         TrajectoryConfig, default_pointing_maneuver,
                         min_snap_profile, reference_at)
from .traceio import read_trace, write_trace

__version__ = "0.1.0"
