"""ifsdim: iterated function systems with place-dependent probabilities.

Simulation (chaos game, transfer-operator grids), ergodic estimation
(Lyapunov exponent, entropy, their dimension ratio), dimension measurement
of empirical invariant measures, and open-set-condition checkers.
"""

from .catalog import (NamedSystem, cantor_system, decade_band_dimension,
                      decade_band_system, expanding_pair_system,
                      half_pair_system, named_system, p1_threshold,
                      quarter_pair_system, similitude_system)
from .dimension import (CoverReport, DimensionSummary, FrostmanReport,
                        LocalDimEstimate, ball_mass, cover_upper_bound,
                        frostman_check, local_dimension, measure_dimension)
from .estimators import (TailReport, deviation_diagnostic, dimension_ratio,
                         entropy_rate, log_moment, lyapunov_exponent)
from .geometry import OpenSet, OscReport, check_osc, check_rosc, check_sosc
from .maps import (Affine1D, AffineND, Moebius2D, PiecewiseAffine1D,
                   ScalarConformalND, finite_diff_deriv_norm)
from .model import (ConstantField, GaussianWeight, IfsSystem, MarginEstimate,
                    SmoothField, ValidationReport, average_contraction_margin,
                    validate_system)
from .simulate import (EmpiricalMeasure, GridMeasure, Trajectory, chaos_game,
                       chaos_game_many, empirical_measure, merge_measures,
                       transfer_iterate_1d)
from .stats import EstimateWithError
from .words import (CodingResult, FixedStream, PrependedStream, RandomStream,
                    SymbolStream, coding_map, compose_backward,
                    compose_forward, cylinder_measure_minus,
                    cylinder_measure_plus, image_diameter, parse_word,
                    format_word, word_probability)

__version__ = "0.1.0"
