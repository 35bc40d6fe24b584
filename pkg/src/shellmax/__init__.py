"""shellmax: a laboratory for harmonic analysis on finitely generated
groups of exponential growth.

The package enumerates Cayley-graph spheres for a family of group models
with geodesic normal forms, fits polynomial-exponential growth parameters
through exact recurrence detection, estimates truncated convolution
operator norms, and verifies -- exactly, at desk scale -- the counting
inequalities that connect shell correlations, the spherical coarse median
inequality, and weak-type bounds for the Hardy-Littlewood maximal
operator.
"""

__version__ = "0.1.0"

from .cayley import (GrowthFit, LayeredBall, Recurrence, coornaert_constant,
                     enumerate_ball, fit_growth, product_sphere_identity_check)
from .errors import (ConfigError, InvariantBreachError, ResourceBudgetError,
                     ShellmaxError, SpecParseError)
from .geometry import (CoarseMedianScan, InequalityReport, IntervalSphereScan,
                       SamplerConfig, SubsetPair, coarse_median_count,
                       coarse_median_scan, correlation_count, correlation_rd_ratio,
                       interval, interval_sphere_count, interval_sphere_scan,
                       median_candidates, minsum_bound_check,
                       require_exponential_growth)
from .groups import (DirectProduct, FreeGroup, FreeProductCyclic, GroupModel,
                     Raag, ZPower, parse_spec)
from .harmonic import (BallNormProbe, FiniteFunction, NormEstimate, RadialMeasure,
                       ball_measure, ball_rd_exponent_probe, cohen_pytlik_norm,
                       convolve, operator_norm_truncated, shell_measure,
                       sphere_average, sphere_measure)
from .maximal import (MaximalProfile, OrliczRecord, StrongLpProbe,
                      ball_average_table, distributional_check, dyadic_corpus,
                      maximal_function, maximal_value, orlicz_sum,
                      orlicz_weak_ratio, strong_lp_probe, weak_type_ratio)
from .prng import Lcg

__all__ = [name for name in dir() if not name.startswith("_")]
