"""Lyapunov minimizing measures of expanding circle maps.

Build a bump perturbation that makes a chosen periodic orbit the unique
Lyapunov minimizing measure, and check that conclusion numerically on a
neighbourhood of the perturbed map.
"""

from .circle_map import (BumpLayer, ExpandingMap, ExpansionProfile, TrigLift,
                         circle_distance, doubling_map, evaluate, expansion_profile,
                         preimages, trig_map)
from .config import DEFAULT_TOL, Tolerances
from .conjugacy import (conjugacy_map, conjugacy_point, continue_orbit, itinerary)
from .errors import *  # noqa: F401,F403
from .orbits import (OrbitCatalog, PeriodicOrbit, enumerate_periodic_orbits, escape_time,
                     lyapunov_average, orbit_gap, select_large_gap_orbit)
from .perturbation import (ConstantsLedger, PerturbationPlan, assemble_plan, build_bump,
                           choose_constants, choose_eps0, mollify_bump, solve_gamma)
from .subaction import (GridFunction, SubAction, coboundary_F, lax_oleinik_step,
                        minimizing_set, solve_subaction)
from .verifier import (VerificationReport, certify_unique_minimizer, check_far_region,
                       check_sum_positivity, sample_perturbation_ball, verify)

__version__ = "0.1.0"
