"""Numerical tolerances shared by all modules."""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    residual: float = 1e-12          # |T(x) - y| for preimages and orbit points
    derivative_check: float = 1e-5   # relative, analytic vs finite-difference DT
    orbit_closure: float = 1e-10
    conjugacy: float = 1e-8
    boundary: float = 1e-12          # itinerary arc-boundary ambiguity band
    membership: float = 1e-13        # point counts as lying on an orbit
    invariance_E: float = 1e-3       # forward invariance of a sampled set E
    dedupe: float = 1e-9             # two periodic points are the same
    newton_max_iter: int = 100
    newton_bisect_after: int = 50


DEFAULT_TOL = Tolerances()
