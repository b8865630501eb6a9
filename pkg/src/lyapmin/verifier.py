"""Numerical certification that ``δ_{Γ_S}`` is the unique Lyapunov minimizer.

For a map ``S`` near the perturbed ``S₀`` of a plan, the normalized
coboundary is ``F̃_S = F_S - A_{Γ_S}`` where ``F_S = f∘S - f + log DS``
(``f`` the sub-action of the base map) and ``A_{Γ_S}`` is its average over
the continued orbit ``Γ_S``. The checks are

* far region: ``F̃_S > 0`` on grid points farther than ``ρ G*`` from ``Γ_T``;
* sum positivity: Birkhoff sums of ``F̃_S`` along excursions from ``Γ_S``
  are positive;
* orbit comparison: ``Γ_S`` has the strictly smallest Lyapunov average
  among all periodic orbits up to a period budget;
* ergodic spot-check: long random-start Birkhoff averages of ``F̃_S`` are
  positive.

The last two together are a finite surrogate for the statement about all
invariant measures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circle_map import circle_distance, expansion_profile, wrap
from .config import DEFAULT_TOL
from .conjugacy import continue_orbit, conjugacy_map, same_lift_symbols
from .errors import HorizonExceeded
from .orbits import distance_to_set, enumerate_periodic_orbits, lyapunov_average
from .subaction import coboundary_F

HORIZON = 10 ** 6
TWO_PI = 2.0 * math.pi


def sample_perturbation_ball(S0, eps_tilde, count, seed, degree=8):
    """Seeded maps ``S₀ + g`` with ``g`` a trig polynomial inside the ε̃ ball.

    With ``g = c + Σ_k a_k sin 2πkx + b_k cos 2πkx`` the quantity
    ``|c| + Σ_k (1 + 2πk + 4π²k²)(|a_k| + |b_k|)`` bounds
    ``sup|g| + sup|Dg| + Lip(Dg)``. Each draw is scaled so that this bound
    equals ``r·ε̃`` with ``r`` uniform in ``[0.5, 0.95]``.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if eps_tilde < 0:
        raise ValueError("eps_tilde must be nonnegative")
    if eps_tilde == 0:
        return [S0] * count
    rng = np.random.default_rng(seed)
    k = np.arange(1, degree + 1)
    weight = 1.0 + TWO_PI * k + TWO_PI ** 2 * k * k
    out = []
    for _ in range(count):
        c = rng.uniform(-1.0, 1.0)
        a = rng.uniform(-1.0, 1.0, degree)
        b = rng.uniform(-1.0, 1.0, degree)
        norm = abs(c) + float(np.sum(weight * (np.abs(a) + np.abs(b))))
        scale = rng.uniform(0.5, 0.95) * eps_tilde / norm
        out.append(S0.add_trig(a * scale, b * scale, c * scale))
    return out


def c11_distance(S, R, grid_n=2 ** 16):
    """Grid estimate of ``sup|S-R| + sup|DS-DR| + sup|D²S-D²R|`` on lifts."""
    x = np.arange(grid_n) / grid_n
    a = S.derivs(x, 2)
    b = R.derivs(x, 2)
    return float(sum(np.max(np.abs(u - v)) for u, v in zip(a, b)))


def normalized_F(S, f, gamma_S):
    """``(F̃_S as a callable, A_{Γ_S})``."""
    A = float(np.mean(coboundary_F(S, f, gamma_S.as_array())))
    return (lambda x: coboundary_F(S, f, x) - A), A


def check_far_region(S, plan, grid_n=2 ** 16, gamma_S=None):
    """Minimum of ``F̃_S`` over grid points with ``d(x, Γ_T) > ρ G*``."""
    gamma_S = gamma_S or continue_orbit(plan.orbit, S, plan.perturbed_map)
    Ft, _ = normalized_F(S, plan.subaction.f, gamma_S)
    x = np.arange(grid_n) / grid_n
    far = distance_to_set(x, plan.orbit.as_array()) > plan.ledger.half_width
    return float(np.min(Ft(x[far])))


@dataclass(frozen=True)
class Excursion:
    x: float
    m: int
    L: int
    partial_sum: float

    @property
    def N(self):
        return self.m + self.L


def _excursions(S, Ft, gamma_S, x, r_inner, r_outer, horizon):
    pts = gamma_S.as_array()
    n = x.size
    m = np.full(n, -1)
    N = np.full(n, -1)
    sums = np.zeros(n)
    y = x.copy()
    # a start already past r₁ lies in the far region: a single-term excursion
    far = distance_to_set(x, pts) > r_inner
    m[far], N[far] = 0, 1
    if far.any():
        sums[far] = Ft(x[far])
    active = ~far
    for i in range(horizon + 1):
        idx = np.nonzero(active)[0]
        if idx.size == 0:
            break
        d = distance_to_set(y[idx], pts)
        first = (m[idx] < 0) & (d > r_inner)
        m[idx[first]] = i
        done = (m[idx] >= 0) & (d > r_outer)
        N[idx[done]] = i
        active[idx[done]] = False
        go = idx[~done]
        sums[go] += Ft(y[go])
        y[go] = S(y[go])
    return m, N, sums


def check_sum_positivity(S, plan, samples=100, seed=0, gamma_S=None, horizon=HORIZON):
    """Excursion sums ``Σ_{i<N(x)} F̃_S(S^i x)`` for seeded points near ``Γ_T``.

    Points are drawn uniformly in the bump neighbourhood ``d(x, Γ_T) <= ρG*``.
    ``m(x)`` is the first exit past ``r₁ = ρG* + ε̃₀`` from ``Γ_S`` and
    ``N(x) = m(x) + L(x)`` the first later exit past ``r₁ K^L``. A start
    already farther than ``r₁`` is a single-term excursion, ``N(x) = 1``.

    Raises
    ------
    HorizonExceeded
        Some sample did not complete its excursion within ``horizon`` steps.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    gamma_S = gamma_S or continue_orbit(plan.orbit, S, plan.perturbed_map)
    Ft, _ = normalized_F(S, plan.subaction.f, gamma_S)
    led = plan.ledger
    rng = np.random.default_rng(seed)
    centers = plan.orbit.as_array()
    which = rng.integers(0, centers.size, samples)
    off = rng.uniform(-1.0, 1.0, samples) * led.half_width
    x = wrap(centers[which] + off)
    return excursions_from(S, Ft, gamma_S, x, led.r_inner, led.r_outer, horizon)


def excursions_from(S, Ft, gamma_S, x, r_inner, r_outer, horizon=HORIZON):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    on = distance_to_set(x, gamma_S.as_array()) <= DEFAULT_TOL.membership
    if np.any(on):
        # Γ_S is invariant; float drift off it is not an escape
        bad = int(np.nonzero(on)[0][0])
        raise HorizonExceeded(f"x = {x[bad]!r} lies on the orbit and never escapes",
                              x=float(x[bad]), horizon=horizon)
    m, N, sums = _excursions(S, Ft, gamma_S, x, r_inner, r_outer, horizon)
    if np.any(N < 0):
        bad = int(np.nonzero(N < 0)[0][0])
        raise HorizonExceeded(f"no escape within {horizon} steps from x = {x[bad]!r}",
                              x=float(x[bad]), horizon=horizon)
    return [Excursion(float(a), int(b), int(c - b), float(s))
            for a, b, c, s in zip(x, m, N, sums)]


@dataclass(frozen=True)
class Certificate:
    margin: float
    unique: bool
    gamma_average: float
    runner_up: tuple
    n_orbits: int
    birkhoff: tuple = ()
    birkhoff_starts: tuple = ()
    F1_frequency: float = math.nan

    @property
    def birkhoff_min(self):
        return min(self.birkhoff) if self.birkhoff else math.nan


def _birkhoff(S, f, A, starts, steps, gamma_pts=None, r_outer=0.0):
    """Birkhoff averages of ``F̃_S`` and the visit frequency of ``d(z, Γ_S) > r_outer``."""
    x = wrap(np.array(starts, dtype=float))
    acc = np.zeros(x.size)
    visits = 0
    fx = f(x)
    for _ in range(steps):
        y, dy = S.derivs(x, 1)
        y = wrap(y)
        fy = f(y)
        acc += fy - fx + np.log(dy)
        if gamma_pts is not None:
            d = np.abs(x[:, None] - gamma_pts[None, :])
            visits += int(np.count_nonzero(np.min(np.minimum(d, 1.0 - d), axis=1) > r_outer))
        x, fx = y, fy
    return acc / steps - A, visits / (steps * x.size)


def birkhoff_averages(S, f, gamma_S, starts, steps):
    """Averages of ``F̃_S`` over ``steps`` iterates from each start."""
    _, A = normalized_F(S, f, gamma_S)
    return _birkhoff(S, f, A, starts, steps)[0]


def _match(catalog, orbit, tol=1e-9):
    pts = orbit.as_array()
    for i, o in enumerate(catalog.orbits):
        if o.period == orbit.period and np.max(distance_to_set(pts, o.as_array())) < tol:
            return i
    return None


def certify_unique_minimizer(S, gamma_S, max_period, plan=None, n_starts=32,
                             steps=10 ** 5, seed=0):
    """Compare ``Γ_S`` against every periodic orbit of period ``<= max_period``.

    ``margin`` is the smallest Lyapunov average over the other orbits minus
    that of ``Γ_S``. When a plan is given, ``n_starts`` seeded Birkhoff
    averages of ``F̃_S`` over ``steps`` iterates are also recorded, together
    with the visit frequency of ``{d(z, Γ_S) > r₁K^L}``.
    """
    catalog = enumerate_periodic_orbits(S, max_period)
    i = _match(catalog, gamma_S)
    if i is None:
        raise ValueError("gamma_S is not in the catalog of S")
    g_avg = lyapunov_average(S, gamma_S)
    others = [(lyap, o) for j, (lyap, o) in enumerate(zip(catalog.lyapunov, catalog.orbits))
              if j != i]
    best, runner = min(others, key=lambda t: t[0]) if others else (math.inf, None)
    margin = float(best - g_avg)
    runner_up = (runner.code_str, runner.period) if runner is not None else ()
    birk, starts, freq = (), (), math.nan
    if plan is not None and n_starts > 0:
        _, A = normalized_F(S, plan.subaction.f, gamma_S)
        starts = tuple(np.random.default_rng(seed).uniform(0.0, 1.0, n_starts))
        r_outer = plan.ledger.r_outer if not math.isnan(plan.ledger.eps0_tilde) else 0.0
        avgs, freq = _birkhoff(S, plan.subaction.f, A, starts, steps, gamma_S.as_array(),
                               r_outer)
        birk = tuple(float(a) for a in avgs)
    return Certificate(margin=margin, unique=margin > 0.0, gamma_average=g_avg,
                       runner_up=runner_up, n_orbits=len(catalog), birkhoff=birk,
                       birkhoff_starts=tuple(float(s) for s in starts),
                       F1_frequency=float(freq))


def lipschitz_audit(S, plan, gamma_S, grid_n=2 ** 16):
    """Measured grid Lipschitz constant of ``F̃_S`` and the bound ``Lip(f)(max DS+1)+Lip(DS)``."""
    Ft, _ = normalized_F(S, plan.subaction.f, gamma_S)
    x = np.arange(grid_n + 1) / grid_n
    measured = float(np.max(np.abs(np.diff(Ft(x)))) * grid_n)
    prof = expansion_profile(S)
    bound = plan.subaction.lip_f * (prof.max_deriv + 1.0) + prof.lip_deriv
    return measured, bound


def two_map_difference(S, R, f, grid_n=2 ** 14):
    """Grid maximum of ``|F_S - F_R|`` for a common sub-action ``f``."""
    x = np.arange(grid_n) / grid_n
    return float(np.max(np.abs(coboundary_F(S, f, x) - coboundary_F(R, f, x))))


@dataclass(frozen=True)
class VerificationReport:
    map_id: str
    plan_id: str
    regime: str
    seed: int
    far_region_margin: float
    far_region_bound: float
    sum_positivity: tuple
    minimality_margin: float
    ergodic_samples: tuple
    F1_frequency: float
    gamma_S: object
    A_gamma_S: float
    orbit_average_residual: float
    conjugacy: dict
    symbols_preserved: bool
    lipschitz: tuple
    tol: float = 1e-12
    notes: tuple = field(default_factory=tuple)

    @property
    def min_partial_sum(self):
        return min(e.partial_sum for e in self.sum_positivity)

    @property
    def birkhoff_min(self):
        return min(a for _, a in self.ergodic_samples)

    @property
    def passed(self):
        return bool(self.far_region_margin > 0.0
                    and all(e.partial_sum > 0.0 for e in self.sum_positivity)
                    and self.minimality_margin > 0.0
                    and all(a > -self.tol for _, a in self.ergodic_samples))

    def to_dict(self):
        return {
            "map_id": self.map_id,
            "plan_id": self.plan_id,
            "regime": self.regime,
            "seed": self.seed,
            "far_region_margin": self.far_region_margin,
            "far_region_bound": self.far_region_bound,
            "sum_positivity": [[e.x, e.N, e.partial_sum] for e in self.sum_positivity],
            "min_partial_sum": self.min_partial_sum,
            "minimality_margin": self.minimality_margin,
            "ergodic_samples": [[x, a] for x, a in self.ergodic_samples],
            "birkhoff_min": self.birkhoff_min,
            "F1_frequency": self.F1_frequency,
            "gamma_S": {"points": list(self.gamma_S.points), "code": self.gamma_S.code_str},
            "A_gamma_S": self.A_gamma_S,
            "orbit_average_residual": self.orbit_average_residual,
            "conjugacy": self.conjugacy,
            "symbols_preserved": self.symbols_preserved,
            "lipschitz": {"measured": self.lipschitz[0], "bound": self.lipschitz[1]},
            "notes": list(self.notes),
            "pass": self.passed,
        }


def verify(plan, S=None, samples=100, seed=0, max_period=12, grid_n=2 ** 16,
           n_starts=32, steps=10 ** 5, conjugacy_samples=1000):
    """Run every check for one map ``S`` (default ``S₀``) and build a report."""
    S = plan.perturbed_map if S is None else S
    S0 = plan.perturbed_map
    gamma_S = continue_orbit(plan.orbit, S, S0, eps0_tilde=plan.ledger.eps0_tilde)
    Ft, A = normalized_F(S, plan.subaction.f, gamma_S)
    far = check_far_region(S, plan, grid_n, gamma_S)
    exc = check_sum_positivity(S, plan, samples, seed, gamma_S)
    cert = certify_unique_minimizer(S, gamma_S, max_period, plan, n_starts, steps, seed)
    conj = conjugacy_map(S0, S, conjugacy_samples).to_dict()
    notes = []
    if plan.ledger.relaxed():
        notes.append("relaxed: " + ", ".join(plan.ledger.relaxed()))
    return VerificationReport(
        map_id=S.map_id, plan_id=plan.plan_id, regime=plan.regime, seed=seed,
        far_region_margin=far, far_region_bound=plan.ledger.positivity_constant,
        sum_positivity=tuple(exc), minimality_margin=cert.margin,
        ergodic_samples=tuple(zip(cert.birkhoff_starts, cert.birkhoff)),
        F1_frequency=cert.F1_frequency, gamma_S=gamma_S, A_gamma_S=A,
        orbit_average_residual=float(abs(np.mean(Ft(gamma_S.as_array())))),
        conjugacy=conj, symbols_preserved=same_lift_symbols(S, gamma_S, S0, plan.orbit),
        lipschitz=lipschitz_audit(S, plan, gamma_S, grid_n), notes=tuple(notes))
