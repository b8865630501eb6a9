"""The explicit bump perturbation that makes one periodic orbit the unique minimizer.

Given ``T``, a sub-action ``f`` and a budget ``ε``, pick constants
``K, L, ρ, C``, a periodic orbit ``Γ_T`` with large gap ``G*`` relative to
its distance ``d_*`` from the minimizing set, solve for the weights ``γ_i``
and add the odd cubic bumps ``h`` centred on ``Γ_T``. The resulting
``S₀ = T + h`` agrees with ``T`` on ``Γ_T`` and lowers ``log DS₀`` there by
exactly ``t = ε ρ G*/K⁴``.
"""

from __future__ import annotations

import dataclasses
import hashlib
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .circle_map import BumpLayer, expansion_profile
from .errors import (ConstantsOverflow, GammaOutOfRange, Infeasible, PlanInvalid)
from .orbits import (distance_to_set, enumerate_periodic_orbits, orbit_gap,
                     select_large_gap_orbit)
from .subaction import coboundary_F, minimizing_set, orbit_alpha, solve_subaction

REGIMES = ("paper", "practical")
#: inequalities the verifier relies on in the practical regime
PRACTICAL_REQUIRED = ("K.expansion", "K.floor", "K.lipschitz", "K.ratio", "choose-rho",
                      "important-estimate", "choice-epsilon-0", "third-condition-epsilon-0",
                      "eps0-range", "eps-tilde-range", "gamma-range")
LOG_FLOAT_MAX = 700.0


@dataclass(frozen=True)
class Check:
    name: str
    lhs: float
    rhs: float
    holds: bool


@dataclass(frozen=True)
class ConstantsLedger:
    """Every constant of the construction plus the map data used to fix ``K``."""

    epsilon: float
    K: float
    L: int
    rho: float
    C_big: float
    regime: str = "practical"
    lip_f: float = 0.0
    min_deriv: float = math.nan
    max_deriv: float = math.nan
    lip_deriv: float = 0.0
    G_star: float = math.nan
    d_star: float = math.nan
    tau: int = 0
    eps0_tilde: float = math.nan
    eps_tilde: float = math.nan
    gammas: tuple = ()

    @property
    def t(self):
        """The exact drop ``ε ρ G*/K⁴`` of ``log DS₀`` on the orbit."""
        return self.epsilon * self.rho * self.G_star / self.K ** 4

    @property
    def c_max(self):
        """Largest derivative drop ``ε ρ G*/(2K)``, reached at ``γ = 1``."""
        return self.epsilon * self.rho * self.G_star / (2.0 * self.K)

    @property
    def half_width(self):
        return self.rho * self.G_star

    @property
    def r_inner(self):
        return self.rho * self.G_star + self.eps0_tilde

    @property
    def r_outer(self):
        return self.r_inner * self.K ** self.L

    @property
    def positivity_constant(self):
        """``ε ρ G*/K⁴ - K d_* - 2 ε̃₀ K``, the far-region lower bound."""
        return self.t - self.K * self.d_star - 2.0 * self.eps0_tilde * self.K

    def checks(self):
        """Evaluate every inequality of the construction literally."""
        K, L, eps, rho, C = self.K, self.L, self.epsilon, self.rho, self.C_big
        G, d, e0, tau = self.G_star, self.d_star, self.eps0_tilde, self.tau
        lam, mx = self.min_deriv, self.max_deriv
        KL = K ** L
        out = [
            Check("K.expansion", K, 2.0 * mx, K > 2.0 * mx),
            Check("K.floor", K, 10.0, K > 10.0),
            Check("K.lipschitz", K, self.lip_f * (mx + 1.0) + self.lip_deriv,
                  K > self.lip_f * (mx + 1.0) + self.lip_deriv),
            Check("K.ratio", K, lam / (lam - 1.0), K > lam / (lam - 1.0)),
            Check("choose-L", L * eps, 4.0 * K ** 6, L * eps > 4.0 * K ** 6),
            Check("choose-rho", rho * KL, 1.0 / (2.0 * K), rho * KL < 1.0 / (2.0 * K)),
            Check("choose-C-second", eps * rho * C, 6.0 * K ** 5, eps * rho * C > 6.0 * K ** 5),
            Check("relationship-constants", L * eps * rho * C / K ** 4,
                  3.0 * K + rho * C * K * K,
                  L * eps * rho * C / K ** 4 > 3.0 * K + rho * C * K * K),
        ]
        if not math.isnan(G):
            out.append(Check("important-estimate", G, C * d, G > C * d))
        if not math.isnan(e0):
            out.extend(_eps0_checks(self, e0))
            out.append(Check("eps0-range", e0, eps / 2.0, 0.0 < e0 < eps / 2.0))
            out.append(Check("eps-tilde-range", self.eps_tilde, e0,
                             0.0 < self.eps_tilde < e0))
        if self.gammas:
            g = np.asarray(self.gammas)
            out.append(Check("gamma-range", float(g.min()), float(g.max()),
                             bool(np.all((g > 0.0) & (g <= 1.0)))))
        return out

    def required(self):
        names = [c.name for c in self.checks()]
        return tuple(names) if self.regime == "paper" else PRACTICAL_REQUIRED

    def relaxed(self):
        """Names of inequalities that fail but are not required in this regime."""
        req = set(self.required())
        return tuple(c.name for c in self.checks() if not c.holds and c.name not in req)

    def violations(self):
        req = set(self.required())
        return tuple(c.name for c in self.checks() if not c.holds and c.name in req)

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["gammas"] = list(self.gammas)
        d["t"] = self.t if not math.isnan(self.G_star) else None
        return d


def _eps0_checks(ledger, e0):
    K, L, G, d, tau = ledger.K, ledger.L, ledger.G_star, ledger.d_star, ledger.tau
    rho, t = ledger.rho, ledger.t
    pos = t - K * d - 2.0 * e0 * K
    lhs1 = (rho * G + e0) * K ** L
    rhs1 = (G - 2.0 * e0) / (2.0 * K)
    lhs2 = L * pos
    rhs2 = (rho * G + e0) * K * K + tau * (4.0 * e0 * K + 2.0 * K * d / max(tau, 1))
    return [
        Check("choice-epsilon-0", lhs1, rhs1, lhs1 < rhs1),
        Check("second-choice-epsilon-0", lhs2, rhs2, lhs2 > rhs2),
        Check("third-condition-epsilon-0", pos, 0.0, pos > 0.0),
    ]


def choose_constants(m, sub, epsilon, regime="practical", L=None, rho=None, C_big=None,
                     profile=None):
    """Fix ``K, L, ρ, C`` (the remaining ledger fields are filled later).

    In the paper regime ``L = ceil(4K⁶/ε) + 1`` and ``ρ = K^{-L}/(4K)``; for
    any admissible ``K >= 10`` this leaves the double range and raises
    :class:`ConstantsOverflow`. The practical regime defaults to ``L = 1``
    and ``ρ = 1/(4K^{L+1})`` and accepts overrides for ``L``, ``ρ`` and ``C``.
    """
    if regime not in REGIMES:
        raise ValueError(f"regime must be one of {REGIMES}")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    prof = profile or expansion_profile(m)
    lam, mx = prof.min_deriv, prof.max_deriv
    lip_f = sub.lip_f if sub is not None else 0.0
    K = 1.01 * max(2.0 * mx, 10.0, lip_f * (mx + 1.0) + prof.lip_deriv, lam / (lam - 1.0))
    if regime == "paper":
        L = int(math.ceil(4.0 * K ** 6 / epsilon)) + 1
        if L * math.log(K) > LOG_FLOAT_MAX:
            raise ConstantsOverflow(
                f"K^L = {K:.4g}^{L} exceeds the floating range; use the practical regime",
                K=K, L=L, log_KL=L * math.log(K))
        rho = 0.5 * K ** (-L) / (2.0 * K)
        C_big = 6.0 * K ** 5 / (epsilon * rho) * 1.01
    else:
        L = 1 if L is None else int(L)
        if L < 1:
            raise ValueError("L must be a positive integer")
        if L * math.log(K) > LOG_FLOAT_MAX:
            raise ConstantsOverflow(f"K^L overflows for L = {L}", K=K, L=L)
        rho = 1.0 / (4.0 * K ** (L + 1)) if rho is None else float(rho)
        C_big = 6.0 * K ** 5 / (epsilon * rho) * 1.01 if C_big is None else float(C_big)
    ledger = ConstantsLedger(epsilon=float(epsilon), K=K, L=L, rho=rho, C_big=C_big,
                             regime=regime, lip_f=lip_f, min_deriv=lam, max_deriv=mx,
                             lip_deriv=prof.lip_deriv)
    bad = [c.name for c in ledger.checks()
           if not c.holds and (regime == "paper" or c.name in PRACTICAL_REQUIRED)]
    if bad:
        raise Infeasible(f"constants violate {bad}", violated=bad)
    return ledger


def choose_eps0(ledger, G_star, d_star, tau):
    """Largest dyadic ``(ε/4)·2^-j`` meeting the required ``ε̃₀`` inequalities.

    Returns the ledger with ``G*, d_*, τ, ε̃₀`` and ``ε̃ = ε̃₀/2`` filled in.
    """
    if not G_star > ledger.C_big * d_star:
        raise ValueError(f"G* = {G_star:.6g} must exceed C*d_* = {ledger.C_big * d_star:.6g}")
    base = dataclasses.replace(ledger, G_star=float(G_star), d_star=float(d_star), tau=int(tau))
    need = {"choice-epsilon-0", "third-condition-epsilon-0"}
    if ledger.regime == "paper":
        need.add("second-choice-epsilon-0")
    for j in range(201):
        e0 = ledger.epsilon / 4.0 * 2.0 ** (-j)
        if all(c.holds for c in _eps0_checks(base, e0) if c.name in need):
            return dataclasses.replace(base, eps0_tilde=e0, eps_tilde=e0 / 2.0)
    raise Infeasible("no dyadic eps0 with j <= 200 satisfies the constraints",
                     need=sorted(need))


def solve_gamma(a, ledger, G_star=None):
    """Weight ``γ`` with ``∫_{a-γ c_max}^{a} dz/z = t``, in closed form."""
    if not a > 1.0:
        raise ValueError("a = DT(p) must exceed 1")
    G = ledger.G_star if G_star is None else G_star
    t = ledger.epsilon * ledger.rho * G / ledger.K ** 4
    c_max = ledger.epsilon * ledger.rho * G / (2.0 * ledger.K)
    gamma = a * -math.expm1(-t) / c_max
    if not 0.0 < gamma <= 1.0:
        raise GammaOutOfRange(f"gamma = {gamma:.6g} outside (0, 1]", gamma=gamma, a=a)
    return gamma


def build_bump(orbit, ledger, m=None):
    """Cubic bump layer of half-width ``ρ G*`` centred on the orbit points."""
    w = ledger.half_width
    if not w < ledger.G_star / 2.0:
        raise ValueError("half-width must be below G*/2")
    gammas = ledger.gammas
    if not gammas:
        if m is None:
            raise ValueError("either ledger.gammas or the map is needed")
        gammas = tuple(solve_gamma(float(a), ledger) for a in m.deriv(orbit.as_array()))
    return BumpLayer(centers=orbit.points, half_width=w, gammas=tuple(gammas),
                     amplitude_scale=ledger.epsilon / (2.0 * ledger.K * w))


def mollify_bump(bump, delta):
    """The moving average of ``bump`` over ``[-δ, δ]`` as a new layer."""
    if not 0.0 < delta < bump.half_width / 4.0:
        raise ValueError("delta must lie in (0, half_width/4)")
    return dataclasses.replace(bump, kind="mollified", mollify_delta=float(delta))


def bump_checks(bump, ledger):
    """Residuals of the defining properties of a raw bump layer.

    Equalities are reported as absolute residuals; the three norms are
    reported as values to compare against ``ε/2``.
    """
    w = bump.half_width
    p = np.asarray(bump.centers)
    res = {}
    vals = bump.derivs(np.concatenate([p, p + w, p - w]), 1)
    res["h_at_centers"] = float(np.max(np.abs(vals[0][: p.size])))
    res["h_at_edges"] = float(np.max(np.abs(vals[0][p.size:])))
    res["Dh_at_edges"] = float(np.max(np.abs(vals[1][p.size:])))
    want = -np.asarray(bump.gammas) * ledger.epsilon * ledger.rho * ledger.G_star / (2.0 * ledger.K)
    res["Dh_at_centers"] = float(np.max(np.abs(vals[1][: p.size] - want)))
    sup_h, sup_dh, lip = bump.bounds()
    s = np.linspace(-1.5 * w, 1.5 * w, 20001)
    grid = bump.derivs(np.concatenate([c + s for c in p]), 2)
    res["sup_h"] = max(sup_h, float(np.max(np.abs(grid[0]))))
    res["sup_Dh"] = max(sup_dh, float(np.max(np.abs(grid[1]))))
    res["lip_Dh"] = max(lip, float(np.max(np.abs(grid[2]))))
    res["C11_distance"] = res["sup_h"] + res["sup_Dh"] + res["lip_Dh"]
    res["half_epsilon"] = ledger.epsilon / 2.0
    return res


@dataclass(frozen=True)
class PerturbationPlan:
    base_map: object
    orbit: object
    ledger: ConstantsLedger
    bump: BumpLayer
    perturbed_map: object
    subaction: object
    mollified_bump: BumpLayer = None
    mollified_map: object = None
    E_size: int = 0
    identity_residual: float = math.nan
    properties: dict = field(default_factory=dict)

    @property
    def regime(self):
        return self.ledger.regime

    @property
    def plan_id(self):
        key = f"{self.base_map.map_id}:{self.perturbed_map.map_id}:{self.ledger.epsilon!r}"
        return hashlib.sha256(key.encode()).hexdigest()[:16]

    def A_S0(self):
        """Orbit average of ``F_{S₀}`` over ``Γ_T``."""
        return float(np.mean(coboundary_F(self.perturbed_map, self.subaction.f,
                                          self.orbit.as_array())))


def default_orbit_period(degree):
    """Largest period ``<= 14`` whose word count stays below 2**16."""
    return min(14, int(math.floor(16 * math.log(2) / math.log(degree))))


def assemble_plan(m, epsilon, regime="practical", *, L=None, rho=None, C_big=None,
                  C_select=None, grid_n=2 ** 14, max_period=12, slack=1e-6,
                  mollify=False, delta=None, subaction=None, orbit_period=None):
    """Run the whole construction and return a :class:`PerturbationPlan`.

    The minimizing set ``E`` is the grid slice ``{F <= α + slack}`` together
    with the orbit attaining the catalog minimum, which keeps ``d_* = 0``
    available even when the grid misses that orbit.
    """
    prof = expansion_profile(m)
    op = orbit_period or default_orbit_period(m.degree)
    sub = subaction or solve_subaction(m, grid_n, orbit_period=op)
    E = minimizing_set(m, sub, slack)
    _, a_orbit = orbit_alpha(m, op)
    E = np.concatenate([E, a_orbit.as_array()])
    ledger = choose_constants(m, sub, epsilon, regime, L=L, rho=rho, C_big=C_big, profile=prof)
    C = ledger.C_big if C_select is None else float(C_select)
    catalog = enumerate_periodic_orbits(m, max_period)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        orbit = select_large_gap_orbit(m, E, C, max_period, catalog=catalog)
    G = orbit_gap(m, orbit)
    d = float(distance_to_set(orbit.as_array(), E).sum())
    ledger = choose_eps0(ledger, G, d, orbit.period)
    gammas = tuple(solve_gamma(float(a), ledger) for a in m.deriv(orbit.as_array()))
    ledger = dataclasses.replace(ledger, gammas=gammas)
    bad = ledger.violations()
    if bad:
        raise Infeasible(f"ledger violates {list(bad)}", violated=list(bad))
    bump = build_bump(orbit, ledger)
    S0 = m.with_layer(bump)
    expansion_profile(S0)
    pts = orbit.as_array()
    diff = coboundary_F(S0, sub.f, pts) - coboundary_F(m, sub.f, pts)
    resid = float(np.max(np.abs(diff + ledger.t)))
    if resid > 1e-10:
        raise PlanInvalid(f"F_S0 - F_T misses -t by {resid:.3g} on the orbit", residual=resid)
    moll = mmap = None
    if mollify:
        moll = mollify_bump(bump, delta if delta is not None else bump.half_width / 8.0)
        mmap = m.with_layer(moll)
    props = bump_checks(bump, ledger)
    props["orbit_fixed"] = float(np.max(np.abs(S0.lift(pts) - m.lift(pts))))
    props["relaxed"] = list(ledger.relaxed())
    return PerturbationPlan(base_map=m, orbit=orbit, ledger=ledger, bump=bump,
                            perturbed_map=S0, subaction=sub, mollified_bump=moll,
                            mollified_map=mmap, E_size=int(E.size),
                            identity_residual=resid, properties=props)
