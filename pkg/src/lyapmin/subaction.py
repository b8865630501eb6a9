"""Sub-actions by min-plus (Lax-Oleinik) value iteration on a uniform grid.

With ``φ = log DT`` the operator is

    (L u)(x) = min_{T y = x} [u(y) + φ(y)] - α,

and a fixed point ``u = L u`` gives ``u(T y) <= u(y) + φ(y) - α`` for every
``y``. The sub-action is ``f = -u``, for which
``F = f∘T - f + φ >= α`` with equality along calibrated (minimizing) orbits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .circle_map import preimages, wrap
from .errors import EmptySet, NonConvergence
from .orbits import enumerate_periodic_orbits


@dataclass(frozen=True)
class GridFunction:
    """Values at ``j/n``, extended to the circle by linear interpolation."""

    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise ValueError("values must be a 1-d array with at least 2 entries")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self):
        return self.values.size

    @property
    def grid(self):
        return np.arange(self.n) / self.n

    def __call__(self, x):
        i0, i1, t = _interp_weights(np.asarray(x, dtype=float), self.n)
        return (1.0 - t) * self.values[i0] + t * self.values[i1]

    def lip(self):
        v = self.values
        return float(np.max(np.abs(np.diff(np.append(v, v[0])))) * self.n)

    def __add__(self, c):
        return GridFunction(self.values + c)

    def __neg__(self):
        return GridFunction(-self.values)


def _interp_weights(x, n):
    s = wrap(x) * n
    fl = np.floor(s)
    i0 = fl.astype(np.int64) % n
    return i0, (i0 + 1) % n, s - fl


@dataclass(frozen=True)
class _GridData:
    n: int
    pre: np.ndarray
    phi_pre: np.ndarray
    i0: np.ndarray
    i1: np.ndarray
    t: np.ndarray


@lru_cache(maxsize=16)
def _grid_data(m, n):
    x = np.arange(n) / n
    pre = preimages(m, x)
    phi_pre = np.log(m.deriv(pre))
    i0, i1, t = _interp_weights(pre, n)
    for a in (pre, phi_pre, i0, i1, t):
        a.setflags(write=False)
    return _GridData(n, pre, phi_pre, i0, i1, t)


def _apply(g, u, alpha=0.0):
    cand = (1.0 - g.t) * u[g.i0] + g.t * u[g.i1] + g.phi_pre
    # argmin returns the first minimum, i.e. the smallest preimage
    k = np.argmin(cand, axis=1)
    return cand[np.arange(g.n), k] - alpha, k


def lax_oleinik_step(m, u, alpha):
    """One application of the min-plus operator to a grid function."""
    u = u if isinstance(u, GridFunction) else GridFunction(u)
    g = _grid_data(m, u.n)
    return GridFunction(_apply(g, u.values, alpha)[0])


def coboundary_F(m, f, x):
    """``f(T x) - f(x) + log DT(x)`` with ``f`` interpolated."""
    x = np.asarray(x, dtype=float)
    y, dy = m.derivs(x, 1)
    return f(y) - f(x) + np.log(dy)


@dataclass(frozen=True)
class SubAction:
    f: GridFunction
    alpha: float
    defect: float
    lip_f: float
    alpha_bracket: tuple = (math.nan, math.nan)
    alpha_orbit: float = math.nan
    iterations: int = 0
    residual: float = math.nan
    converged: bool = True
    notes: tuple = field(default_factory=tuple)

    @property
    def n(self):
        return self.f.n

    def F(self, m, x=None):
        """Coboundary ``F`` at ``x`` (the grid if omitted)."""
        return coboundary_F(m, self.f, self.f.grid if x is None else x)


def orbit_alpha(m, max_period=14):
    """Minimum Lyapunov average over the periodic-orbit catalog, and its orbit."""
    cat = enumerate_periodic_orbits(m, max_period)
    return cat.lyapunov[0], cat.orbits[0]


def solve_subaction(m, n=2 ** 14, tol=1e-10, max_iter=20000, orbit_period=14,
                    orbit_window=1e-4):
    """Solve for ``(α, f)`` with ``F = f∘T - f + log DT >= α`` on the grid.

    Damped relative value iteration ``u <- (u + L₀u)/2 - min`` runs until the
    Collatz-Wielandt bracket ``min(L₀u - u) <= α_n <= max(L₀u - u)`` has width
    below ``tol``. The reported α is the periodic-orbit minimum when it lies
    within ``orbit_window`` of the bracket (orbit averages are exact values
    of the Lyapunov functional), otherwise the bracket midpoint.

    Raises
    ------
    NonConvergence
        Bracket still wider than ``tol`` after ``max_iter`` sweeps. The
        partial result is attached as ``err.result``.
    """
    if n < 2 ** 12:
        raise ValueError("grid size must be at least 2**12")
    if tol < 1e-10:
        raise ValueError("tol must be >= 1e-10")
    g = _grid_data(m, n)
    u = np.zeros(n)
    lo = hi = math.nan
    it = 0
    converged = False
    for it in range(1, max_iter + 1):
        v, _ = _apply(g, u)
        diff = v - u
        lo, hi = float(diff.min()), float(diff.max())
        if hi - lo < tol:
            converged = True
            break
        u = 0.5 * (u + v)
        u -= u.min()
    alpha_grid = 0.5 * (lo + hi)
    notes = []
    a_orb = math.nan
    alpha = alpha_grid
    if orbit_period:
        a_orb, _ = orbit_alpha(m, orbit_period)
        if lo - orbit_window <= a_orb <= hi + orbit_window:
            alpha = a_orb
        else:
            notes.append(f"orbit minimum {a_orb:.12g} outside bracket [{lo:.12g}, {hi:.12g}]")
    # one exact step makes the residual u - L u explicit
    v, _ = _apply(g, u, alpha_grid)
    u = v - v.min()
    f = GridFunction(-u)
    F = coboundary_F(m, f, f.grid)
    defect = float(max(0.0, np.max(alpha - F)))
    result = SubAction(f=f, alpha=float(alpha), defect=defect, lip_f=f.lip(),
                       alpha_bracket=(lo, hi), alpha_orbit=float(a_orb),
                       iterations=it, residual=hi - lo, converged=converged,
                       notes=tuple(notes))
    if not converged:
        err = NonConvergence(f"bracket width {hi - lo:.3g} > tol {tol:.3g} after {it} sweeps",
                             defect=defect, width=hi - lo)
        err.result = result
        raise err
    return result


def minimizing_set(m, sub, slack):
    """Grid points where ``F <= α + slack``."""
    F = sub.F(m)
    x = sub.f.grid[F <= sub.alpha + slack]
    if x.size == 0:
        raise EmptySet(f"no grid point has F <= alpha + {slack:g} (defect {sub.defect:.3g})",
                       slack=slack, defect=sub.defect)
    return x


def calibrated_segment(m, sub, length, x0=0.0):
    """Forward-ordered orbit segment built by backward argmin steps.

    Starting from ``x0``, repeatedly step to the preimage minimizing
    ``-f(y) + log DT(y)``; reversed, these points form a forward orbit
    segment that nearly attains α (a Birkhoff-minimizing segment).
    """
    u = -sub.f.values
    pts = np.empty(length)
    x = float(x0)
    for i in range(length):
        ys = preimages(m, x)
        cand = GridFunction(u)(ys) + np.log(m.deriv(ys))
        x = float(ys[int(np.argmin(cand))])
        pts[length - 1 - i] = x
    return pts


def lipschitz_F_bound(m, sub, profile):
    """``Lip(f)(max DT + 1) + Lip(DT)``, a bound on ``Lip(F)``."""
    return sub.lip_f * (profile.max_deriv + 1.0) + profile.lip_deriv
