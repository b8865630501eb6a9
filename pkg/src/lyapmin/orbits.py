"""Periodic orbits: enumeration by symbolic coding, gaps, Lyapunov averages.

Periodic points are fixed points of compositions of inverse branches. The
branches are anchored at a fixed point ``p`` of the map (cut the circle at
``p``), so every branch maps the closed window ``[p, p+1]`` into itself and
each word has exactly one fixed point of its composition in that window.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .circle_map import (circle_distance, expansion_profile, fixed_point_anchor,
                         solve_lift, wrap)
from .config import DEFAULT_TOL
from .errors import BudgetExceeded, ConvergenceFailure, NotFoundWithinBudget

WORD_BUDGET = 2 ** 24


def canonical_rotation(word):
    """Lexicographically least rotation of ``word`` and its offset."""
    n = len(word)
    best = min(range(n), key=lambda i: tuple(word[i:]) + tuple(word[:i]))
    return tuple(word[best:]) + tuple(word[:best]), best


def is_primitive(word):
    n = len(word)
    return all(tuple(word[i:]) + tuple(word[:i]) != tuple(word) for i in range(1, n))


def lyndon_words(alphabet, max_len):
    """All Lyndon words of length <= max_len in lexicographic order."""
    w = [-1]
    while w:
        w[-1] += 1
        m = len(w)
        yield tuple(w)
        while len(w) < max_len:
            w.append(w[len(w) - m])
        while w and w[-1] == alphabet - 1:
            w.pop()


def itinerary_labels(m, x):
    """Inverse-branch labels of ``x``, cutting the circle at a fixed point ``p``.

    With ``T~(p) = p + k``, the point ``x`` (lifted into ``[p, p+1)``) gets
    label ``j`` when ``T~(x) - k - p`` lies in ``[j, j+1)``. The arcs are cut
    at the preimages of ``p``; each is mapped onto the circle once, so the
    coding is injective. For maps fixing 0 this is ``floor(T~(x))``.
    """
    p, k = fixed_point_anchor(m)
    x = np.asarray(x, dtype=float)
    xl = p + np.mod(x - p, 1.0)
    j = np.floor(m.derivs(xl, 0)[0] - k - p).astype(np.int64)
    return np.clip(j, 0, m.degree - 1)


@dataclass(frozen=True)
class PeriodicOrbit:
    points: tuple
    code: tuple

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(float(p) for p in self.points))
        object.__setattr__(self, "code", tuple(int(c) for c in self.code))

    @property
    def period(self):
        return len(self.points)

    @property
    def code_str(self):
        sep = "" if all(c < 10 for c in self.code) else "."
        return sep.join(str(c) for c in self.code)

    def as_array(self):
        return np.asarray(self.points)


@dataclass(frozen=True)
class OrbitCatalog:
    map_id: str
    max_period: int
    orbits: tuple
    lyapunov: tuple
    gaps: tuple

    def __len__(self):
        return len(self.orbits)

    def count_by_period(self):
        counts = {}
        for o in self.orbits:
            counts[o.period] = counts.get(o.period, 0) + 1
        return dict(sorted(counts.items()))

    def period_point_count(self, n):
        """Number of points fixed by T^n, i.e. sum of periods dividing n."""
        return sum(o.period for o in self.orbits if n % o.period == 0)

    def rows(self):
        for o, lyap, gap in zip(self.orbits, self.lyapunov, self.gaps):
            yield o, gap, lyap


def _fixed_points_of_words(m, words, anchor, tol):
    """Orbit points (W, n) of the words' inverse-branch compositions, lifted."""
    p, k = anchor
    W, n = words.shape
    lam = expansion_profile(m).min_deriv
    sweeps = int(math.ceil(40.0 / (n * math.log(lam)))) + 3
    pts = np.full((W, n), p + 0.5)
    x = np.full(W, p + 0.5)
    for sweep in range(sweeps + 60):
        y = x
        for i in range(n - 1, -1, -1):
            y = solve_lift(m, k + words[:, i] + y, x0=pts[:, i], tol=tol)
            pts[:, i] = y
        change = np.max(np.abs(y - x))
        x = y
        if sweep >= sweeps and change <= 1e-15:
            break
    else:
        if change > 1e-13:
            raise ConvergenceFailure("branch composition did not settle", change=float(change))
    return pts


def _make_orbit(m, pts_row):
    pts = wrap(np.asarray(pts_row))
    pts = np.where(np.abs(pts) < 1e-15, 0.0, pts)
    labels = itinerary_labels(m, pts)
    code, off = canonical_rotation(tuple(labels))
    pts = np.roll(pts, -off)
    return PeriodicOrbit(tuple(pts), code)


def _dedupe(orbits, tol):
    """Drop orbits sharing a point with an earlier one of the same period.

    Only same-period orbits can coincide; in practice this merges the
    all-(d-1) word, whose fixed point sits at p+1 = p on the circle.
    """
    if len(orbits) < 2:
        return orbits
    key = np.array([min(o.points) for o in orbits])
    order = np.argsort(key, kind="stable")
    ks = key[order]
    gaps = np.diff(np.append(ks, ks[0] + 1.0))
    drop = set()
    for j in np.nonzero(gaps < tol)[0]:
        a, b = order[j], order[(j + 1) % len(order)]
        drop.add(max(a, b))
    return [o for i, o in enumerate(orbits) if i not in drop]


def lyapunov_average(m, orbit):
    """Mean of log DT over the orbit points."""
    return float(np.mean(np.log(m.deriv(orbit.as_array()))))


def orbit_gap(m, orbit):
    """Minimal distance between distinct points; ``1/(20 max DT)`` for fixed points."""
    if orbit.period == 1:
        return 1.0 / (20.0 * expansion_profile(m).max_deriv)
    x = np.sort(orbit.as_array())
    diffs = np.diff(np.append(x, x[0] + 1.0))
    return float(min(diffs.min(), 0.5))


def _word_count(d, n_max):
    return sum(d ** n for n in range(1, n_max + 1))


@lru_cache(maxsize=64)
def enumerate_periodic_orbits(m, max_period, tol=DEFAULT_TOL):
    """All periodic orbits of period <= max_period, sorted by (Lyapunov average, period, first point)."""
    d = m.degree
    if max_period < 1:
        raise ValueError("max_period must be >= 1")
    if (d == 2 and max_period > 24) or d ** max_period > WORD_BUDGET:
        raise BudgetExceeded(f"{d}^{max_period} words exceed the budget {WORD_BUDGET}",
                             degree=d, max_period=max_period)
    expansion_profile(m)
    anchor = fixed_point_anchor(m)
    by_len = {}
    for w in lyndon_words(d, max_period):
        by_len.setdefault(len(w), []).append(w)
    orbits = []
    for n in sorted(by_len):
        words = np.asarray(by_len[n], dtype=np.int64)
        pts = _fixed_points_of_words(m, words, anchor, tol)
        orbits.extend(_dedupe([_make_orbit(m, row) for row in pts], tol.dedupe))
    for o in orbits:
        close = circle_distance(m(o.points[-1]), o.points[0])
        if close >= tol.orbit_closure:
            raise ConvergenceFailure("orbit does not re-close", code=o.code_str,
                                     closure=float(close))
    lyap = [lyapunov_average(m, o) for o in orbits]
    order = sorted(range(len(orbits)),
                   key=lambda i: (lyap[i], orbits[i].period, orbits[i].points[0]))
    orbits = [orbits[i] for i in order]
    lyap = [lyap[i] for i in order]
    gaps = [orbit_gap(m, o) for o in orbits]
    return OrbitCatalog(m.map_id, max_period, tuple(orbits), tuple(lyap), tuple(gaps))


def distance_to_set(x, E):
    """Circle distance from each ``x`` to the finite set ``E``."""
    E = np.sort(wrap(np.asarray(E, dtype=float)))
    x = wrap(np.atleast_1d(np.asarray(x, dtype=float)))
    i = np.searchsorted(E, x)
    right = E[i % E.size]
    left = E[(i - 1) % E.size]
    return np.minimum(circle_distance(x, right), circle_distance(x, left))


def escape_time(m, orbit, z, horizon, tol=DEFAULT_TOL):
    """First ``i <= horizon`` with ``d(T^i z, Γ) >= G(Γ)/(2 max DT)``, else None.

    A starting point within ``tol.membership`` of the orbit counts as lying
    on it (floating-point iteration would otherwise drift off eventually).
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    pts = orbit.as_array()
    threshold = orbit_gap(m, orbit) / (2.0 * expansion_profile(m).max_deriv)
    x = float(z)
    if np.min(circle_distance(x, pts)) <= tol.membership:
        return None
    for i in range(horizon + 1):
        if np.min(circle_distance(x, pts)) >= threshold:
            return i
        x = m(x)
    return None


def select_large_gap_orbit(m, E, C, max_period, catalog=None, tol=DEFAULT_TOL):
    """Smallest-period orbit with ``G(Γ) > C * Σ_{x∈Γ} d(x, E)``.

    Ties go to the largest ratio ``G / Σd`` (infinite when Σd = 0), then the
    largest gap.
    """
    E = np.asarray(E, dtype=float)
    if E.size == 0:
        raise ValueError("E must be nonempty")
    if C <= 0:
        raise ValueError("C must be positive")
    drift = distance_to_set(m(E), E)
    if drift.max() > tol.invariance_E:
        warnings.warn(f"E is not forward invariant within {tol.invariance_E:g} "
                      f"(max drift {drift.max():.3g})", RuntimeWarning, stacklevel=2)
    if catalog is None:
        catalog = enumerate_periodic_orbits(m, max_period)
    best = None
    for o, gap in zip(catalog.orbits, catalog.gaps):
        if o.period > max_period:
            continue
        dsum = float(distance_to_set(o.as_array(), E).sum())
        if not gap > C * dsum:
            continue
        ratio = math.inf if dsum == 0.0 else gap / dsum
        key = (o.period, -ratio, -gap, o.points[0])
        if best is None or key < best[0]:
            best = (key, o)
    if best is None:
        raise NotFoundWithinBudget(
            f"no orbit of period <= {max_period} has G > {C:g} * sum d(x, E)",
            C=C, max_period=max_period)
    return best[1]
