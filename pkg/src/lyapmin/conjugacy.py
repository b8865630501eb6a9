"""Itineraries, the conjugacy ``π_S`` with ``π_S∘S₀ = S∘π_S``, and orbit continuation.

The conjugacy is computed pointwise by symbolic pullback: follow the orbit
of ``x`` under ``S₀``, record the integer parts ``a_k`` of the lifted
images, then pull back through the inverse lift of ``S``,

    z_k = S~^{-1}(a_k + z_{k+1}),

starting from ``z_D = x_D``. The lift symbols vary continuously with the
point (no arc bookkeeping), so the pullback has no boundary ambiguity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circle_map import (circle_distance, expansion_profile, fixed_point_anchor, preimages,
                         solve_lift, wrap)
from .config import DEFAULT_TOL
from .errors import BoundaryAmbiguity, ConvergenceFailure
from .orbits import PeriodicOrbit, itinerary_labels

MAX_DEPTH = 64


@dataclass(frozen=True)
class Itinerary:
    word: tuple
    base_partition: tuple

    def __str__(self):
        return "".join(str(c) for c in self.word)


def itinerary(m, x, depth, tol=DEFAULT_TOL):
    """Arc labels of ``x, Tx, ..., T^{depth-1}x``.

    Arcs are cut at the preimages of the anchoring fixed point (0 for maps
    fixing 0) and are half-open. An iterate lying within ``tol.boundary``
    of a cut point, but not on it, is ambiguous.
    """
    if not 1 <= depth <= MAX_DEPTH:
        raise ValueError(f"depth must be in [1, {MAX_DEPTH}]")
    cuts = preimages(m, fixed_point_anchor(m)[0])
    word = []
    y = float(wrap(x))
    for k in range(depth):
        dist = float(np.min(circle_distance(y, cuts)))
        if 0.0 < dist < tol.boundary:
            raise BoundaryAmbiguity(f"iterate {k} lies {dist:.3g} from an arc boundary",
                                    step=k, point=y)
        word.append(int(itinerary_labels(m, y)))
        y = m(y)
    return Itinerary(tuple(word), tuple(float(c) for c in cuts))


def default_depth(S, tol=1e-15):
    lam = expansion_profile(S).min_deriv
    return max(40, int(math.ceil(math.log(tol) / math.log(1.0 / lam))) + 2)


def _lift_symbols(S0, x, depth):
    """Integer parts of the lifted ``S₀`` images along the orbit, and the final point."""
    x = np.array(x, dtype=float)
    syms = np.empty((depth,) + x.shape, dtype=np.int64)
    for k in range(depth):
        y = S0.lift(x)
        a = np.floor(y)
        syms[k] = a.astype(np.int64)
        x = y - a
    return syms, x


def conjugacy_point(S0, S, x, depth=None, tol=DEFAULT_TOL):
    """``π_S(x)`` by pulling the ``S₀`` lift symbols of ``x`` back through ``S``."""
    if S.degree != S0.degree:
        raise ValueError("maps of different degree are not conjugate")
    depth = default_depth(S) if depth is None else int(depth)
    xa = np.asarray(x, dtype=float)
    syms, z = _lift_symbols(S0, xa, depth)
    for k in range(depth - 1, -1, -1):
        z = solve_lift(S, syms[k] + z, tol=tol)
    out = wrap(z)
    return float(out) if np.ndim(x) == 0 else out


@dataclass(frozen=True)
class ConjugacyMap:
    grid: np.ndarray
    images: np.ndarray
    residual: float
    id_distance: float
    depth: int

    @property
    def samples(self):
        return int(self.grid.size)

    def is_monotone(self):
        """Images keep the cyclic order of the sorted grid (degree one)."""
        steps = np.diff(np.append(self.images, self.images[0] + 1.0)) % 1.0
        return bool(np.all(steps > 0.0) and abs(steps.sum() - 1.0) < 1e-9)

    def to_dict(self):
        return {"residual": self.residual, "id_distance": self.id_distance,
                "depth": self.depth, "samples": self.samples}


def conjugacy_map(S0, S, samples=1000, depth=None):
    """``π_S`` on the grid ``j/samples`` with its conjugacy residual."""
    depth = default_depth(S) if depth is None else int(depth)
    x = np.arange(samples) / samples
    pi_x = conjugacy_point(S0, S, x, depth)
    pi_s0x = conjugacy_point(S0, S, S0(x), depth)
    residual = float(np.max(circle_distance(pi_s0x, S(pi_x))))
    idd = float(np.max(circle_distance(pi_x, x)))
    return ConjugacyMap(grid=x, images=pi_x, residual=residual, id_distance=idd, depth=depth)


def orbit_lift_symbols(m, orbit):
    """``a_k = round(T~(x_k) - x_{k+1})`` for consecutive (wrapped) orbit points."""
    x = orbit.as_array()
    return np.rint(m.lift(x) - np.roll(x, -1)).astype(np.int64)


def continue_orbit(orbit, S, S0=None, eps0_tilde=None, tol=DEFAULT_TOL):
    """The periodic orbit of ``S`` with the lift symbols of ``orbit`` under ``S₀``.

    Runs the cyclic inverse-branch contraction of ``S`` seeded at the source
    points. The result keeps the source code and point order.
    """
    src = S if S0 is None else S0
    syms = orbit_lift_symbols(src, orbit)
    n = orbit.period
    z = orbit.as_array().copy()
    lam = expansion_profile(S).min_deriv
    sweeps = int(math.ceil(40.0 / (n * math.log(lam)))) + 3
    change = math.inf
    for sweep in range(sweeps + 60):
        old = z.copy()
        for k in range(n - 1, -1, -1):
            z[k] = float(solve_lift(S, syms[k] + z[(k + 1) % n], x0=z[k], tol=tol))
        change = float(np.max(np.abs(z - old)))
        if sweep >= sweeps and change <= 1e-15:
            break
    lifted_resid = float(np.max(np.abs(S.lift(z) - syms - np.roll(z, -1))))
    pts = wrap(z)
    closure = float(np.max(circle_distance(S(pts), np.roll(pts, -1))))
    if max(lifted_resid, closure) >= tol.residual:
        raise ConvergenceFailure("continued orbit does not close",
                                 residual=max(lifted_resid, closure))
    shift = float(np.max(circle_distance(pts, orbit.as_array())))
    if eps0_tilde is not None and not shift < eps0_tilde:
        raise ConvergenceFailure(f"continued orbit moved {shift:.3g} >= eps0 {eps0_tilde:.3g}",
                                 shift=shift)
    pts = np.where(np.abs(pts) < 1e-15, 0.0, pts)
    return PeriodicOrbit(tuple(pts), orbit.code)


def same_lift_symbols(S, orbit_S, S0, orbit_S0):
    """Whether the continued orbit has the source's lift symbols (up to wrap)."""
    a = orbit_lift_symbols(S0, orbit_S0)
    x = orbit_S.as_array()
    x0 = orbit_S0.as_array()
    # unwrap the continued points next to their sources
    z = x0 + (x - x0 - np.rint(x - x0))
    b = np.rint(S.lift(z) - np.roll(z, -1)).astype(np.int64)
    return bool(np.array_equal(a, b))
