"""Expanding self-maps of the circle R/Z.

A map is a trigonometric lift

    T~(x) = degree*x + shift + sum_k a_k sin(2πkx) + b_k cos(2πkx)

plus a stack of bump layers (see :mod:`lyapmin.bumps`). First, second and
third derivatives are exact closed forms, which is what the perturbation and
verification machinery needs.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from . import bumps
from .config import DEFAULT_TOL
from .errors import ConvergenceFailure, NotExpanding, SupportOverlap

TWO_PI = 2.0 * math.pi
LAYER_KINDS = ("piecewise-cubic", "mollified")


def _scalar_or_array(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


def wrap(x):
    """Reduce to the fundamental domain [0, 1)."""
    a = np.asarray(x, dtype=float)
    r = a - np.floor(a)
    r = np.where(r >= 1.0, r - 1.0, r)
    return _scalar_or_array(r, x)


def signed_offset(x, p):
    """Representative of ``x - p`` in [-1/2, 1/2)."""
    d = np.asarray(x, dtype=float) - p
    return d - np.floor(d + 0.5)


def circle_distance(x, y):
    """Arc-length distance on R/Z, in [0, 1/2]."""
    d = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float)) % 1.0
    out = np.minimum(d, 1.0 - d)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class TrigLift:
    degree: int
    sin_coeffs: tuple = ()
    cos_coeffs: tuple = ()
    shift: float = 0.0

    def __post_init__(self):
        if int(self.degree) != self.degree or self.degree < 2:
            raise ValueError(f"degree must be an integer >= 2, got {self.degree}")
        object.__setattr__(self, "degree", int(self.degree))
        object.__setattr__(self, "sin_coeffs", tuple(float(a) for a in self.sin_coeffs))
        object.__setattr__(self, "cos_coeffs", tuple(float(b) for b in self.cos_coeffs))
        object.__setattr__(self, "shift", float(self.shift))
        n = self.n_harmonics
        a = np.zeros(n)
        b = np.zeros(n)
        a[:len(self.sin_coeffs)] = self.sin_coeffs
        b[:len(self.cos_coeffs)] = self.cos_coeffs
        object.__setattr__(self, "_arrays", (a, b, TWO_PI * np.arange(1, n + 1)))

    @property
    def n_harmonics(self):
        return max(len(self.sin_coeffs), len(self.cos_coeffs))

    def derivs(self, x, order):
        """Lift value and derivatives ``0..order`` at ``x`` (array)."""
        x = np.asarray(x, dtype=float)
        out = [self.degree * x + self.shift]
        if order >= 1:
            out.append(np.full(x.shape, float(self.degree)))
        out.extend(np.zeros(x.shape) for _ in range(2, order + 1))
        n = self.n_harmonics
        if n == 0:
            return out
        a, b, w = self._arrays
        phase = np.multiply.outer(x, w)
        s, c = np.sin(phase), np.cos(phase)
        # d^k/dx^k of a sin + b cos cycles through (a, b) -> (-b, a) times w
        ca, cb = a, b
        for k in range(order + 1):
            out[k] = out[k] + s @ ca + c @ cb
            ca, cb = -cb * w, ca * w
        return out

    def offset_bound(self):
        """Bound on sup |T~(x) - degree*x|."""
        return abs(self.shift) + sum(map(abs, self.sin_coeffs)) + sum(map(abs, self.cos_coeffs))


@dataclass(frozen=True)
class BumpLayer:
    """Disjoint cubic bumps (optionally mollified) centred on orbit points."""

    centers: tuple
    half_width: float
    gammas: tuple
    amplitude_scale: float
    kind: str = "piecewise-cubic"
    mollify_delta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "centers", tuple(float(c) for c in self.centers))
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        object.__setattr__(self, "half_width", float(self.half_width))
        object.__setattr__(self, "amplitude_scale", float(self.amplitude_scale))
        object.__setattr__(self, "mollify_delta", float(self.mollify_delta))
        if self.kind not in LAYER_KINDS:
            raise ValueError(f"unknown layer kind {self.kind!r}")
        if len(self.centers) != len(self.gammas):
            raise ValueError("centers and gammas differ in length")
        if self.half_width <= 0.0:
            raise ValueError("half_width must be positive")
        if self.kind == "mollified" and self.mollify_delta <= 0.0:
            raise ValueError("mollified layer needs mollify_delta > 0")
        if self.kind == "piecewise-cubic" and self.mollify_delta != 0.0:
            raise ValueError("raw cubic layer must have mollify_delta == 0")
        reach = self.half_width + self.mollify_delta
        c = np.sort(np.asarray(self.centers))
        if len(c) > 1:
            gaps = np.diff(np.append(c, c[0] + 1.0))
            if gaps.min() <= 2.0 * reach:
                raise SupportOverlap(
                    "bump supports overlap", min_center_gap=float(gaps.min()), reach=reach)
        elif len(c) == 1 and 2.0 * reach >= 1.0:
            raise SupportOverlap("bump support wraps the whole circle", reach=reach)

    def derivs(self, x, order):
        x = np.asarray(x, dtype=float)
        out = [np.zeros(x.shape) for _ in range(order + 1)]
        reach = self.half_width + self.mollify_delta
        for p, g in zip(self.centers, self.gammas):
            s = signed_offset(x, p)
            if not np.any(np.abs(s) <= reach):
                continue
            amp = self.amplitude_scale * g
            if self.kind == "mollified":
                parts = bumps.mollified(s, self.half_width, amp, self.mollify_delta, order)
            else:
                parts = bumps.cubic(s, self.half_width, amp, order)
            for k in range(order + 1):
                out[k] += parts[k]
        return out

    def bounds(self):
        """Analytic ``(sup|h|, sup|Dh|, Lip(Dh))``; averaging cannot increase them."""
        gmax = max((abs(g) for g in self.gammas), default=0.0)
        return bumps.cubic_bounds(self.half_width, self.amplitude_scale * gmax)

    def knots(self):
        w, d = self.half_width, self.mollify_delta
        offs = [0.0, w, -w] if d == 0.0 else [d, -d, w + d, w - d, -w + d, -w - d]
        return tuple(float(wrap(p + o)) for p in self.centers for o in offs)


class Evaluation(NamedTuple):
    image: object
    lift_value: object
    deriv: object
    second_deriv_or_bound: object


@dataclass(frozen=True)
class ExpandingMap:
    base: TrigLift
    layers: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))

    @property
    def degree(self):
        return self.base.degree

    def derivs(self, x, order=1):
        """``[T~, DT, ..., D^order T]`` at ``x``, each an array shaped like x."""
        out = self.base.derivs(x, order)
        for layer in self.layers:
            extra = layer.derivs(x, order)
            for k in range(order + 1):
                out[k] = out[k] + extra[k]
        return out

    def lift(self, x):
        return _scalar_or_array(self.derivs(x, 0)[0], x)

    def deriv(self, x):
        return _scalar_or_array(self.derivs(x, 1)[1], x)

    def __call__(self, x):
        return wrap(self.lift(x))

    def offset_bound(self):
        return self.base.offset_bound() + sum(l.bounds()[0] for l in self.layers)

    def knots(self):
        return tuple(k for layer in self.layers for k in layer.knots())

    def with_layer(self, layer):
        return ExpandingMap(self.base, self.layers + (layer,))

    def add_trig(self, sin_coeffs=(), cos_coeffs=(), shift=0.0):
        """Return the map with a trigonometric polynomial added to its lift."""
        def _add(u, v):
            n = max(len(u), len(v))
            return tuple((u[i] if i < len(u) else 0.0) + (v[i] if i < len(v) else 0.0)
                         for i in range(n))
        base = TrigLift(self.degree, _add(self.base.sin_coeffs, tuple(sin_coeffs)),
                        _add(self.base.cos_coeffs, tuple(cos_coeffs)),
                        self.base.shift + shift)
        return ExpandingMap(base, self.layers)

    # serialization -------------------------------------------------------

    def to_dict(self):
        d = {
            "degree": self.degree,
            "shift": self.base.shift,
            "sin": list(self.base.sin_coeffs),
            "cos": list(self.base.cos_coeffs),
            "layers": [
                {
                    "kind": l.kind,
                    "centers": list(l.centers),
                    "half_width": l.half_width,
                    "gammas": list(l.gammas),
                    "amplitude_scale": l.amplitude_scale,
                    "mollify_delta": l.mollify_delta,
                }
                for l in self.layers
            ],
        }
        return d

    @classmethod
    def from_dict(cls, d):
        base = TrigLift(d["degree"], tuple(d.get("sin", ())), tuple(d.get("cos", ())),
                        d.get("shift", 0.0))
        layers = tuple(
            BumpLayer(tuple(l["centers"]), l["half_width"], tuple(l["gammas"]),
                      l["amplitude_scale"], l.get("kind", "piecewise-cubic"),
                      l.get("mollify_delta", 0.0))
            for l in d.get("layers", ())
        )
        return cls(base, layers)

    @property
    def map_id(self):
        text = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def trig_map(degree, sin=(), cos=(), shift=0.0):
    """Convenience constructor for a map without bump layers."""
    return ExpandingMap(TrigLift(degree, tuple(sin), tuple(cos), shift))


def doubling_map():
    return trig_map(2)


def evaluate(m, x):
    """Image, lift value, DT and D²T at ``x``.

    At a bump knot the second derivative is one-sided; the value returned
    there is the one of larger magnitude, i.e. a local Lipschitz bound for DT.
    """
    lift, d1, d2 = m.derivs(x, 2)
    knots = np.asarray(m.knots())
    if knots.size:
        xa = np.atleast_1d(np.asarray(x, dtype=float))
        on_knot = np.isin(xa, knots)
        if on_knot.any():
            d2a = np.atleast_1d(d2).copy()
            pts = xa[on_knot]
            left = m.derivs(pts - 1e-12, 2)[2]
            right = m.derivs(pts + 1e-12, 2)[2]
            cand = np.stack([d2a[on_knot], left, right])
            d2a[on_knot] = cand[np.argmax(np.abs(cand), axis=0), np.arange(pts.size)]
            d2 = d2a.reshape(np.shape(x))
    return Evaluation(wrap(lift), _scalar_or_array(lift, x), _scalar_or_array(d1, x),
                      _scalar_or_array(d2, x))


@dataclass(frozen=True)
class ExpansionProfile:
    min_deriv: float
    max_deriv: float
    lip_deriv: float
    grid_n: int
    argmin: float = 0.0
    argmax: float = 0.0


def _polish(m, x0, h, sign):
    """One Newton step on D²T = 0 from a grid extremum of DT, kept if it improves."""
    _, d1, d2, d3 = m.derivs(np.array([x0]), 3)
    best_x, best = x0, d1[0]
    if d3[0] != 0.0:
        x1 = x0 - d2[0] / d3[0]
        if abs(x1 - x0) <= h:
            v = m.derivs(np.array([x1]), 1)[1][0]
            if sign * v < sign * best:
                best_x, best = float(wrap(x1)), v
    return best_x, float(best)


@lru_cache(maxsize=256)
def _profile(m, grid_n):
    h = 1.0 / grid_n
    x = np.arange(grid_n) * h
    _, d1, d2 = m.derivs(x, 2)
    xmin, dmin = _polish(m, x[np.argmin(d1)], h, +1)
    xmax, dmax = _polish(m, x[np.argmax(d1)], h, -1)
    lip = float(np.max(np.abs(d2)))
    knots = np.asarray(m.knots())
    if knots.size:
        kd = m.derivs(knots, 1)[1]
        if kd.min() < dmin:
            xmin, dmin = float(knots[np.argmin(kd)]), float(kd.min())
        if kd.max() > dmax:
            xmax, dmax = float(knots[np.argmax(kd)]), float(kd.max())
        for eps in (-1e-12, 0.0, 1e-12):
            lip = max(lip, float(np.max(np.abs(m.derivs(knots + eps, 2)[2]))))
    return ExpansionProfile(dmin, dmax, lip, grid_n, float(xmin), float(xmax))


def expansion_profile(m, grid_n=4096):
    """Min/max of DT and a Lipschitz estimate of DT; rejects non-expanding maps."""
    if grid_n < 1024:
        raise ValueError("grid_n must be at least 1024")
    prof = _profile(m, int(grid_n))
    if prof.min_deriv <= 1.0:
        raise NotExpanding(
            f"min DT = {prof.min_deriv:.6g} <= 1 at x = {prof.argmin:.6g}",
            min_deriv=prof.min_deriv, argmin=prof.argmin)
    return prof


def solve_lift(m, target, x0=None, tol=DEFAULT_TOL):
    """Solve ``T~(x) = target`` elementwise by safeguarded Newton.

    The lift is a strictly increasing bijection of R with
    ``|T~(x) - degree*x| <= B``, which gives a guaranteed bracket.
    Out-of-bracket Newton steps fall back to bisection, and after
    ``tol.newton_bisect_after`` iterations only bisection is used.
    """
    t = np.asarray(target, dtype=float)
    shape = t.shape
    t = t.ravel()
    d = m.degree
    bound = m.offset_bound() + 1e-12
    lo = (t - bound) / d
    hi = (t + bound) / d
    if x0 is None:
        x = 0.5 * (lo + hi)
    else:
        x = np.clip(np.asarray(x0, dtype=float).ravel() * np.ones_like(t), lo, hi)
    active = np.ones(t.size, dtype=bool)
    for it in range(tol.newton_max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        xi = x[idx]
        val, dv = m.derivs(xi, 1)
        f = val - t[idx]
        lo_i, hi_i = lo[idx], hi[idx]
        lo_i = np.where(f < 0.0, xi, lo_i)
        hi_i = np.where(f > 0.0, xi, hi_i)
        lo[idx], hi[idx] = lo_i, hi_i
        mid = 0.5 * (lo_i + hi_i)
        if it < tol.newton_bisect_after:
            with np.errstate(divide="ignore", invalid="ignore"):
                xn = xi - f / dv
            bad = ~np.isfinite(xn) | (xn <= lo_i) | (xn >= hi_i)
            xn = np.where(bad, mid, xn)
        else:
            xn = mid
        xn = np.where(f == 0.0, xi, xn)
        step = np.abs(xn - xi)
        x[idx] = xn
        scale = np.maximum(1.0, np.abs(xn))
        done = (f == 0.0) | (step <= 4e-16 * scale) | (hi_i - lo_i <= 4e-16 * scale)
        active[idx[done]] = False
    else:
        if active.any():
            raise ConvergenceFailure("inverse lift did not converge",
                                     unresolved=int(active.sum()))
    if active.any():
        raise ConvergenceFailure("inverse lift did not converge",
                                 unresolved=int(active.sum()))
    return x.reshape(shape)


def preimages(m, y, tol=DEFAULT_TOL):
    """The ``degree`` preimages of ``y`` in [0, 1), sorted ascending.

    Array input of shape ``S`` yields an array of shape ``S + (degree,)``.
    """
    ya = np.asarray(y, dtype=float)
    d = m.degree
    t0 = float(m.lift(0.0))
    k0 = np.ceil(t0 - ya)
    targets = (ya + k0)[..., None] + np.arange(d)
    x = wrap(solve_lift(m, targets, tol=tol))
    x = np.sort(x, axis=-1)
    resid = np.abs(signed_offset(m(x), ya[..., None]))
    if resid.size and resid.max() >= tol.residual:
        raise ConvergenceFailure("preimage residual above tolerance",
                                 max_residual=float(resid.max()))
    return x


@lru_cache(maxsize=256)
def fixed_point_anchor(m):
    """A fixed point ``p`` of T in [0, 1) and the integer ``k`` with T~(p) = p + k.

    Cutting the circle at ``p`` makes every inverse branch
    ``y -> T~^{-1}(k + j + y)`` map ``[p, p+1]`` into itself.
    """
    t0 = float(m.lift(0.0))
    k = math.ceil(t0)
    g0 = t0 - k
    if g0 == 0.0:
        return 0.0, k
    p = brentq(lambda x: float(m.lift(x)) - x - k, 0.0, 1.0, xtol=1e-15)
    # polish on the lift equation
    for _ in range(3):
        val, dv = m.derivs(np.array([p]), 1)
        p = p - (val[0] - p - k) / (dv[0] - 1.0)
    return float(p), k


def inverse_branch(m, j, y, x0=None, tol=DEFAULT_TOL):
    """Branch ``j`` of the inverse anchored at the fixed point: ``T~^{-1}(k + j + y)``."""
    _, k = fixed_point_anchor(m)
    return solve_lift(m, k + np.asarray(j) + np.asarray(y, dtype=float), x0=x0, tol=tol)
