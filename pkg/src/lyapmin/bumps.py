"""Closed-form piecewise polynomials for the cubic bump and its moving average.

All functions take the signed circle offset ``s`` from a bump center, the
half-width ``w`` and the signed amplitude ``amp`` (``amplitude_scale*gamma``).
On ``[0, w]`` the bump is ``-amp*s*(w-s)**2``, on ``[-w, 0)`` it is
``-amp*s*(s+w)**2`` and it vanishes elsewhere, so it is an odd C^{1,1}
function whose derivative has a corner at the center.
"""

import numpy as np


def cubic(s, w, amp, order=3):
    """Value and derivatives ``0..order`` of the cubic bump.

    Second and third derivatives are one-sided at the knots ``0, ±w``:
    the right piece owns ``[0, w]`` and the left piece owns ``[-w, 0)``.
    """
    s = np.asarray(s, dtype=float)
    right = (s >= 0.0) & (s <= w)
    left = (s < 0.0) & (s >= -w)
    r = w - s
    l = s + w
    out = [np.where(right, -amp * s * r * r, np.where(left, -amp * s * l * l, 0.0))]
    if order >= 1:
        out.append(np.where(right, -amp * r * (w - 3.0 * s),
                            np.where(left, -amp * l * (3.0 * s + w), 0.0)))
    if order >= 2:
        out.append(np.where(right, -amp * (6.0 * s - 4.0 * w),
                            np.where(left, -amp * (6.0 * s + 4.0 * w), 0.0)))
    if order >= 3:
        out.append(np.where(right | left, -6.0 * amp, 0.0))
    return out


def cubic_antiderivative(s, w, amp):
    """Antiderivative of the cubic bump, zero to the left of the support.

    The bump is odd, so the antiderivative also vanishes right of ``w``.
    """
    s = np.asarray(s, dtype=float)
    w4 = w ** 4
    q_left = s ** 4 / 4.0 + 2.0 * w * s ** 3 / 3.0 + w * w * s * s / 2.0
    q_right = w * w * s * s / 2.0 - 2.0 * w * s ** 3 / 3.0 + s ** 4 / 4.0
    left = (s >= -w) & (s < 0.0)
    right = (s >= 0.0) & (s <= w)
    return np.where(left, -amp * (q_left - w4 / 12.0),
                    np.where(right, amp * (w4 / 12.0 - q_right), 0.0))


def mollified(s, w, amp, delta, order=3):
    """Moving average ``(1/2δ)∫_{-δ}^{δ} h(s+t) dt`` of the cubic bump.

    Uses exact antiderivatives, so the k-th derivative is the centered
    difference of the (k-1)-th derivative of the raw bump over ``±δ``.
    """
    s = np.asarray(s, dtype=float)
    inv = 1.0 / (2.0 * delta)
    hi = s + delta
    lo = s - delta
    out = [(cubic_antiderivative(hi, w, amp) - cubic_antiderivative(lo, w, amp)) * inv]
    if order >= 1:
        raw_hi = cubic(hi, w, amp, order - 1)
        raw_lo = cubic(lo, w, amp, order - 1)
        for k in range(order):
            out.append((raw_hi[k] - raw_lo[k]) * inv)
    return out


def cubic_bounds(w, amp):
    """Analytic ``(sup|h|, sup|Dh|, Lip(Dh))`` of the cubic bump."""
    a = abs(amp)
    return 4.0 * a * w ** 3 / 27.0, a * w * w, 4.0 * a * w
