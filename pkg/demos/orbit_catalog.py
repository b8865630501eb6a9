"""
Periodic orbits of an expanding circle map
==========================================

Enumerate every periodic orbit of ``T(x) = 2x + 0.1 sin(2πx)`` up to
period 10, check the periodic-point counts against the doubling map and
list the orbits with the smallest Lyapunov averages.
"""

import math

from lyapmin import enumerate_periodic_orbits, expansion_profile, trig_map

T = trig_map(2, [0.1])
prof = expansion_profile(T)
print(f"DT ranges over [{prof.min_deriv:.6f}, {prof.max_deriv:.6f}]")

###############################################################################
# A degree-2 expanding map has 2^n - 1 points fixed by T^n, whatever its
# nonlinearity. The catalog reproduces that count period by period.

catalog = enumerate_periodic_orbits(T, 10)
for n in range(1, 11):
    print(f"period {n:2d}: {catalog.count_by_period()[n]:4d} orbits, "
          f"{catalog.period_point_count(n):5d} points fixed by T^{n} (2^{n}-1 = {2 ** n - 1})")

###############################################################################
# Orbits are sorted by Lyapunov average. The minimum lies inside the
# interval spanned by log DT.

print(f"\nlog DT spans [{math.log(prof.min_deriv):.6f}, {math.log(prof.max_deriv):.6f}]")
for orbit, gap, lyap in list(catalog.rows())[:5]:
    print(f"code {orbit.code_str:>10}  lyapunov {lyap:.10f}  gap {gap:.4f}")
