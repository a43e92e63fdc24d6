"""How the echo amplitude depends on the pulse separation.

Weak kicks, one scan across nearly half a revival period.  Two things
to look for in the printed table: the amplitude peaks near one eighth
of the revival period and again near three eighths, and it collapses
close to the quarter- and half-revival points where the second pulse
lands on top of a revival of the first.
"""

import numpy as np

from rotecho import molecule_preset, revival_period, scan_dtau, two_pulse_config

mol = molecule_preset("OCS")
t_rev = revival_period(mol)

grid = np.linspace(0.02, 0.48, 24) * t_rev
base = two_pulse_config(mol, 0.2, 0.1, float(grid[0]))
curve = scan_dtau(grid, p1_kick=0.2, p2_kick=0.1, base_config=base)

s = curve.s_values()
x = curve.axis_values() / t_rev
bar_unit = np.abs(s).max() / 40.0

print("dtau/T_rev   S_echo        profile")
for xi, si in zip(x, s):
    bar = "#" * int(round(abs(si) / bar_unit))
    print(f"  {xi:6.3f}    {si:+.3e}   {bar}")

print()
print(f"max at dtau = {x[np.argmax(s)]:.3f} T_rev "
      f"(one eighth = 0.125, three eighths = 0.375)")
print(f"min at dtau = {x[np.argmin(s)]:.3f} T_rev "
      f"(quarter revival = 0.250)")
