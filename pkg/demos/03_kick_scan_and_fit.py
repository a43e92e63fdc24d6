"""Echo amplitude versus second-kick strength, and the sin^2 law.

At fixed separation the echo first grows with the second kick, rolls
over, and changes sign: the response follows a * sin^2(b * P2) over
the first lobe and keeps oscillating beyond it.  The scan attaches the
fit automatically; the fit residual tells how far into the strong-kick
regime the law survives.

Strong kicks push population up the ladder, so the basis is set by the
top of the grid, not by the thermal tail.
"""

import numpy as np

from rotecho import molecule_preset, revival_period, scan_p2, two_pulse_config

mol = molecule_preset("OCS")
t_rev = revival_period(mol)
dtau = t_rev / 8.0

grid = np.arange(0.25, 7.0 + 1e-9, 0.25)
base = two_pulse_config(mol, 1.0, float(grid[-1]), dtau, j_max=120)
curve = scan_p2(grid, p1_kick=1.0, dtau=dtau, base_config=base)

fit = curve.fit
print(f"fit over the first lobe ({fit.n_points} points):")
print(f"  a = {fit.a:.4e}, b = {fit.b:.4f}, rel residual = {fit.residual:.2%}")
print()
print("  P2     S_echo       a*sin^2(b*P2)")
for p2, s in zip(curve.axis_values(), curve.s_values()):
    marker = " <- sign inverted" if s < 0 else ""
    print(f"  {p2:4.2f}  {s:+.3e}   {fit.value(p2):+.3e}{marker}")

n_neg = int(np.sum(curve.s_values() < 0))
print()
print(f"{n_neg} points beyond the first lobe carry the opposite sign")
print(f"first zero of the fitted lobe at P2 = {np.pi / fit.b:.2f}")
