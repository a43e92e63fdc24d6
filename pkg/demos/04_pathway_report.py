"""Why the echo sits at one eighth of the revival period.

Count the Raman step sequences that move a thermal population onto one
observed coherence: one step during the first pulse, two during the
second.  Between the pulses each sequence parks in a different
intermediate coherence and picks up a different phase.  The pair of
intermediates straddling the start population separates by exactly
8 * B_ang * dtau, independent of J, so every rung of the ladder votes
the same way at the same separations: fully constructive at odd
eighths of the revival period, fully destructive at quarters.
"""

from rotecho import (
    enumerate_pathways,
    molecule_preset,
    pathway_phase_difference,
    pathway_table,
    predict_constructive_delays,
    revival_period,
)

mol = molecule_preset("OCS")
t_rev = revival_period(mol)

start, target = 4, (6, 4)
paths = enumerate_pathways(start, target)
print(f"{len(paths)} sequences from population J={start} to coherence {target}")
print()
print(pathway_table(paths, t_rev / 8.0, mol))

up = next(p for p in paths if p.intermediate == (start, start + 2))
down = next(p for p in paths if p.intermediate == (start - 2, start))
for frac in (1 / 16, 1 / 8, 3 / 16, 1 / 4):
    dphi = pathway_phase_difference(up, down, frac * t_rev, mol)
    print(f"phase split at dtau = {frac:.4f} T_rev: {dphi:.4f} rad"
          f"  ({dphi / 3.141592653589793:.2f} pi)")

# same count and step labels two rungs up: the argument is J-free
shifted = enumerate_pathways(start + 2, (target[0] + 2, target[1] + 2))
assert sorted(p.label() for p in shifted) == sorted(p.label() for p in paths)
print()
print("constructive separations (ps):",
      ", ".join(f"{d:.2f}" for d in predict_constructive_delays(mol, 3)))
