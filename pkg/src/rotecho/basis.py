"""Rigid-rotor basis, operators and thermal states.

Conventions used throughout the package:

* time is measured in picoseconds, angular frequency in rad/ps;
* the rotational constant B is given in 1/cm and the level energy is
  expressed as an angular frequency, w_J = 2*pi*c*B*J*(J+1) with c in
  cm/ps;
* the laser couples to the molecular axis through cos^2(theta), which
  conserves m and changes J by 0 or +-2, so the density matrix is block
  diagonal in m;
* only m >= 0 blocks are stored.  Every observable and trace sums the
  blocks with degeneracy weight 1 for m = 0 and 2 for m > 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import c as _C_M_PER_S, h as _H, k as _KB

# Speed of light in cm/ps: converts B [1/cm] into optical cycles per ps.
C_CM_PER_PS = _C_M_PER_S * 100.0 * 1e-12

# Angular frequency per unit wavenumber, rad/ps per 1/cm.
RAD_PS_PER_CM = 2.0 * math.pi * C_CM_PER_PS

# hc/k_B in cm*K: converts a wavenumber into a temperature.
CM_KELVIN = _H * (_C_M_PER_S * 100.0) / _KB


@dataclass(frozen=True)
class MoleculeSpec:
    """Linear-rotor parameters.

    Attributes:
        b_cm: rotational constant B in 1/cm.
        delta_alpha: polarizability anisotropy in arbitrary units.  It
            enters the dynamics only through the dimensionless kick
            strength of a pulse, so the value here is metadata that a
            caller may use to convert pulse energies into kicks.
        temperature_k: rotational temperature in kelvin.
        weight_even: nuclear-spin statistical weight of even-J levels.
        weight_odd: nuclear-spin statistical weight of odd-J levels.
        name: display label.
    """

    b_cm: float
    delta_alpha: float = 1.0
    temperature_k: float = 296.0
    weight_even: float = 1.0
    weight_odd: float = 1.0
    name: str = ""

    def __post_init__(self) -> None:
        if self.b_cm <= 0.0:
            raise ValueError("rotational constant must be positive")
        if self.temperature_k < 0.0:
            raise ValueError("temperature must be non-negative")
        if self.weight_even < 0.0 or self.weight_odd < 0.0:
            raise ValueError("spin weights must be non-negative")
        if self.weight_even == 0.0 and self.weight_odd == 0.0:
            raise ValueError("at least one spin weight must be positive")

    def spin_weight(self, j: int) -> float:
        return self.weight_even if j % 2 == 0 else self.weight_odd


def rotational_energy(j: int, molecule: MoleculeSpec) -> float:
    """Level energy as an angular frequency, rad/ps.

    E_J/hbar = 2*pi*c*B*J*(J+1).
    """
    if j < 0:
        raise ValueError("J must be non-negative")
    return RAD_PS_PER_CM * molecule.b_cm * j * (j + 1)


def revival_period(molecule: MoleculeSpec) -> float:
    """Rotational revival period 1/(2*B*c) in ps.

    All J,J+-2 coherence frequencies are integer multiples of
    2*pi/T_rev, so any post-pulse trace is T_rev periodic.
    """
    return 1.0 / (2.0 * molecule.b_cm * C_CM_PER_PS)


def cos2theta_element(j: int, jp: int, m: int) -> float:
    """Matrix element <J m|cos^2 theta|J' m>.

    Real and symmetric in (J, J'); nonzero only for |J - J'| in {0, 2}.
    Independent of the sign of m.
    """
    m = abs(m)
    if j < 0 or jp < 0:
        raise ValueError("J values must be non-negative")
    if j < m or jp < m:
        raise ValueError("need J >= |m| on both sides")
    if j > jp:
        j, jp = jp, j
    if jp == j:
        num = j * (j + 1) - 3 * m * m
        den = (2 * j - 1) * (2 * j + 3)
        return 1.0 / 3.0 + (2.0 / 3.0) * (num / den)
    if jp == j + 2:
        num = ((j + 1) ** 2 - m * m) * ((j + 2) ** 2 - m * m)
        den = (2 * j + 1) * (2 * j + 5)
        return math.sqrt(num / den) / (2 * j + 3)
    return 0.0


class RotorBasis:
    """Truncated |J, m> basis with per-m blocks, J = |m| .. j_max.

    Instances are immutable value objects: all stored arrays are marked
    read-only, so a basis can be shared freely between scan workers.
    Eigendecompositions of the coupling blocks are cached lazily; they
    are what makes repeated pulse applications cheap.
    """

    def __init__(self, j_max: int):
        if j_max < 2:
            raise ValueError("j_max must be at least 2")
        self.j_max = int(j_max)
        self._cos2_blocks: list[np.ndarray] = []
        for m in range(self.j_max + 1):
            js = np.arange(m, self.j_max + 1)
            n = js.size
            block = np.zeros((n, n))
            block[np.arange(n), np.arange(n)] = [
                cos2theta_element(j, j, m) for j in js
            ]
            off = np.array([cos2theta_element(j, j + 2, m) for j in js[:-2]])
            if off.size:
                idx = np.arange(off.size)
                block[idx, idx + 2] = off
                block[idx + 2, idx] = off
            block.setflags(write=False)
            self._cos2_blocks.append(block)
        self._eig_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def __repr__(self) -> str:  # pragma: no cover
        return f"RotorBasis(j_max={self.j_max})"

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RotorBasis) and other.j_max == self.j_max

    def __hash__(self) -> int:
        return hash(("RotorBasis", self.j_max))

    def block_dim(self, m: int) -> int:
        return self.j_max - m + 1

    def j_values(self, m: int) -> np.ndarray:
        """J quantum numbers carried by block m."""
        return np.arange(m, self.j_max + 1)

    def cos2_block(self, m: int) -> np.ndarray:
        """cos^2(theta) restricted to block m (real symmetric, banded)."""
        return self._cos2_blocks[m]

    def cos2_eigensystem(self, m: int) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues and orthonormal eigenvectors of cos2_block(m)."""
        cached = self._eig_cache.get(m)
        if cached is None:
            w, v = np.linalg.eigh(self._cos2_blocks[m])
            w.setflags(write=False)
            v.setflags(write=False)
            cached = (w, v)
            self._eig_cache[m] = cached
        return cached

    def omegas(self, molecule: MoleculeSpec) -> np.ndarray:
        """Level angular frequencies w_J for J = 0 .. j_max, rad/ps."""
        js = np.arange(self.j_max + 1)
        return RAD_PS_PER_CM * molecule.b_cm * js * (js + 1.0)


@dataclass(frozen=True)
class MBlockDensityMatrix:
    """Density matrix stored as m >= 0 blocks.

    blocks[m] is the complex Hermitian matrix over J = m .. j_max.  The
    physical trace weights block m with degeneracy 2 - delta(m, 0); the
    thermal builder normalizes so that this weighted trace is 1.
    Operations never mutate a state, they return fresh instances.
    """

    basis: RotorBasis
    molecule: MoleculeSpec
    blocks: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if len(self.blocks) != self.basis.j_max + 1:
            raise ValueError("one block per m = 0 .. j_max required")
        for m, block in enumerate(self.blocks):
            n = self.basis.block_dim(m)
            if block.shape != (n, n):
                raise ValueError(f"block m={m} must have shape ({n}, {n})")
            block.setflags(write=False)

    @staticmethod
    def degeneracy(m: int) -> float:
        return 1.0 if m == 0 else 2.0

    def weighted_trace(self) -> float:
        return float(
            sum(
                self.degeneracy(m) * np.trace(b).real
                for m, b in enumerate(self.blocks)
            )
        )

    def purity(self) -> float:
        """Degeneracy-weighted Tr(rho^2)."""
        return float(
            sum(
                self.degeneracy(m) * np.vdot(b, b).real
                for m, b in enumerate(self.blocks)
            )
        )

    def hermiticity_defect(self) -> float:
        """Largest |rho - rho^dagger| entry over all blocks."""
        return float(
            max(
                np.abs(b - b.conj().T).max() if b.size else 0.0
                for b in self.blocks
            )
        )

    def validate(
        self,
        trace_tol: float = 1e-9,
        herm_tol: float = 1e-10,
        eig_floor: float = -1e-10,
    ) -> None:
        """Raise ToleranceError if the state is not a physical density matrix."""
        from .errors import ToleranceError

        defect = self.hermiticity_defect()
        if defect > herm_tol:
            raise ToleranceError(f"hermiticity defect {defect:.3e} > {herm_tol:.1e}")
        tr = self.weighted_trace()
        if abs(tr - 1.0) > trace_tol:
            raise ToleranceError(f"weighted trace {tr!r} deviates from 1")
        for m, block in enumerate(self.blocks):
            lo = float(np.linalg.eigvalsh(block).min())
            if lo < eig_floor:
                raise ToleranceError(f"block m={m} has eigenvalue {lo:.3e}")

    def copy_blocks(self) -> list[np.ndarray]:
        """Writable copies of the blocks, for propagation kernels."""
        return [np.array(b) for b in self.blocks]


def boltzmann_exponents(molecule: MoleculeSpec, j_values: np.ndarray) -> np.ndarray:
    """E_J/(k_B T) for the given J values (dimensionless)."""
    if molecule.temperature_k == 0.0:
        raise ValueError("undefined at zero temperature")
    jv = np.asarray(j_values, dtype=float)
    return CM_KELVIN * molecule.b_cm * jv * (jv + 1.0) / molecule.temperature_k


def _level_weights(molecule: MoleculeSpec, j_max: int) -> np.ndarray:
    """Unnormalized per-(J, m) thermal weights for J = 0 .. j_max."""
    js = np.arange(j_max + 1)
    spin = np.where(js % 2 == 0, molecule.weight_even, molecule.weight_odd)
    if molecule.temperature_k == 0.0:
        w = np.zeros(j_max + 1)
        w[int(js[spin > 0][0])] = 1.0
        return w
    return spin * np.exp(-boltzmann_exponents(molecule, js))


def thermal_state(
    molecule: MoleculeSpec,
    basis: RotorBasis,
    truncation_tol: float = 1e-8,
) -> MBlockDensityMatrix:
    """Boltzmann-populated diagonal state over the truncated basis.

    Populations are proportional to the spin weight times
    exp(-E_J/(k_B T)) and identical for every m within a J level.  The
    partition sum runs over the truncated basis including m degeneracy,
    so the degeneracy-weighted trace is exactly 1.

    Raises:
        TruncationError: if the degeneracy-weighted population of the
            top level J = j_max exceeds ``truncation_tol``, which
            signals that the basis is too small for this temperature.
    """
    from .errors import TruncationError

    w = _level_weights(molecule, basis.j_max)
    degeneracy = 2.0 * np.arange(basis.j_max + 1) + 1.0
    z = float(np.sum(w * degeneracy))
    p = w / z

    top = p[basis.j_max] * degeneracy[basis.j_max]
    if top > truncation_tol:
        raise TruncationError(
            f"population {top:.3e} at J = {basis.j_max} exceeds "
            f"tolerance {truncation_tol:.1e}; increase j_max"
        )

    blocks = []
    for m in range(basis.j_max + 1):
        diag = p[m:].astype(complex)
        blocks.append(np.diag(diag))
    return MBlockDensityMatrix(basis=basis, molecule=molecule, blocks=tuple(blocks))


def choose_jmax(
    molecule: MoleculeSpec,
    max_kick: float,
    tolerance: float = 1e-8,
) -> int:
    """Smallest basis size that holds the thermal band plus kick headroom.

    The thermal edge is the smallest J above which the fractional
    population is below ``tolerance``.  On top of that a ladder-climbing
    margin of 4*ceil(max_kick) + 8 levels is reserved, because each unit
    of kick strength can push coherence a few Delta-J = 2 rungs upward.
    A floor of 10 keeps degenerate cases (cold molecule, no kick) in a
    regime where the operators are still well formed.
    """
    if max_kick < 0.0:
        raise ValueError("max_kick must be non-negative")
    if not 0.0 < tolerance < 1.0:
        raise ValueError("tolerance must be in (0, 1)")
    margin = 4 * math.ceil(max_kick) + 8

    if molecule.temperature_k == 0.0:
        j_edge = 0 if molecule.weight_even > 0 else 1
        return max(j_edge + margin, 10)

    # Extend the ladder until the tail mass has clearly converged.
    j_cap = 64
    while True:
        w = _level_weights(molecule, j_cap)
        deg = 2.0 * np.arange(j_cap + 1) + 1.0
        mass = w * deg
        if mass[-1] < 1e-18 * mass.max():
            break
        j_cap *= 2
    total = float(mass.sum())
    tail = np.cumsum(mass[::-1])[::-1] / total  # tail[j] = population at J >= j
    above = np.concatenate([tail[1:], [0.0]])   # population strictly above J
    j_edge = int(np.argmax(above < tolerance))
    return max(j_edge + margin, 10)
