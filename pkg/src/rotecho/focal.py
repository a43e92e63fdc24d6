"""Transverse averaging over the focal volume of the pump beams.

Molecules at different radii in the pump focus feel different kick
strengths, and the probe reads a Gaussian-weighted mixture of their
responses.  Strong-kick structure in the second-pulse dependence (the
sign flip and the oscillations beyond the first lobe) lives at
different nominal kicks for different radii, so the mixture washes it
out; the weak-kick regime only rescales.

Averaging runs over the full alignment traces, not over extracted
amplitudes: the probe measures one summed birefringence signal, and
phase-flipped contributions from different shells must cancel inside
the trace before any peak is picked.  Radial integration reduces to a
one-dimensional quadrature in the local intensity fraction
u = exp(-2r^2/w_pump^2), distributed as u^(kappa-1) du with
kappa = (w_pump/w_probe)^2, which Gauss-Jacobi nodes integrate exactly
for polynomial responses.  Both pulses travel the same path, so one
fraction scales both kicks.

Only the transverse profile is modeled.  The crossed-beam geometry
keeps the interaction length short enough that longitudinal variation
is a smaller effect than the radial one, and no measured waists exist
for this setup anyway: the default geometry is a placeholder for
qualitative studies and is labeled as nominal in output metadata.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .basis import RotorBasis
from .echo import (
    _WORKER_BASES,
    EchoCurve,
    EchoMeasurement,
    _isolated_trace,
    _point_config,
    echo_window_halfwidth,
    extract_secho,
)
from .errors import ToleranceError, WindowError
from .propagate import AlignmentTrace, ExperimentConfig, run_two_pulse

# Placeholder waists in micrometres (probe half the pump).  Qualitative
# studies only; outputs produced with these carry a nominal-geometry note.
DEFAULT_PUMP_WAIST_UM = 30.0
DEFAULT_PROBE_WAIST_UM = 15.0


@dataclass(frozen=True)
class BeamGeometry:
    """Transverse beam geometry: pump and probe waists in micrometres."""

    pump_waist: float
    probe_waist: float
    n_shells: int = 8

    def __post_init__(self) -> None:
        if self.pump_waist <= 0.0 or self.probe_waist <= 0.0:
            raise ValueError("waists must be positive")
        if self.n_shells < 1:
            raise ValueError("n_shells must be at least 1")

    @property
    def kappa(self) -> float:
        """Pump-to-probe waist ratio squared; the only number that enters."""
        return (self.pump_waist / self.probe_waist) ** 2

    @classmethod
    def nominal(cls, n_shells: int = 8) -> "BeamGeometry":
        return cls(DEFAULT_PUMP_WAIST_UM, DEFAULT_PROBE_WAIST_UM, n_shells)


def _gauss_jacobi_unit(n: int, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """Gauss nodes and normalized weights for the weight (1+x)^beta on [-1, 1].

    Golub-Welsch on the symmetric recurrence matrix.  The library
    routine for these nodes scales its weights by the distribution's
    total mass, computed through gamma functions that overflow once
    beta reaches a few hundred; the probe -> 0 limit needs beta ~ 1e8,
    and normalized weights never need the mass at all.
    """
    diag = np.empty(n)
    diag[0] = beta / (beta + 2.0)
    if n == 1:
        return diag, np.ones(1)
    k = np.arange(1.0, n)
    diag[1:] = beta**2 / ((2.0 * k + beta) * (2.0 * k + beta + 2.0))
    off_sq = (
        4.0 * k * k * (k + beta) ** 2
        / ((2.0 * k + beta) ** 2 * (2.0 * k + beta + 1.0) * (2.0 * k + beta - 1.0))
    )
    nodes, vectors = eigh_tridiagonal(diag, np.sqrt(off_sq))
    weights = vectors[0] ** 2
    return nodes, weights / np.sum(weights)


def intensity_quadrature(geometry: BeamGeometry) -> list[tuple[float, float]]:
    """Quadrature nodes (intensity_fraction, weight) over the focal profile.

    The probe-weighted radial integral of any response g becomes
    integral of g(u) u^(kappa-1) du over (0, 1]; the returned nodes and
    weights integrate it exactly for g polynomial up to degree
    2*n_shells - 1.  Weights are normalized to sum to one, so a
    constant response averages to itself.  One shell collapses to the
    weight-centroid fraction kappa/(kappa+1); a vanishing probe waist
    pushes every node toward on-axis sampling (u = 1).
    """
    x, w = _gauss_jacobi_unit(geometry.n_shells, geometry.kappa - 1.0)
    u = 0.5 * (x + 1.0)
    order = np.argsort(u)
    return [(float(u[i]), float(w[i])) for i in order]


def _averaged_point(
    base: ExperimentConfig,
    p1_kick: float,
    p2_kick: float,
    dtau: float,
    nodes: list[tuple[float, float]],
    halfwidth: float | None,
    isolate: bool,
    basis: RotorBasis,
    first_pulse_cache: dict | None = None,
) -> EchoMeasurement:
    w_eff = echo_window_halfwidth(dtau, base.molecule, halfwidth)
    nominal = _point_config(base, p1_kick, p2_kick, dtau)
    times = None
    acc = None
    # fixed node order keeps the reduction bit-stable across runs
    for fraction, weight in nodes:
        cfg = _point_config(base, fraction * p1_kick, fraction * p2_kick, dtau)
        if isolate:
            trace = _isolated_trace(cfg, basis, first_pulse_cache)
        else:
            trace = run_two_pulse(cfg, basis=basis)
        if acc is None:
            times = trace.times
            acc = weight * trace.values
        else:
            acc = acc + weight * trace.values
    averaged = AlignmentTrace(times=times, values=acc, config=nominal)
    return extract_secho(averaged, dtau, w_eff)


def _pool_averaged(args) -> EchoMeasurement | tuple[float, str]:
    base, p1_kick, p2_kick, dtau, nodes, halfwidth, isolate = args
    j_max = _point_config(base, p1_kick, p2_kick, dtau).resolve_j_max()
    basis = _WORKER_BASES.get(j_max)
    if basis is None:
        basis = _WORKER_BASES.setdefault(j_max, RotorBasis(j_max))
    try:
        return _averaged_point(
            base, p1_kick, p2_kick, dtau, nodes, halfwidth, isolate, basis
        )
    except (WindowError, ToleranceError) as exc:
        return (p2_kick, str(exc))


def averaged_scan_p2(
    p2_values,
    p1_kick: float,
    dtau: float,
    geometry: BeamGeometry,
    base_config: ExperimentConfig,
    *,
    window_halfwidth: float | None = None,
    isolate: bool = True,
    workers: int = 1,
    basis: RotorBasis | None = None,
) -> EchoCurve:
    """Second-pulse scan with focal-volume averaging at every point.

    Runs the same grid as the plain scan, but each point simulates all
    quadrature shells with both kicks scaled by the local intensity
    fraction and extracts the amplitude from the weighted-average
    trace.  The nominal (on-axis) kicks are what the returned points
    report.  A single on-axis shell reproduces the unaveraged scan.
    """
    values = sorted(float(v) for v in p2_values)
    if not values:
        raise ValueError("empty scan grid")
    if values[0] < 0.0:
        raise ValueError("kick strengths must be non-negative")
    nodes = intensity_quadrature(geometry)

    points: list[EchoMeasurement] = []
    failures: list[tuple[float, str]] = []
    # pin one basis size (set by the top of the grid) into the configs
    # so pooled and serial runs produce bit-identical numbers
    top = _point_config(base_config, p1_kick, values[-1], dtau)
    j_common = basis.j_max if basis is not None else top.resolve_j_max()
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        pinned = replace(base_config, j_max=j_common)
        packed = [
            (pinned, p1_kick, p2, dtau, nodes, window_halfwidth, isolate)
            for p2 in values
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for res in pool.map(_pool_averaged, packed):
                if isinstance(res, EchoMeasurement):
                    points.append(res)
                else:
                    failures.append(res)
    else:
        if basis is None:
            basis = RotorBasis(j_common)
        cache: dict = {}
        for p2 in values:
            try:
                points.append(
                    _averaged_point(
                        base_config,
                        p1_kick,
                        p2,
                        dtau,
                        nodes,
                        window_halfwidth,
                        isolate,
                        basis,
                        cache,
                    )
                )
            except (WindowError, ToleranceError) as exc:
                failures.append((p2, str(exc)))
    points.sort(key=lambda m: m.p2_kick)
    return EchoCurve(
        scan_axis="p2_kick", points=tuple(points), failures=tuple(failures)
    )


def first_minimum_depth(curve: EchoCurve) -> float:
    """Drop from the |s| peak to the first local minimum after it.

    The washout diagnostic: focal averaging fills in the deep minimum
    at the sign flip, so this depth shrinks as the probe samples more
    of the focal volume.  If the tail never turns back up inside the
    grid, the drop to the lowest tail point is returned instead.
    """
    mag = np.abs(curve.s_values())
    if mag.size < 3:
        raise ValueError("need at least three points past-the-peak structure")
    i_peak = int(np.argmax(mag))
    tail = mag[i_peak:]
    if tail.size < 2:
        raise ValueError("peak sits at the end of the grid; extend the scan")
    i_min = None
    for k in range(1, tail.size - 1):
        if tail[k] <= tail[k - 1] and tail[k] < tail[k + 1]:
            i_min = k
            break
    if i_min is None:
        i_min = int(np.argmin(tail))
    return float(tail[0] - tail[i_min])
