"""Echo amplitude extraction and the delay / second-pulse parameter scans.

The rephased transient appears at twice the pulse separation.  Its
scalar amplitude is the peak-to-peak difference inside a window centred
on that time, signed positive when the maximum comes before the minimum
(phase-inverted transients come out negative).

Measuring the transient on the bare two-pulse trace works when it
dominates everything else under the window, which holds for kick
strengths around unity and separations well inside a revival quadrant.
Outside that regime the window also picks up the slowly decaying
single-pulse response, which swamps the cross term: the rephased signal
scales as p1*p2**2 while the single-pulse background scales as the kick
itself.  The scan drivers therefore subtract the two single-pulse
traces by default (``isolate=True``), which removes every
delay-independent term and leaves the rephased transient on a flat
baseline; pass ``isolate=False`` to measure the raw trace instead.
``extract_secho`` itself never simulates anything and measures whatever
trace it is handed.

Delay grids need two guards, both exposed as module constants: the
window must not reach back into the second pulse's prompt response, and
separations within a few percent of a quarter revival produce a
genuinely degraded rephasing (the echo rides on the fundamental revival
structure there), so ``dtau_grid`` drops them.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import OptimizeWarning, curve_fit, minimize_scalar

from .basis import MoleculeSpec, RotorBasis, revival_period
from .errors import BracketError, FitError, ToleranceError, WindowError
from .propagate import (
    TRACE_TAIL_FRACTION,
    AlignmentTrace,
    ExperimentConfig,
    run_pulse_sequence,
    run_two_pulse,
    two_pulse_config,
)

# Default halfwidth of the extraction window, as a fraction of T_rev.
DEFAULT_WINDOW_FRACTION = 0.03

# The window's left edge is kept at least this far (fraction of T_rev)
# after the second pulse; closer in, the prompt response has not decayed.
WINDOW_GUARD_FRACTION = 0.012

# Delays closer than this (fraction of T_rev) to a quarter-revival
# multiple are dropped by dtau_grid: the rephasing efficiency is
# measurably degraded there even after background isolation.
EXCLUSION_HALFWIDTH_FRACTION = 0.035

# Smallest usable pulse separation, as a fraction of T_rev.
MIN_DTAU_FRACTION = 0.02

# Window spans with total swing below this count as flat (no echo).
FLAT_TRACE_FLOOR = 1e-14

_SCAN_AXES = ("dtau", "p2_kick")


@dataclass(frozen=True)
class EchoMeasurement:
    """One extracted echo amplitude and where its extremal pair sits."""

    dtau: float
    p1_kick: float
    p2_kick: float
    s_echo: float
    t_max: float
    t_min: float

    @property
    def magnitude(self) -> float:
        return abs(self.s_echo)

    @property
    def sign(self) -> int:
        if self.s_echo == 0.0:
            return 0
        return 1 if self.s_echo > 0 else -1


@dataclass(frozen=True)
class Sin2Fit:
    """Parameters of s = a*sin(b*p2)**2 over the first lobe."""

    a: float
    b: float
    residual: float
    n_points: int

    def value(self, p2: float | np.ndarray) -> float | np.ndarray:
        return self.a * np.sin(self.b * np.asarray(p2)) ** 2


@dataclass(frozen=True)
class EchoCurve:
    """Echo amplitudes along one scan axis, with optional attached fit.

    ``failures`` records per-point extraction problems as
    (axis value, message) pairs; failed points are simply absent from
    ``points``.
    """

    scan_axis: str
    points: tuple[EchoMeasurement, ...]
    fit: Sin2Fit | None = None
    failures: tuple[tuple[float, str], ...] = ()

    def __post_init__(self) -> None:
        if self.scan_axis not in _SCAN_AXES:
            raise ValueError(f"scan_axis must be one of {_SCAN_AXES}")
        ax = self.axis_values()
        if np.any(np.diff(ax) < 0):
            raise ValueError("curve points must be sorted on the scan axis")
        if self.fit is not None and self.scan_axis != "p2_kick":
            raise ValueError("fits only attach to p2 scans")

    def axis_values(self) -> np.ndarray:
        if self.scan_axis == "dtau":
            return np.array([p.dtau for p in self.points])
        return np.array([p.p2_kick for p in self.points])

    def s_values(self) -> np.ndarray:
        return np.array([p.s_echo for p in self.points])

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class MasterCurveResult:
    """Per-curve axis rescale factors and the pooled collapse residual."""

    factors: tuple[float, ...]
    residual: float
    reference_index: int


@dataclass(frozen=True)
class DecayFit:
    """Exponential decay of peak echo amplitude versus echo time 2*dtau."""

    rate: float
    amplitude: float
    residual: float
    negative: bool


def echo_window_halfwidth(
    dtau: float,
    molecule: MoleculeSpec,
    requested: float | None = None,
) -> float:
    """Halfwidth actually usable at this separation.

    Clips the requested (or default 0.03*T_rev) halfwidth so the window
    stays clear of the second pulse by WINDOW_GUARD_FRACTION*T_rev.
    """
    t_rev = revival_period(molecule)
    w = DEFAULT_WINDOW_FRACTION * t_rev if requested is None else float(requested)
    if w <= 0.0:
        raise WindowError("window halfwidth must be positive")
    w_eff = min(w, dtau - WINDOW_GUARD_FRACTION * t_rev)
    if w_eff <= 0.0:
        raise WindowError(
            f"separation {dtau:.3f} ps leaves no room for an extraction window "
            f"(guard {WINDOW_GUARD_FRACTION:.3f}*T_rev)"
        )
    return w_eff


def dtau_grid(
    molecule: MoleculeSpec,
    start: float,
    stop: float,
    count: int,
    *,
    exclusion_halfwidth: float | None = None,
    min_dtau: float | None = None,
) -> np.ndarray:
    """Equidistant separations with the quarter-revival zones removed.

    Points within ``exclusion_halfwidth`` (default 0.035*T_rev) of any
    n*T_rev/4 are dropped, as are points below ``min_dtau`` (default
    0.02*T_rev), so the returned grid can be shorter than ``count``.
    """
    t_rev = revival_period(molecule)
    if not 0.0 < start < stop:
        raise ValueError("need 0 < start < stop")
    if count < 2:
        raise ValueError("need at least two grid points")
    excl = EXCLUSION_HALFWIDTH_FRACTION * t_rev if exclusion_halfwidth is None else exclusion_halfwidth
    floor = MIN_DTAU_FRACTION * t_rev if min_dtau is None else min_dtau
    grid = np.linspace(start, stop, count)
    keep = grid >= floor
    # Nearest quarter-revival multiple, n >= 1; separations near zero are
    # governed by the floor and the window guard, not by this zone.
    n_quarters = np.maximum(np.rint(grid / (0.25 * t_rev)), 1.0)
    keep &= np.abs(grid - n_quarters * 0.25 * t_rev) >= excl
    out = grid[keep]
    if out.size == 0:
        raise ValueError("no separations survive the exclusion zones")
    return out


def extract_secho(
    trace: AlignmentTrace,
    dtau: float,
    window_halfwidth: float | None = None,
) -> EchoMeasurement:
    """Signed peak-to-peak amplitude in the window around t = 2*dtau.

    The window is [2*dtau - w, 2*dtau + w] and must lie inside the
    trace.  Sign is +1 when the maximum precedes the minimum.  A swing
    below FLAT_TRACE_FLOOR reports zero.  The measurement is taken on
    the trace exactly as given; see the module docstring for when a
    background-isolated trace is the right input.
    """
    molecule = trace.config.molecule
    t_rev = revival_period(molecule)
    w = DEFAULT_WINDOW_FRACTION * t_rev if window_halfwidth is None else float(window_halfwidth)
    if w <= 0.0:
        raise WindowError("window halfwidth must be positive")
    lo, hi = 2.0 * dtau - w, 2.0 * dtau + w
    if lo < trace.times[0] - 1e-12 or hi > trace.times[-1] + 1e-12:
        raise WindowError(
            f"window [{lo:.3f}, {hi:.3f}] ps falls outside the trace "
            f"[{trace.times[0]:.3f}, {trace.times[-1]:.3f}] ps"
        )
    tw, vw = trace.window(lo, hi)
    if tw.size < 3:
        raise WindowError("window contains fewer than 3 samples")

    pulses = trace.config.pulses
    p1_kick = pulses[0].kick if len(pulses) == 2 else math.nan
    p2_kick = pulses[1].kick if len(pulses) == 2 else math.nan

    i_max = int(np.argmax(vw))
    i_min = int(np.argmin(vw))
    swing = float(vw[i_max] - vw[i_min])
    if swing < FLAT_TRACE_FLOOR:
        s = 0.0
    else:
        s = swing if tw[i_max] < tw[i_min] else -swing
    return EchoMeasurement(
        dtau=float(dtau),
        p1_kick=p1_kick,
        p2_kick=p2_kick,
        s_echo=s,
        t_max=float(tw[i_max]),
        t_min=float(tw[i_min]),
    )


def _isolated_trace(
    config: ExperimentConfig,
    basis: RotorBasis,
    first_pulse_cache: dict | None = None,
) -> AlignmentTrace:
    """Isolation workhorse; optionally caches the first-pulse-only trace
    (it is identical across the points of a p2 scan)."""
    full = run_two_pulse(config, basis=basis)
    p1 = config.pulses[0]
    key = (p1.kick, p1.shape, p1.duration_fwhm, config.t_end, config.dt_sample)
    v1 = None if first_pulse_cache is None else first_pulse_cache.get(key)
    if v1 is None:
        v1 = run_pulse_sequence(replace(config, pulses=config.pulses[:1]), basis=basis).values
        if first_pulse_cache is not None:
            first_pulse_cache[key] = v1
    v2 = run_pulse_sequence(replace(config, pulses=config.pulses[1:]), basis=basis).values
    # traces store alignment minus 1/3, so the cross term is a plain
    # difference and sits on the same zero baseline as any other trace
    values = full.values - v1 - v2
    return AlignmentTrace(times=full.times, values=values, config=config)


def run_isolated_echo(
    config: ExperimentConfig,
    basis: RotorBasis | None = None,
) -> AlignmentTrace:
    """Two-pulse trace minus both single-pulse traces.

    Removes every term that depends on only one of the pulses (prompt
    response, ring-down, revivals), leaving the cross term that carries
    the rephased transient on a zero baseline.  Exact zero when either
    kick is zero.
    """
    if len(config.pulses) != 2:
        raise ValueError("isolation needs exactly two pulses")
    if basis is None:
        basis = RotorBasis(config.resolve_j_max())
    return _isolated_trace(config, basis)


def _point_config(
    base: ExperimentConfig,
    p1_kick: float,
    p2_kick: float,
    dtau: float,
) -> ExperimentConfig:
    """Two-pulse config for one scan point, inheriting solver settings.

    Pulse shapes and durations come from the template's first two
    pulses; t_end always tracks the echo position of *this* point.
    """
    if len(base.pulses) >= 2:
        shapes = (base.pulses[0].shape, base.pulses[1].shape)
        durations = (base.pulses[0].duration_fwhm, base.pulses[1].duration_fwhm)
    elif len(base.pulses) == 1:
        shapes = (base.pulses[0].shape,) * 2
        durations = (base.pulses[0].duration_fwhm,) * 2
    else:
        shapes = ("impulsive", "impulsive")
        durations = (0.1, 0.1)
    cfg = two_pulse_config(
        base.molecule,
        p1_kick,
        p2_kick,
        dtau,
        shape=shapes[0],
        duration_fwhm=durations[0],
        dt_sample=base.dt_sample,
        j_max=base.j_max,
        solver=base.solver,
    )
    if shapes[1] != shapes[0] or durations[1] != durations[0]:
        second = replace(cfg.pulses[1], shape=shapes[1], duration_fwhm=durations[1])
        cfg = replace(cfg, pulses=(cfg.pulses[0], second))
    return cfg


def _measure_point(
    cfg: ExperimentConfig,
    dtau: float,
    halfwidth: float | None,
    isolate: bool,
    basis: RotorBasis,
    first_pulse_cache: dict | None = None,
) -> EchoMeasurement:
    w_eff = echo_window_halfwidth(dtau, cfg.molecule, halfwidth)
    if isolate:
        trace = _isolated_trace(cfg, basis, first_pulse_cache)
    else:
        trace = run_two_pulse(cfg, basis=basis)
    return extract_secho(trace, dtau, w_eff)


# Per-process basis cache for worker pools; one entry per j_max.
_WORKER_BASES: dict[int, RotorBasis] = {}


def _pool_point(
    args: tuple[ExperimentConfig, float, float, float | None, bool],
) -> EchoMeasurement | tuple[float, str]:
    cfg, dtau, axis_value, halfwidth, isolate = args
    j_max = cfg.resolve_j_max()
    basis = _WORKER_BASES.get(j_max)
    if basis is None:
        basis = _WORKER_BASES.setdefault(j_max, RotorBasis(j_max))
    try:
        return _measure_point(cfg, dtau, halfwidth, isolate, basis)
    except (WindowError, ToleranceError) as exc:
        return (axis_value, str(exc))


def _run_scan(
    tasks: list[tuple[ExperimentConfig, float, float]],
    halfwidth: float | None,
    isolate: bool,
    workers: int,
    basis: RotorBasis | None,
) -> tuple[list[EchoMeasurement], list[tuple[float, str]]]:
    """Scan driver over (config, dtau, axis value) tasks.

    Points are independent experiments; assembly is order-independent
    and failures are keyed by the scan-axis value.
    """
    points: list[EchoMeasurement] = []
    failures: list[tuple[float, str]] = []
    # all points share one basis size (the largest any of them needs),
    # so serial and pooled runs produce bit-identical numbers
    if tasks:
        j_common = (
            basis.j_max if basis is not None
            else max(cfg.resolve_j_max() for cfg, _, _ in tasks)
        )
    if workers > 1:
        packed = [
            (replace(cfg, j_max=j_common), dtau, ax, halfwidth, isolate)
            for cfg, dtau, ax in tasks
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for res in pool.map(_pool_point, packed):
                if isinstance(res, EchoMeasurement):
                    points.append(res)
                else:
                    failures.append(res)
    else:
        if basis is None and tasks:
            basis = RotorBasis(j_common)
        cache: dict = {}
        for cfg, dtau, ax in tasks:
            try:
                points.append(_measure_point(cfg, dtau, halfwidth, isolate, basis, cache))
            except (WindowError, ToleranceError) as exc:
                failures.append((ax, str(exc)))
    return points, failures


def scan_dtau(
    dtau_values: np.ndarray,
    p1_kick: float,
    p2_kick: float,
    base_config: ExperimentConfig,
    *,
    window_halfwidth: float | None = None,
    isolate: bool = True,
    workers: int = 1,
    basis: RotorBasis | None = None,
) -> EchoCurve:
    """Echo amplitude versus pulse separation at fixed kicks.

    The grid is taken as given apart from sorting; build it with
    dtau_grid() to respect the quarter-revival exclusion zones.
    Per-point window or tolerance problems are recorded in
    curve.failures rather than raised.
    """
    t_rev = revival_period(base_config.molecule)
    grid = np.sort(np.asarray(dtau_values, dtype=float))
    if grid.size == 0:
        raise ValueError("empty separation grid")
    if grid[0] <= 0.0 or grid[-1] >= t_rev:
        raise ValueError("separations must lie strictly inside (0, T_rev)")
    tasks = [
        (_point_config(base_config, p1_kick, p2_kick, d), float(d), float(d)) for d in grid
    ]
    points, failures = _run_scan(tasks, window_halfwidth, isolate, workers, basis)
    points.sort(key=lambda m: m.dtau)
    return EchoCurve("dtau", tuple(points), fit=None, failures=tuple(failures))


def scan_p2(
    p2_values: np.ndarray,
    p1_kick: float,
    dtau: float,
    base_config: ExperimentConfig,
    *,
    window_halfwidth: float | None = None,
    isolate: bool = True,
    attach_fit: bool = True,
    lobe_limit: float | None = None,
    workers: int = 1,
    basis: RotorBasis | None = None,
) -> EchoCurve:
    """Echo amplitude versus second-pulse kick at fixed separation.

    A first-lobe sin**2 fit is attached when enough lobe points exist;
    a failed fit lands in curve.failures (axis value nan) instead of
    raising.
    """
    grid = np.sort(np.asarray(p2_values, dtype=float))
    if grid.size == 0:
        raise ValueError("empty kick grid")
    if grid[0] < 0.0:
        raise ValueError("kicks must be nonnegative")
    tasks = [
        (_point_config(base_config, p1_kick, float(p2), dtau), float(dtau), float(p2))
        for p2 in grid
    ]
    points, failures = _run_scan(tasks, window_halfwidth, isolate, workers, basis)
    points.sort(key=lambda m: m.p2_kick)
    curve = EchoCurve("p2_kick", tuple(points), fit=None, failures=tuple(failures))
    if attach_fit and len(curve) >= 6:
        try:
            fit = fit_sin2(curve, lobe_limit)
        except FitError as exc:
            failures.append((math.nan, f"sin2 fit: {exc}"))
            curve = EchoCurve("p2_kick", curve.points, fit=None, failures=tuple(failures))
        else:
            curve = EchoCurve("p2_kick", curve.points, fit=fit, failures=tuple(failures))
    return curve


def _first_lobe_count(s: np.ndarray) -> int:
    """Points belonging to the first lobe: up to the first sign change
    or the first local minimum of |s|, whichever comes first."""
    mag = np.abs(s)
    n = s.size
    for i in range(1, n):
        if s[i] < 0.0:
            return i
        if 1 <= i < n - 1 and mag[i] <= mag[i - 1] and mag[i] < mag[i + 1] and mag[i - 1] > 0:
            return i + 1
    return n


def fit_sin2(curve: EchoCurve, lobe_limit: float | None = None) -> Sin2Fit:
    """Least-squares a*sin(b*p2)**2 over the first lobe of a p2 scan.

    ``lobe_limit`` crops the lobe to kicks <= that value.  Needs at
    least 6 points.  residual = RMS misfit / a.
    """
    if curve.scan_axis != "p2_kick":
        raise ValueError("sin2 fit applies to p2 scans")
    x = curve.axis_values()
    y = curve.s_values()
    n_lobe = _first_lobe_count(y)
    x, y = x[:n_lobe], y[:n_lobe]
    if lobe_limit is not None:
        keep = x <= lobe_limit
        x, y = x[keep], y[keep]
    if x.size < 6:
        raise FitError(f"first lobe has {x.size} points; need at least 6")

    i_pk = int(np.argmax(y))
    y_pk = float(y[i_pk])
    if y_pk <= 0.0:
        raise FitError("first lobe has no positive amplitude to fit")
    if 0 < i_pk < x.size - 1:
        p0 = (y_pk, 0.5 * math.pi / x[i_pk])
    else:
        # Monotone rise: only a*b**2 is well determined (quadratic limit).
        p0 = (4.0 * y_pk, 0.5 / x[-1])

    def model(p2, a, b):
        return a * np.sin(b * p2) ** 2

    try:
        (a, b), _ = curve_fit(
            model, x, y, p0=p0, bounds=([0.0, 0.0], [np.inf, np.inf]),
            maxfev=20000, ftol=1e-13, xtol=1e-13,
        )
    except RuntimeError as exc:
        raise FitError(
            f"sin2 fit did not converge over {x.size} points "
            f"(span {x[0]:.3g}..{x[-1]:.3g}, p0={p0})"
        ) from exc
    residual = float(np.sqrt(np.mean((model(x, a, b) - y) ** 2)) / a)
    return Sin2Fit(a=float(a), b=float(b), residual=residual, n_points=int(x.size))


@dataclass(frozen=True)
class SearchParams:
    """Bracket and refinement settings for the optimal-p2 search."""

    p2_max: float = 8.0
    coarse_points: int = 12
    rel_tol: float = 1e-3
    max_extensions: int = 3

    def __post_init__(self) -> None:
        if self.p2_max <= 0 or self.coarse_points < 4:
            raise ValueError("need p2_max > 0 and at least 4 coarse points")
        if not 0 < self.rel_tol < 1:
            raise ValueError("rel_tol must be in (0, 1)")


def find_optimal_p2(
    dtau: float,
    p1_kick: float,
    base_config: ExperimentConfig,
    search_params: SearchParams | None = None,
    *,
    window_halfwidth: float | None = None,
    isolate: bool = True,
    basis: RotorBasis | None = None,
) -> tuple[float, float]:
    """First maximum of |s_echo| along p2: (p2_opt, s_echo there).

    Coarse grid over (0, p2_max], extended up to max_extensions times
    while |s| is still rising at the top, then golden-section to
    rel_tol in p2.  The single-pulse backgrounds are cached across
    evaluations.
    """
    sp = search_params or SearchParams()
    molecule = base_config.molecule
    w_eff = echo_window_halfwidth(dtau, molecule, window_halfwidth)

    template = _point_config(base_config, p1_kick, sp.p2_max, dtau)
    if basis is None:
        basis = RotorBasis(template.resolve_j_max())
    cache: dict = {}

    def measure(p2: float) -> float:
        cfg = replace(template, pulses=(
            template.pulses[0],
            replace(template.pulses[1], kick=float(p2)),
        ))
        if isolate:
            trace = _isolated_trace(cfg, basis, cache)
        else:
            trace = run_two_pulse(cfg, basis=basis)
        return extract_secho(trace, dtau, w_eff).s_echo

    # Coarse bracket: first interior maximum of |s|.
    grid = list(np.linspace(sp.p2_max / sp.coarse_points, sp.p2_max, sp.coarse_points))
    vals = [abs(measure(p2)) for p2 in grid]
    extensions = 0
    while True:
        k = next(
            (i for i in range(1, len(vals) - 1) if vals[i] >= vals[i - 1] and vals[i] >= vals[i + 1]),
            None,
        )
        if k is not None:
            lo, hi = grid[k - 1], grid[k + 1]
            break
        if extensions >= sp.max_extensions:
            raise BracketError(
                f"no interior |s_echo| maximum below p2 = {grid[-1]:.3g} "
                f"after {extensions} bracket extensions"
            )
        # Rising at the top: extend the grid, growing the basis with it.
        step = grid[1] - grid[0]
        new = [grid[-1] + step * (i + 1) for i in range(sp.coarse_points // 2)]
        wider = replace(template, pulses=(
            template.pulses[0],
            replace(template.pulses[1], kick=new[-1]),
        ))
        if wider.resolve_j_max() > basis.j_max:
            basis = RotorBasis(wider.resolve_j_max())
            cache.clear()
        grid.extend(new)
        vals.extend(abs(measure(p2)) for p2 in new)
        extensions += 1

    # Golden-section maximization of |s| on [lo, hi].
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - inv_phi * (hi - lo)
    d = lo + inv_phi * (hi - lo)
    fc, fd = abs(measure(c)), abs(measure(d))
    while hi - lo > sp.rel_tol * max(abs(lo), abs(hi)):
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - inv_phi * (hi - lo)
            fc = abs(measure(c))
        else:
            lo, c, fc = c, d, fd
            d = lo + inv_phi * (hi - lo)
            fd = abs(measure(d))
    p2_opt = 0.5 * (lo + hi)
    return float(p2_opt), float(measure(p2_opt))


def master_curve_check(
    curves: list[EchoCurve],
    reference_index: int | None = None,
) -> MasterCurveResult:
    """Collapse p2 scans onto a reference by linear axis rescaling.

    Each curve's kicks are divided by its factor before comparison, so
    a curve needing a wider p2 axis than the reference gets a factor
    above one.  Returns the factors (reference = 1) and the pooled RMS
    deviation relative to the reference peak.
    """
    if len(curves) < 2:
        raise ValueError("need at least two curves")
    for c in curves:
        if c.scan_axis != "p2_kick":
            raise ValueError("master-curve check applies to p2 scans")
        if len(c) < 6:
            raise ValueError("each curve needs at least 6 points")
    p1s = [c.points[0].p1_kick for c in curves]
    if max(p1s) - min(p1s) > 1e-9 * max(1.0, abs(p1s[0])):
        raise ValueError("curves must share the same first-pulse kick")

    if reference_index is None:
        reference_index = int(np.argmax([c.axis_values()[-1] for c in curves]))
    ref = curves[reference_index]
    xr, yr = ref.axis_values(), ref.s_values()
    peak = float(np.max(np.abs(yr)))
    if peak <= 0.0:
        raise ValueError("reference curve is flat")

    def peak_pos(c: EchoCurve) -> float:
        x, y = c.axis_values(), c.s_values()
        return float(x[np.argmax(np.abs(y))])

    factors: list[float] = []
    sq_sum = 0.0
    n_sum = 0
    for i, c in enumerate(curves):
        if i == reference_index:
            factors.append(1.0)
            continue
        x, y = c.axis_values(), c.s_values()
        f0 = peak_pos(c) / peak_pos(ref)

        def misfit(f: float) -> float:
            xs = x / f
            inside = (xs >= xr[0]) & (xs <= xr[-1])
            if inside.sum() < 6:
                return 1e9
            resid = y[inside] - np.interp(xs[inside], xr, yr)
            return float(np.mean(resid**2))

        res = minimize_scalar(misfit, bounds=(0.5 * f0, 2.0 * f0), method="bounded")
        f = float(res.x)
        xs = x / f
        inside = (xs >= xr[0]) & (xs <= xr[-1])
        if inside.sum() < 6:
            raise FitError(
                f"curve {i} keeps only {int(inside.sum())} points inside the "
                "reference span after rescaling"
            )
        resid = y[inside] - np.interp(xs[inside], xr, yr)
        sq_sum += float(np.sum(resid**2))
        n_sum += int(inside.sum())
        factors.append(f)
    residual = math.sqrt(sq_sum / n_sum) / peak if n_sum else 0.0
    return MasterCurveResult(
        factors=tuple(factors), residual=residual, reference_index=reference_index
    )


def fit_decay(
    measurements,
    model="exponential",
) -> DecayFit:
    """Decay rate of peak echo amplitude: s(dtau) = A*exp(-rate*2*dtau).

    ``measurements`` is a sequence of (dtau, s_echo_max) pairs; the echo
    appears at 2*dtau, so the rate is per unit echo time.  A custom
    two-parameter model(t, amplitude, rate) may be passed.  A negative
    fitted rate is flagged, not raised.
    """
    data = np.asarray(list(measurements), dtype=float)
    if data.ndim != 2 or data.shape[1] != 2 or data.shape[0] < 4:
        raise FitError("need at least 4 (dtau, s_echo_max) pairs")
    t = 2.0 * data[:, 0]
    y = data[:, 1]

    if model == "exponential":
        def model_fn(tt, amplitude, rate):
            return amplitude * np.exp(-rate * tt)
    elif callable(model):
        model_fn = model
    else:
        raise ValueError("model must be 'exponential' or a callable")

    pos = y > 0
    if pos.sum() >= 2:
        slope, intercept = np.polyfit(t[pos], np.log(y[pos]), 1)
        p0 = (math.exp(intercept), -slope)
    else:
        raise FitError("need at least two positive amplitudes")
    try:
        with warnings.catch_warnings():
            # rate ~ 0 makes the covariance rank-deficient; we discard it anyway
            warnings.simplefilter("ignore", OptimizeWarning)
            (amplitude, rate), _ = curve_fit(model_fn, t, y, p0=p0, maxfev=20000)
    except RuntimeError as exc:
        raise FitError(f"decay fit did not converge (p0={p0})") from exc
    residual = float(np.sqrt(np.mean((model_fn(t, amplitude, rate) - y) ** 2)) / abs(amplitude))
    # flat data fits to rate = +/- epsilon; only a resolvable growth is flagged
    return DecayFit(
        rate=float(rate),
        amplitude=float(amplitude),
        residual=residual,
        negative=bool(rate < -1e-9),
    )
