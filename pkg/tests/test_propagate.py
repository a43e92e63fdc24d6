"""Propagator: exact free phases, unitary kicks, sampled traces."""

import math

import numpy as np
import pytest

from rotecho import (
    AlignmentTrace,
    MoleculeSpec,
    PulseSpec,
    RotorBasis,
    expectation_cos2,
    free_evolve,
    impulsive_kick,
    revival_period,
    run_pulse_sequence,
    run_two_pulse,
    thermal_state,
    two_pulse_config,
)
from rotecho.basis import MBlockDensityMatrix
from rotecho.propagate import with_substeps

COLD = MoleculeSpec(b_cm=0.2034, temperature_k=30.0, name="OCS-cold")


def superposition_state(ocs) -> MBlockDensityMatrix:
    """Pure (|0 0> + |2 0>)/sqrt(2) embedded in a small basis."""
    basis = RotorBasis(4)
    blocks = []
    for m in range(5):
        n = basis.block_dim(m)
        blocks.append(np.zeros((n, n), dtype=complex))
    blocks[0][0, 0] = blocks[0][2, 2] = 0.5
    blocks[0][0, 2] = blocks[0][2, 0] = 0.5
    return MBlockDensityMatrix(basis=basis, molecule=ocs, blocks=tuple(blocks))


def test_free_evolution_phase_convention(ocs, trev):
    # over T_rev/8 the (0, 2) element gains phi = -(3/4) pi, applied as
    # exp(-i phi), so the stored coherence rotates by +3 pi / 4
    rho = free_evolve(superposition_state(ocs), trev / 8.0)
    expected = 0.5 * np.exp(0.75j * math.pi)
    assert abs(rho.blocks[0][0, 2] - expected) < 1e-12


def test_free_evolution_full_revival_restores_state(ocs, trev):
    rho0 = superposition_state(ocs)
    rho1 = free_evolve(rho0, trev)
    for b0, b1 in zip(rho0.blocks, rho1.blocks):
        assert np.max(np.abs(b1 - b0)) < 1e-10


def test_free_evolution_time_reversal(ocs):
    rho0 = superposition_state(ocs)
    rho1 = free_evolve(free_evolve(rho0, 17.3), -17.3)
    for b0, b1 in zip(rho0.blocks, rho1.blocks):
        assert np.max(np.abs(b1 - b0)) < 1e-14


def test_population_elements_never_move(ocs):
    rho = free_evolve(superposition_state(ocs), 5.21)
    assert rho.blocks[0][0, 0] == pytest.approx(0.5)
    assert rho.blocks[0][2, 2] == pytest.approx(0.5)


def test_impulsive_kick_zero_is_identity(ocs):
    rho0 = superposition_state(ocs)
    rho1 = impulsive_kick(rho0, 0.0)
    for b0, b1 in zip(rho0.blocks, rho1.blocks):
        assert np.max(np.abs(b1 - b0)) < 1e-14


def test_impulsive_kick_is_unitary(ocs):
    basis = RotorBasis(50)
    rho0 = thermal_state(ocs, basis, truncation_tol=1e-1)
    rho1 = impulsive_kick(rho0, 2.5)
    assert rho1.weighted_trace() == pytest.approx(rho0.weighted_trace(), abs=1e-12)
    assert rho1.purity() == pytest.approx(rho0.purity(), abs=1e-12)
    assert rho1.hermiticity_defect() < 1e-14


def test_kick_commutes_with_alignment_operator(ocs):
    # exp(i k cos^2) leaves <cos^2> untouched at the kick instant;
    # alignment only develops through subsequent free evolution
    basis = RotorBasis(50)
    rho0 = thermal_state(ocs, basis, truncation_tol=1e-1)
    rho1 = impulsive_kick(rho0, 1.0)
    assert expectation_cos2(rho1) == pytest.approx(expectation_cos2(rho0), abs=1e-12)


def test_expectation_cos2_oracles(ocs):
    basis = RotorBasis(50)
    rho = thermal_state(ocs, basis, truncation_tol=1e-1)
    assert expectation_cos2(rho) == pytest.approx(1.0 / 3.0, abs=1e-9)
    # (|00> + |20>)/sqrt(2): 1/6 + 11/42 + 2/(3 sqrt 5)
    expected = 1.0 / 6.0 + 11.0 / 42.0 + 2.0 / (3.0 * math.sqrt(5.0))
    assert expectation_cos2(superposition_state(ocs)) == pytest.approx(
        expected, rel=1e-12
    )


def test_alignment_rises_after_kick(ocs, trev):
    cfg = two_pulse_config(ocs, 1.0, 0.0, 0.07 * trev)
    trace = run_two_pulse(cfg)
    assert trace.values[0] == pytest.approx(0.0, abs=1e-12)
    early = trace.window(0.0, 3.0)[1]
    assert early.max() > 1e-3


def test_trace_grid_and_validation(ocs, trev):
    dtau = 0.07 * trev
    cfg = two_pulse_config(ocs, 0.5, 0.3, dtau)
    trace = run_two_pulse(cfg)
    steps = np.diff(trace.times)
    assert np.allclose(steps, steps[0], rtol=1e-9)
    assert trace.times[0] == 0.0
    assert trace.times[-1] <= cfg.t_end + 1e-9
    trace.validate()
    with pytest.raises(ValueError):
        AlignmentTrace(
            times=np.array([0.0, 1.0, 3.0]),
            values=np.zeros(3),
            config=cfg,
        )


def test_two_pulse_config_wiring(ocs, trev):
    dtau = 0.1 * trev
    cfg = two_pulse_config(ocs, 1.0, 0.5, dtau)
    assert [p.t0 for p in cfg.pulses] == [0.0, dtau]
    assert [p.kick for p in cfg.pulses] == [1.0, 0.5]
    assert all(p.shape == "impulsive" for p in cfg.pulses)
    assert cfg.t_end == pytest.approx(2.0 * dtau + 0.06 * trev)
    assert cfg.dt_sample == pytest.approx(trev / 2048.0)
    gauss = two_pulse_config(ocs, 1.0, 0.5, dtau, shape="gaussian")
    assert all(p.shape == "gaussian" for p in gauss.pulses)
    assert all(p.duration_fwhm == 0.1 for p in gauss.pulses)


def test_run_two_pulse_requires_two_pulses(ocs, trev):
    cfg = two_pulse_config(ocs, 1.0, 0.5, 0.1 * trev)
    single = cfg.pulses[:1]
    from dataclasses import replace

    with pytest.raises(ValueError):
        run_two_pulse(replace(cfg, pulses=single))


def test_gaussian_mesh_halving():
    # halving the pulse integration mesh moves the trace by < 1e-7,
    # so the default 512 substeps sit well inside convergence
    t_rev = revival_period(COLD)
    dtau = 0.07 * t_rev
    cfg = two_pulse_config(
        COLD, 0.5, 0.3, dtau, shape="gaussian", t_end=dtau + 3.0
    )
    fine = run_two_pulse(cfg)
    coarse = run_two_pulse(with_substeps(cfg, 256))
    assert np.max(np.abs(fine.values - coarse.values)) < 1e-7


def test_perturbative_response_is_linear_in_kick(ocs, trev):
    # leading alignment response scales linearly for weak kicks
    amps = []
    for kick in (0.01, 0.02):
        cfg = two_pulse_config(ocs, kick, 0.0, 0.07 * trev, t_end=6.0)
        trace = run_two_pulse(cfg)
        amps.append(float(np.max(np.abs(trace.values))))
    assert amps[1] / amps[0] == pytest.approx(2.0, rel=0.02)


def test_finite_pulse_deviation_scales_with_duration_squared(ocs):
    # the finite-pulse trace differs from the impulsive one through a
    # frequency filter on each coherence, so the deviation drops by 4x
    # when the duration halves; this pins the deviation as physics, not
    # integration error
    devs = []
    for fwhm in (0.1, 0.05):
        dev = _impulsive_gaussian_deviation(ocs, fwhm)
        devs.append(dev)
    assert devs[0] / devs[1] == pytest.approx(4.0, rel=0.25)


def _impulsive_gaussian_deviation(molecule, fwhm: float) -> float:
    """Max relative post-pulse deviation, gaussian versus impulsive."""
    t0 = 0.5
    t_end = 12.0
    shared = dict(t_end=t_end, dt_sample=0.02, j_max=60)
    imp = run_pulse_sequence(
        _single_pulse_config(molecule, PulseSpec(t0=t0, kick=1.0, shape="impulsive"), **shared)
    )
    gau = run_pulse_sequence(
        _single_pulse_config(
            molecule,
            PulseSpec(t0=t0, kick=1.0, duration_fwhm=fwhm, shape="gaussian"),
            **shared,
        )
    )
    lo = t0 + 2.0 * fwhm
    ti, vi = imp.window(lo, t_end)
    tg, vg = gau.window(lo, t_end)
    assert np.array_equal(ti, tg)
    return float(np.max(np.abs(vg - vi)) / np.max(np.abs(vi)))


def _single_pulse_config(molecule, pulse, *, t_end, dt_sample, j_max):
    from rotecho import ExperimentConfig

    return ExperimentConfig(
        molecule=molecule,
        pulses=(pulse,),
        t_end=t_end,
        dt_sample=dt_sample,
        j_max=j_max,
    )
