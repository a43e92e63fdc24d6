"""Basis layer: matrix elements, energies, thermal state, cutoff choice."""

import math

import numpy as np
import pytest

from rotecho import (
    MoleculeSpec,
    RotorBasis,
    TruncationError,
    choose_jmax,
    cos2theta_element,
    revival_period,
    rotational_energy,
    thermal_state,
)

# hc/k in K*cm, independent of the package's own constant
HC_OVER_K = 1.4387769


def test_molecule_validation():
    with pytest.raises(ValueError):
        MoleculeSpec(b_cm=-1.0)
    with pytest.raises(ValueError):
        MoleculeSpec(b_cm=0.2, temperature_k=-5.0)
    with pytest.raises(ValueError):
        MoleculeSpec(b_cm=0.2, weight_even=0.0, weight_odd=0.0)


def test_spin_weights_alternate():
    mol = MoleculeSpec(b_cm=0.2, weight_even=2.0, weight_odd=1.0)
    assert mol.spin_weight(0) == 2.0
    assert mol.spin_weight(3) == 1.0
    assert mol.spin_weight(10) == 2.0


def test_revival_period_value(ocs):
    # 1 / (2 c B) with B in 1/cm and c in cm/ps
    assert revival_period(ocs) == pytest.approx(81.9971, abs=5e-4)


def test_energy_revival_product_is_pi_ladder(ocs, trev):
    # w_J * T_rev = pi * J * (J + 1), so every Delta-J = 2 coherence
    # returns to its phase after exactly one revival
    for j in (0, 1, 5, 17):
        assert rotational_energy(j, ocs) * trev == pytest.approx(
            math.pi * j * (j + 1), rel=1e-12
        )


def test_cos2_element_selection_rules():
    assert cos2theta_element(3, 7, 0) == 0.0
    assert cos2theta_element(2, 3, 1) == 0.0
    assert cos2theta_element(0, 4, 0) == 0.0


def test_cos2_element_symmetry_and_m_sign():
    assert cos2theta_element(4, 6, 2) == cos2theta_element(6, 4, 2)
    assert cos2theta_element(5, 5, -3) == cos2theta_element(5, 5, 3)
    assert cos2theta_element(3, 5, -1) == cos2theta_element(3, 5, 1)


def test_cos2_element_rejects_m_above_j():
    with pytest.raises(ValueError):
        cos2theta_element(2, 4, 3)
    with pytest.raises(ValueError):
        cos2theta_element(-1, 1, 0)


def test_cos2_element_closed_values():
    assert cos2theta_element(0, 0, 0) == pytest.approx(1.0 / 3.0, rel=1e-15)
    assert cos2theta_element(0, 2, 0) == pytest.approx(
        2.0 / (3.0 * math.sqrt(5.0)), rel=1e-14
    )
    # high-J diagonal tends to the classical 1/2 average at m = 0
    assert cos2theta_element(400, 400, 0) == pytest.approx(0.5, abs=2e-3)


def test_basis_blocks_and_immutability():
    basis = RotorBasis(6)
    assert basis.block_dim(0) == 7
    assert basis.block_dim(6) == 1
    assert list(basis.j_values(4)) == [4, 5, 6]
    with pytest.raises(ValueError):
        RotorBasis(1)
    block = basis.cos2_block(0)
    with pytest.raises(ValueError):
        block[0, 0] = 9.0


def test_cos2_block_matches_elements():
    basis = RotorBasis(8)
    for m in (0, 2, 7):
        js = basis.j_values(m)
        block = basis.cos2_block(m)
        for a, j in enumerate(js):
            for b, jp in enumerate(js):
                assert block[a, b] == pytest.approx(
                    cos2theta_element(int(j), int(jp), m), abs=1e-15
                )


def test_cos2_eigensystem_reconstructs_block():
    basis = RotorBasis(12)
    w, v = basis.cos2_eigensystem(3)
    rebuilt = (v * w[None, :]) @ v.T
    assert np.max(np.abs(rebuilt - basis.cos2_block(3))) < 1e-12


def test_thermal_state_trace_and_boltzmann_ratio(ocs):
    basis = RotorBasis(70)
    rho = thermal_state(ocs, basis, truncation_tol=2e-3)
    assert rho.weighted_trace() == pytest.approx(1.0, abs=1e-12)
    assert rho.hermiticity_defect() == 0.0
    p00 = rho.blocks[0][0, 0].real
    p20 = rho.blocks[0][2, 2].real
    expected = math.exp(-HC_OVER_K * ocs.b_cm * 6.0 / ocs.temperature_k)
    assert p20 / p00 == pytest.approx(expected, rel=1e-5)
    # within one level all m sublevels carry the same population
    p22 = rho.blocks[2][0, 0].real
    assert p22 == pytest.approx(p20, rel=1e-12)


def test_thermal_state_spin_weights():
    mol = MoleculeSpec(b_cm=0.2034, temperature_k=296.0, weight_even=3.0, weight_odd=1.0)
    rho = thermal_state(mol, RotorBasis(80), truncation_tol=1e-3)
    p0 = rho.blocks[0][0, 0].real
    p1 = rho.blocks[0][1, 1].real
    boltz = math.exp(-HC_OVER_K * mol.b_cm * 2.0 / mol.temperature_k)
    assert p1 / p0 == pytest.approx(boltz / 3.0, rel=1e-5)


def test_thermal_state_truncation_guard(ocs):
    # room-temperature OCS still holds 1e-4 population near J = 30
    with pytest.raises(TruncationError):
        thermal_state(ocs, RotorBasis(30))


def test_choose_jmax_accommodates_thermal_tail(ocs):
    jm = choose_jmax(ocs, 1.0)
    thermal_state(ocs, RotorBasis(jm), truncation_tol=1e-8)  # must not raise


def test_choose_jmax_grows_with_kick(ocs):
    assert choose_jmax(ocs, 8.0) > choose_jmax(ocs, 1.0)
    assert choose_jmax(ocs, 0.0) >= 10
