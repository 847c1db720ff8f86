import numpy as np
import pytest

from isomonodromy.algebra import commutator, frobenius_norm, orbit_sample, trace_pairing
from isomonodromy.connection import char_poly_coeffs
from isomonodromy.hitchin import (AutonomousState, autonomous_flow,
                                  commutation_check, gaudin_hamiltonian,
                                  gaudin_vector_field, lax_form_residual,
                                  spectral_conservation_audit)
from isomonodromy.isoflow import SchlesingerState, integrate_flow
from conftest import autonomous_state, closing_orbit, schlesinger_state


def probes(seed=0, n=20):
    rng = np.random.default_rng(seed)
    return 8 * (rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n)) + 7j


def test_two_site_field_vanishes():
    p1 = orbit_sample([0.4, -0.4], seed=1)
    p2 = closing_orbit([p1.matrix])
    st = AutonomousState(positions=[-1.0, 1.0], residues=(p1, p2))
    field = gaudin_vector_field(st, 0)
    assert max(frobenius_norm(f) for f in field) < 1e-15


def test_field_sums_to_zero():
    st = autonomous_state(4, 3, seed=2)
    for a in range(4):
        field = gaudin_vector_field(st, a)
        assert frobenius_norm(sum(field)) < 1e-13


def test_field_matches_finite_difference_gradient():
    # finite-difference gradient oracle: perturb every residue entry
    st = autonomous_state(3, 2, seed=3)
    pos = st.positions
    mats = st.residue_matrices()
    a = 1
    h = 1e-6
    field = gaudin_vector_field(st, a)

    def H(ms):
        total = 0.0 + 0.0j
        for b in range(3):
            if b == a:
                continue
            total += trace_pairing(ms[a], ms[b]) / (pos[a] - pos[b])
        return total

    for e in range(3):
        grad = np.zeros((2, 2), dtype=complex)
        for i in range(2):
            for j in range(2):
                bump = np.zeros((2, 2), dtype=complex)
                bump[j, i] = h  # entry (j,i) pairs with grad[i,j]
                up = mats.copy()
                up[e] = up[e] + bump
                dn = mats.copy()
                dn[e] = dn[e] - bump
                grad[i, j] = (H(up) - H(dn)) / (2 * h)
        expected = commutator(mats[e], grad)
        assert frobenius_norm(field[e] - expected) < 1e-8


def test_commutation_checks():
    for seed in range(5):
        st = autonomous_state(3, 2, seed=seed)
        assert commutation_check(st, 0, 1) < 1e-11
        assert commutation_check(st, 1, 1) == 0.0
    # commuting residues: identically zero bracket
    p1 = orbit_sample([0.4, -0.4], seed=7, identity_conjugator=True)
    p2 = orbit_sample([0.1, -0.1], seed=8, identity_conjugator=True)
    p3 = closing_orbit([p1.matrix, p2.matrix])
    st = AutonomousState(positions=[0.0, 2.0, 3.5], residues=(p1, p2, p3))
    assert commutation_check(st, 0, 1) < 1e-14


def test_autonomous_flow_zero_time():
    st = autonomous_state(3, 2, seed=4)
    traj = autonomous_flow(st, 0, 0.0)
    assert len(traj.states) == 1 and traj.states[0] is st


def test_energy_conservation():
    st = autonomous_state(3, 2, seed=5)
    traj = autonomous_flow(st, 0, 1.0, tol=1e-11)
    own = abs(gaudin_hamiltonian(traj.final, 0) - gaudin_hamiltonian(st, 0))
    other = abs(gaudin_hamiltonian(traj.final, 1) - gaudin_hamiltonian(st, 1))
    assert own < 1e-9
    assert other < 1e-8
    assert np.allclose(traj.final.positions, st.positions)


def test_spectral_conservation():
    st = autonomous_state(3, 2, seed=6)
    traj = autonomous_flow(st, 0, 1.0, tol=1e-10)
    assert spectral_conservation_audit(traj) < 1e-8
    assert max(p.spectrum_drift() for p in traj.final.residues) < 1e-9
    assert frobenius_norm(traj.final.residue_sum() - st.residue_sum()) < 1e-9


def test_spectral_conservation_trivial_for_frozen_field():
    p1 = orbit_sample([0.4, -0.4], seed=9)
    p2 = closing_orbit([p1.matrix])
    st = AutonomousState(positions=[-1.0, 1.0], residues=(p1, p2))
    traj = autonomous_flow(st, 0, 1.0, tol=1e-10)
    assert spectral_conservation_audit(traj) < 1e-12


def test_schlesinger_contrast():
    # moving poles deform the curve; the audit must see it
    st = schlesinger_state(3, 2, seed=2)
    traj = integrate_flow(st, 0, 0.3, tol=1e-10)
    assert spectral_conservation_audit(traj) > 1e-3


def test_trace_powers_conserved_along_flow():
    st = autonomous_state(3, 3, seed=10)
    traj = autonomous_flow(st, 1, 1.0, tol=1e-10)
    z = 6.0 + 5j
    L0 = sum(m / (z - x) for m, x in zip(st.residue_matrices(), st.positions))
    L1 = sum(m / (z - x) for m, x in zip(traj.final.residue_matrices(),
                                         traj.final.positions))
    c0, c1 = char_poly_coeffs(L0), char_poly_coeffs(L1)
    assert np.abs(c0 - c1).max() < 1e-8


def test_lax_form_residual():
    for seed in range(4):
        st = autonomous_state(3, 2, seed=seed)
        assert lax_form_residual(st, 0, probes(seed)) < 1e-12
    # commuting residues give an exactly zero field and residual
    p1 = orbit_sample([0.4, -0.4], seed=11, identity_conjugator=True)
    p2 = orbit_sample([0.1, -0.1], seed=12, identity_conjugator=True)
    p3 = closing_orbit([p1.matrix, p2.matrix])
    st = AutonomousState(positions=[0.0, 2.0, 3.5], residues=(p1, p2, p3))
    assert lax_form_residual(st, 0, probes()) < 1e-14


def test_lax_form_wrong_sign_fails():
    st = autonomous_state(3, 2, seed=13)
    pos = st.positions
    mats = st.residue_matrices()
    dp = -gaudin_vector_field(st, 0)
    worst = 0.0
    for z in probes(1):
        L = sum(m / (z - x) for m, x in zip(mats, pos))
        dL = sum(dp[e] / (z - pos[e]) for e in range(3))
        Ma = -mats[0] / (z - pos[0])
        worst = max(worst, frobenius_norm(dL - commutator(L, Ma)))
    assert worst > 1e-3


def test_flows_commute():
    st = autonomous_state(3, 2, seed=14)
    dt = 0.1
    ab = autonomous_flow(autonomous_flow(st, 0, dt, tol=1e-11).final, 1, dt,
                         tol=1e-11).final
    ba = autonomous_flow(autonomous_flow(st, 1, dt, tol=1e-11).final, 0, dt,
                         tol=1e-11).final
    drift = max(frobenius_norm(a.matrix - b.matrix)
                for a, b in zip(ab.residues, ba.residues))
    assert drift < 1e-7


def test_state_validation():
    p = orbit_sample([0.3, -0.3], seed=15)
    with pytest.raises(ValueError):
        AutonomousState(positions=[0.0, 0.0], residues=(p, p))
    with pytest.raises(ValueError):
        AutonomousState(positions=[0.0], residues=(p, p))
