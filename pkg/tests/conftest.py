"""Shared fixture builders for the test suite (all seeded, all deterministic)."""
import numpy as np
import pytest

from isomonodromy.algebra import OrbitPoint, orbit_sample
from isomonodromy.connection import FuchsianConnection, random_connection
from isomonodromy.hitchin import AutonomousState
from isomonodromy.isoflow import SchlesingerState


def random_traceless(rng, dim):
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return m - np.trace(m) / dim * np.eye(dim)


def closing_orbit(mats):
    """Orbit point for the residue closing sum(p) = 0."""
    m = -sum(mats)
    eig = np.linalg.eigvals(m)
    return OrbitPoint(m, eig - eig.sum() / eig.size)


def schlesinger_state(n_points, matrix_dim, seed, kappa=1.0):
    conn = random_connection(n_points, matrix_dim, seed=seed, kappa=kappa)
    return SchlesingerState.from_connection(conn)


def autonomous_state(n_points, matrix_dim, seed):
    conn = random_connection(n_points, matrix_dim, seed=seed)
    return AutonomousState(positions=conn.points, residues=conn.residues)


def single_pole_connection(theta, kappa=1.0, x=0.0):
    p = orbit_sample([theta, -theta], seed=0, identity_conjugator=True)
    return FuchsianConnection(kappa=kappa, points=[x], residues=(p,),
                              trivial_at_infinity=False)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
