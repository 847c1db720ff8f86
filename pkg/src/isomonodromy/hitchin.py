"""Autonomous Gaudin flows: the critical limit of the residue hierarchy.

Positions are frozen, the Hamiltonians H_a = sum_{b != a} <p_a p_b>/(x_a - x_b)
Poisson-commute, and every flow is an isospectral Lax flow, so the curve
det(lambda + L(z)) = 0 is conserved.  The non-autonomous module provides the
deliberate contrast: feeding one of its trajectories into the conservation
audit shows the curve deforming.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .algebra import OrbitPoint, commutator, frobenius_norm, lie_poisson_bracket
from .connection import FuchsianConnection, char_poly_coeffs, evaluate_L
from .isoflow import FlowTrajectory, site_hamiltonian, site_hamiltonian_gradients

__all__ = [
    "AutonomousState",
    "gaudin_vector_field",
    "gaudin_hamiltonian",
    "commutation_check",
    "autonomous_flow",
    "spectral_conservation_audit",
    "lax_form_residual",
]


@dataclass(frozen=True)
class AutonomousState:
    """Residues on orbits at fixed marked points; times are bookkeeping only."""

    positions: np.ndarray
    residues: tuple[OrbitPoint, ...]
    times: np.ndarray | None = None

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=complex).ravel().copy()
        if len(self.residues) != pos.size:
            raise ValueError("one residue per position is required")
        if pos.size > 1:
            sep = np.abs(pos[:, None] - pos[None, :])
            np.fill_diagonal(sep, np.inf)
            if sep.min() <= 0.0:
                raise ValueError("positions must be pairwise distinct")
        t = (np.zeros(pos.size, dtype=complex) if self.times is None
             else np.asarray(self.times, dtype=complex).ravel().copy())
        if t.size != pos.size:
            raise ValueError("times must have one entry per site")
        pos.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "residues", tuple(self.residues))
        object.__setattr__(self, "times", t)

    @property
    def n_sites(self) -> int:
        return self.positions.size

    @property
    def matrix_dim(self) -> int:
        return self.residues[0].dimension

    def residue_matrices(self) -> np.ndarray:
        return np.array([p.matrix for p in self.residues])

    def residue_sum(self) -> np.ndarray:
        return sum(p.matrix for p in self.residues)

    def connection(self, kappa: complex = 1.0) -> FuchsianConnection:
        scale = max(1.0, max(frobenius_norm(p.matrix) for p in self.residues))
        trivial = frobenius_norm(self.residue_sum()) < 1e-10 * scale
        return FuchsianConnection(kappa=kappa, points=self.positions,
                                  residues=self.residues, trivial_at_infinity=trivial)

    def evolved(self, matrices, times=None) -> "AutonomousState":
        residues = tuple(p.with_matrix(m) for p, m in zip(self.residues, matrices))
        return AutonomousState(positions=self.positions, residues=residues,
                               times=self.times if times is None else times)


def gaudin_hamiltonian(state: AutonomousState, a: int) -> complex:
    if not (0 <= a < state.n_sites):
        raise ValueError("site index out of range")
    return site_hamiltonian(state.positions, state.residue_matrices(), a)


def _field(positions, mats, a):
    grads = site_hamiltonian_gradients(positions, mats, a)
    return np.array([commutator(p, g) for p, g in zip(mats, grads)])


def gaudin_vector_field(state: AutonomousState, a: int) -> np.ndarray:
    """Hamiltonian vector field of H_a: d p_e = [p_e, grad_e H_a]."""
    if not (0 <= a < state.n_sites):
        raise ValueError(f"direction index {a} out of range for {state.n_sites} sites")
    return _field(state.positions, state.residue_matrices(), a)


def commutation_check(state: AutonomousState, a: int, b: int) -> float:
    """|{H_a, H_b}| with analytic gradients; zero up to rounding."""
    n = state.n_sites
    if not (0 <= a < n and 0 <= b < n):
        raise ValueError("site index out of range")
    if a == b:
        return 0.0
    pos = state.positions
    mats = state.residue_matrices()
    return abs(lie_poisson_bracket(site_hamiltonian_gradients(pos, mats, a),
                                   site_hamiltonian_gradients(pos, mats, b),
                                   mats))


def autonomous_flow(state0: AutonomousState, a: int, t_end: complex,
                    tol: float = 1e-10, min_samples: int = 10) -> FlowTrajectory:
    """Integrate the H_a flow; positions stay frozen."""
    n, N = state0.n_sites, state0.matrix_dim
    if not (0 <= a < n):
        raise ValueError(f"direction index {a} out of range for {n} sites")
    t_end = complex(t_end)
    if t_end == 0:
        return FlowTrajectory(parameters=np.array([0.0]), states=(state0,),
                              stats={"steps": 0, "rhs_evals": 0, "local_error_bound": tol})
    pos = state0.positions

    def rhs(s, y):
        mats = y.reshape(n, N, N)
        return (t_end * _field(pos, mats, a)).ravel()

    sol = solve_ivp(rhs, (0.0, 1.0), state0.residue_matrices().ravel(),
                    method="DOP853", dense_output=True,
                    rtol=max(tol, 3e-14), atol=tol)
    if not sol.success or not np.all(np.isfinite(sol.y[:, -1])):
        raise ArithmeticError(f"autonomous flow integration failed: {sol.message}")
    samples = np.linspace(0.0, 1.0, max(min_samples, 10))
    states = []
    for s in samples:
        mats = sol.sol(s).reshape(n, N, N)
        t = state0.times.copy()
        t[a] = state0.times[a] + s * t_end
        states.append(state0.evolved(mats, times=t))
    stats = {"steps": int(sol.t.size - 1), "rhs_evals": int(sol.nfev),
             "local_error_bound": tol}
    return FlowTrajectory(parameters=samples, states=tuple(states), stats=stats)


def _curve_values(positions, mats, lam, z):
    N = mats[0].shape[0]
    L = sum(m / (z - x) for m, x in zip(mats, positions))
    coeffs = char_poly_coeffs(L)
    return sum(coeffs[k] * lam ** (N - k) for k in range(N + 1))


def spectral_conservation_audit(trajectory: FlowTrajectory, n_probes: int = 20,
                                seed: int = 2718) -> float:
    """Max relative drift of det(lambda + L(z)) over the trajectory.

    Probes (lambda, z) are seeded and kept away from every pole position that
    occurs along the trajectory, so the audit also accepts non-autonomous
    trajectories (whose moving poles make the curve deform, by design).
    """
    states = trajectory.states
    all_pos = np.concatenate([np.asarray(s.positions) for s in states])
    scale = max(1.0, float(np.abs(all_pos).max()))
    rng = np.random.default_rng(seed)
    probes = []
    while len(probes) < n_probes:
        z = scale * (rng.uniform(-3, 3) + 1j * rng.uniform(-3, 3))
        if np.abs(z - all_pos).min() < 0.3 * scale:
            continue
        lam = rng.uniform(0.5, 1.5) * np.exp(2j * np.pi * rng.uniform())
        probes.append((lam, z))
    base = states[0]
    base_vals = [_curve_values(base.positions, base.residue_matrices(), lam, z)
                 for lam, z in probes]
    worst = 0.0
    for s in states[1:]:
        mats = s.residue_matrices()
        for (lam, z), f0 in zip(probes, base_vals):
            f = _curve_values(s.positions, mats, lam, z)
            worst = max(worst, abs(f - f0) / max(1.0, abs(f0)))
    return worst


def lax_form_residual(state: AutonomousState, a: int, z_probes) -> float:
    """Max over probes of || d_a L - [L, M_a] || with M_a = -p_a / (z - x_a).

    The autonomous analogue of the zero-curvature oracle: the Gaudin field
    makes the expression vanish identically in z.
    """
    pos = state.positions
    mats = state.residue_matrices()
    dp = gaudin_vector_field(state, a)
    conn = state.connection()
    scale = conn.scale()
    worst = 0.0
    for z in np.asarray(z_probes, dtype=complex).ravel():
        if np.abs(z - pos).min() <= 1e-9 * scale:
            raise ValueError(f"probe {z} coincides with a marked point")
        L = evaluate_L(conn, z)
        dL = sum(dp[e] / (z - pos[e]) for e in range(state.n_sites))
        Ma = -mats[a] / (z - pos[a])
        res = dL - commutator(L, Ma)
        worst = max(worst, frobenius_norm(res))
    return worst
