"""Non-autonomous residue flows at genus 0: the Schlesinger hierarchy.

The flow in direction a moves the marked point x_a (time t_a = x_a - x_a^0)
and conjugates the residues.  The field is written in the commutator form
pinned by the zero-curvature oracle: with M_a(z) = -p_a / (z - x_a),

    kappa * d_a L - kappa * d_z M_a + [M_a, L] == 0   identically in z

forces  d_a p_e = (1/kappa) [p_a, p_e] / (x_e - x_a)  for e != a  and
d_a p_a = -sum_{e != a} of the same, so that sum_e d_a p_e = 0 exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .algebra import (OrbitPoint, commutator, frobenius_norm,
                      lie_poisson_bracket, spectrum_distance, trace_pairing)
from .connection import FuchsianConnection, evaluate_L

__all__ = [
    "SchlesingerState",
    "FlowTrajectory",
    "PoleCollisionError",
    "schlesinger_vector_field",
    "zero_curvature_residual",
    "integrate_flow",
    "schlesinger_hamiltonian",
    "site_hamiltonian",
    "site_hamiltonian_gradients",
    "whitham_residual",
    "isomonodromy_audit",
    "AuditReport",
]


class PoleCollisionError(RuntimeError):
    """Marked points approach each other along a flow path."""

    def __init__(self, pair, parameter, separation):
        self.pair = pair
        self.parameter = parameter
        self.separation = separation
        super().__init__(
            f"marked points {pair[0]} and {pair[1]} reach separation "
            f"{separation:.3e} at flow parameter {parameter}")


@dataclass(frozen=True)
class SchlesingerState:
    """Residues on their orbits plus deformation times t_a = x_a - x_a^0."""

    kappa: complex
    reference_positions: np.ndarray
    times: np.ndarray
    residues: tuple[OrbitPoint, ...]

    def __post_init__(self):
        ref = np.asarray(self.reference_positions, dtype=complex).ravel().copy()
        t = np.asarray(self.times, dtype=complex).ravel().copy()
        if t.size != ref.size or len(self.residues) != ref.size:
            raise ValueError("positions, times and residues must have equal site counts")
        pos = ref + t
        if ref.size > 1:
            sep = np.abs(pos[:, None] - pos[None, :])
            np.fill_diagonal(sep, np.inf)
            if sep.min() <= 0.0:
                raise ValueError("current positions must be pairwise distinct")
        ref.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "kappa", complex(self.kappa))
        object.__setattr__(self, "reference_positions", ref)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "residues", tuple(self.residues))

    @property
    def n_sites(self) -> int:
        return self.reference_positions.size

    @property
    def matrix_dim(self) -> int:
        return self.residues[0].dimension

    @property
    def positions(self) -> np.ndarray:
        return self.reference_positions + self.times

    def residue_matrices(self) -> np.ndarray:
        return np.array([p.matrix for p in self.residues])

    def residue_sum(self) -> np.ndarray:
        return sum(p.matrix for p in self.residues)

    def connection(self, trivial_at_infinity: bool | None = None) -> FuchsianConnection:
        if trivial_at_infinity is None:
            scale = max(1.0, max(frobenius_norm(p.matrix) for p in self.residues))
            trivial_at_infinity = frobenius_norm(self.residue_sum()) < 1e-10 * scale
        return FuchsianConnection(kappa=self.kappa, points=self.positions,
                                  residues=self.residues,
                                  trivial_at_infinity=trivial_at_infinity)

    @classmethod
    def from_connection(cls, conn: FuchsianConnection) -> "SchlesingerState":
        return cls(kappa=conn.kappa, reference_positions=conn.points,
                   times=np.zeros(conn.n_points), residues=conn.residues)

    def evolved(self, times, matrices) -> "SchlesingerState":
        """New state with updated times and residue representatives."""
        residues = tuple(p.with_matrix(m) for p, m in zip(self.residues, matrices))
        return SchlesingerState(kappa=self.kappa,
                                reference_positions=self.reference_positions,
                                times=times, residues=residues)


@dataclass(frozen=True)
class FlowTrajectory:
    """Ordered (parameter, state) samples plus integrator statistics."""

    parameters: np.ndarray
    states: tuple
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        par = np.asarray(self.parameters, dtype=float).ravel()
        if par.size != len(self.states):
            raise ValueError("one state per parameter sample is required")
        if par.size > 1 and not np.all(np.diff(par) > 0):
            raise ValueError("samples must be strictly ordered in the flow parameter")

    @property
    def initial(self):
        return self.states[0]

    @property
    def final(self):
        return self.states[-1]


def _pairwise_field(kappa, positions, mats, a, sign=+1.0):
    n = len(mats)
    out = np.zeros_like(mats)
    for e in range(n):
        if e == a:
            continue
        f = commutator(mats[a], mats[e]) / (kappa * (positions[e] - positions[a]))
        out[e] += sign * f
        out[a] -= sign * f
    return out


def schlesinger_vector_field(state: SchlesingerState, direction: int,
                             sign_flip: bool = False) -> np.ndarray:
    """d p_e / d t_a for all sites e, shape (n, N, N); sums to zero exactly.

    ``sign_flip`` integrates the wrong-signed field, the control experiment
    for monodromy-drift audits.
    """
    n = state.n_sites
    if not (0 <= direction < n):
        raise ValueError(f"direction index {direction} out of range for {n} sites")
    return _pairwise_field(state.kappa, state.positions, state.residue_matrices(),
                           direction, sign=-1.0 if sign_flip else +1.0)


def zero_curvature_residual(state: SchlesingerState, direction: int,
                            z_probes) -> float:
    """Max over probes of || kappa d_a L - kappa d_z M_a + [M_a, L] ||.

    The defining oracle for the field's sign and kappa-power conventions:
    the expression vanishes identically in z for the correct field.
    """
    pos = state.positions
    mats = state.residue_matrices()
    kappa = state.kappa
    a = direction
    dp = schlesinger_vector_field(state, a)
    conn = state.connection(trivial_at_infinity=False)
    scale = conn.scale()
    worst = 0.0
    for z in np.asarray(z_probes, dtype=complex).ravel():
        if np.abs(z - pos).min() <= 1e-9 * scale:
            raise ValueError(f"probe {z} coincides with a marked point")
        L = evaluate_L(conn, z)
        dL = sum(dp[e] / (z - pos[e]) for e in range(state.n_sites))
        dL = dL + mats[a] / (z - pos[a]) ** 2  # moving pole term
        Ma = -mats[a] / (z - pos[a])
        dMa = mats[a] / (z - pos[a]) ** 2
        res = kappa * dL - kappa * dMa + commutator(Ma, L)
        worst = max(worst, frobenius_norm(res))
    return worst


def _min_separation_on_path(positions, a, t_end):
    """Min pairwise separation while x_a sweeps a straight segment."""
    worst = (np.inf, (a, a), 0.0)
    for b in range(positions.size):
        if b == a:
            continue
        c = positions[a] - positions[b]
        d = t_end
        denom = abs(d) ** 2
        s = 0.0 if denom == 0 else min(max(-np.real(c * np.conj(d)) / denom, 0.0), 1.0)
        dist = abs(c + s * d)
        if dist < worst[0]:
            worst = (dist, (a, b), s)
    return worst


def integrate_flow(state0: SchlesingerState, direction: int, t_end: complex,
                   tol: float = 1e-10, min_samples: int = 10,
                   sign_flip: bool = False) -> FlowTrajectory:
    """Integrate the direction-a flow along the straight time segment [0, t_end].

    Aborts with :class:`PoleCollisionError` before integrating if the moving
    point passes too close to another one.  The trajectory carries at least
    ``min_samples`` samples (>= 8 of them intermediate).
    """
    a = direction
    n, N = state0.n_sites, state0.matrix_dim
    if not (0 <= a < n):
        raise ValueError(f"direction index {a} out of range for {n} sites")
    t_end = complex(t_end)
    if t_end == 0:
        return FlowTrajectory(parameters=np.array([0.0]), states=(state0,),
                              stats={"steps": 0, "rhs_evals": 0, "local_error_bound": tol})

    pos0 = state0.positions
    scale = max(1.0, float((np.abs(pos0[:, None] - pos0[None, :])
                            + np.eye(n)).max())) if n > 1 else 1.0
    dist, pair, s = _min_separation_on_path(pos0, a, t_end)
    if dist <= 1e-3 * scale:
        raise PoleCollisionError(pair, s * t_end, dist)

    kappa = state0.kappa
    ref = state0.reference_positions
    times0 = state0.times

    def positions_at(s):
        t = times0.copy()
        t[a] = times0[a] + s * t_end
        return ref + t, t

    def rhs(s, y):
        mats = y.reshape(n, N, N)
        pos, _ = positions_at(s)
        dp = _pairwise_field(kappa, pos, mats, a,
                             sign=-1.0 if sign_flip else +1.0)
        return (t_end * dp).ravel()

    y0 = state0.residue_matrices().ravel()
    sol = solve_ivp(rhs, (0.0, 1.0), y0, method="DOP853", dense_output=True,
                    rtol=max(tol, 3e-14), atol=tol)
    if not sol.success or not np.all(np.isfinite(sol.y[:, -1])):
        raise ArithmeticError(f"flow integration failed: {sol.message}")

    samples = np.linspace(0.0, 1.0, max(min_samples, 10))
    states = []
    for s in samples:
        mats = sol.sol(s).reshape(n, N, N)
        _, t = positions_at(s)
        states.append(state0.evolved(t, mats))
    stats = {"steps": int(sol.t.size - 1), "rhs_evals": int(sol.nfev),
             "local_error_bound": tol}
    return FlowTrajectory(parameters=samples, states=tuple(states), stats=stats)


def site_hamiltonian(positions, mats, a: int) -> complex:
    """H_a = sum_{b != a} tr(p_a p_b) / (x_a - x_b)."""
    total = 0.0 + 0.0j
    for b in range(len(mats)):
        if b == a:
            continue
        total += trace_pairing(mats[a], mats[b]) / (positions[a] - positions[b])
    return total


def site_hamiltonian_gradients(positions, mats, a: int) -> list[np.ndarray]:
    """Per-site gradients of H_a in the convention dH = sum_e <grad_e, dp_e>."""
    n = len(mats)
    grads = []
    for e in range(n):
        if e == a:
            g = sum(mats[b] / (positions[a] - positions[b])
                    for b in range(n) if b != a)
        else:
            g = mats[a] / (positions[a] - positions[e])
        grads.append(g)
    return grads


def schlesinger_hamiltonian(state: SchlesingerState, a: int) -> complex:
    """Time-dependent Hamiltonian of the direction-a flow.

    Normalized so its Lie-Poisson vector field equals kappa times
    :func:`schlesinger_vector_field`; sum_a H_a = 0 for every state.
    """
    if not (0 <= a < state.n_sites):
        raise ValueError("site index out of range")
    return site_hamiltonian(state.positions, state.residue_matrices(), a)


def whitham_residual(state: SchlesingerState, a: int, b: int, h: float = 1e-4) -> float:
    """| kappa d_a H_b - kappa d_b H_a + {H_a, H_b} |.

    The explicit-time partials move only the positions (residues frozen) and
    are taken by central differences of step ``h``; the bracket uses analytic
    gradients.  Zero for a == b by antisymmetry.
    """
    n = state.n_sites
    if not (0 <= a < n and 0 <= b < n):
        raise ValueError("site index out of range")
    if a == b:
        return 0.0
    if not (1e-6 <= h <= 1e-3):
        raise ValueError("finite-difference step h must lie in [1e-6, 1e-3]")
    pos = state.positions
    mats = state.residue_matrices()

    def shifted(c, delta):
        p = pos.copy()
        p[c] += delta
        return p

    dHb_da = (site_hamiltonian(shifted(a, h), mats, b)
              - site_hamiltonian(shifted(a, -h), mats, b)) / (2 * h)
    dHa_db = (site_hamiltonian(shifted(b, h), mats, a)
              - site_hamiltonian(shifted(b, -h), mats, a)) / (2 * h)
    bracket = lie_poisson_bracket(site_hamiltonian_gradients(pos, mats, a),
                                  site_hamiltonian_gradients(pos, mats, b),
                                  mats)
    return abs(state.kappa * dHb_da - state.kappa * dHa_db + bracket)


@dataclass(frozen=True)
class AuditReport:
    """Monodromy drift of a flow, with the conservation numbers alongside."""

    invariant_drift: float
    eigen_drift: float
    sum_p_drift: float
    per_word: dict
    t_end: complex
    direction: int

    def to_dict(self) -> dict:
        return {
            "invariant_drift": self.invariant_drift,
            "eigen_drift": self.eigen_drift,
            "sum_p_drift": self.sum_p_drift,
            "per_word": dict(self.per_word),
        }


def isomonodromy_audit(state0: SchlesingerState, direction: int, t_end: complex,
                       ode_tol: float = 1e-10, word_max_len: int = 2,
                       sign_flip: bool = False,
                       trajectory: FlowTrajectory | None = None) -> AuditReport:
    """Flow to t_end and compare monodromy word invariants at both endpoints.

    The loop system (site order and base point) is frozen from the initial
    connection so the word indexing is stable across the flow.

    For N = 2 a sign-flipped control flow must be audited with
    ``word_max_len=3``: flipping the field is the monodromy-preserving flow
    of the sign-reversed system, which for sl(2) is the eps-conjugated
    transpose-inverse system, and SL(2) traces of words up to length 2 are
    blind to that involution.  Length-3 words see the word reversal and
    drift visibly.
    """
    from .monodromy import (default_base_point, monodromy_rep, rep_distance,
                            standard_product_order, word_labels)

    if trajectory is None:
        trajectory = integrate_flow(state0, direction, t_end, tol=ode_tol,
                                    sign_flip=sign_flip)
    state1 = trajectory.final
    conn0 = state0.connection()
    conn1 = state1.connection()
    all_pos = np.concatenate([conn0.points, conn1.points])
    base = default_base_point(all_pos)
    order = standard_product_order(conn0.points, base)
    rep0 = monodromy_rep(conn0, base_point=base, tol=ode_tol, product_order=order)
    rep1 = monodromy_rep(conn1, base_point=base, tol=ode_tol, product_order=order)
    inv0 = rep0.word_invariants(word_max_len)
    inv1 = rep1.word_invariants(word_max_len)
    labels = word_labels(state0.n_sites, word_max_len)
    per_word = {lab: float(abs(v1 - v0))
                for lab, v0, v1 in zip(labels, inv0, inv1)}
    eigen_drift = max(p.spectrum_drift() for p in state1.residues)
    sum_p_drift = frobenius_norm(state1.residue_sum() - state0.residue_sum())
    return AuditReport(invariant_drift=max(per_word.values()),
                       eigen_drift=float(eigen_drift),
                       sum_p_drift=float(sum_p_drift),
                       per_word=per_word, t_end=complex(t_end),
                       direction=direction)
