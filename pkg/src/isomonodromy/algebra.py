"""Dense sl(N, C) matrix algebra: commutators, trace pairings, coadjoint
orbit points, and the Lie-Poisson bracket on tuples of residues.

Matrices are plain complex numpy arrays.  Everything here targets desk-scale
systems (N <= 8), so the implementation is deliberately dense and direct.
All returned arrays are marked read-only; values are treated as immutable
after construction and are safe to share across threads.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

__all__ = [
    "OrbitPoint",
    "as_square_matrix",
    "commutator",
    "trace_pairing",
    "casimir_values",
    "orbit_sample",
    "spectrum_distance",
    "lie_poisson_bracket",
    "frobenius_norm",
]


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def as_square_matrix(m) -> np.ndarray:
    """Coerce to a finite complex square matrix of dimension >= 2."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] < 2:
        raise ValueError("matrix dimension must be at least 2")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def frobenius_norm(m) -> float:
    return float(np.linalg.norm(np.asarray(m), "fro"))


def _check_same_dim(x: np.ndarray, y: np.ndarray) -> None:
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")


def commutator(x, y) -> np.ndarray:
    """XY - YX for equal-dimension square matrices."""
    x = as_square_matrix(x)
    y = as_square_matrix(y)
    _check_same_dim(x, y)
    return x @ y - y @ x


def trace_pairing(x, y) -> complex:
    """The invariant pairing tr(XY)."""
    x = as_square_matrix(x)
    y = as_square_matrix(y)
    _check_same_dim(x, y)
    # tr(XY) without forming the product
    return complex(np.sum(x * y.T))


def casimir_values(p, kmax: int | None = None) -> list[complex]:
    """Power traces (tr p^2, ..., tr p^kmax); conjugation invariant.

    ``kmax`` defaults to the matrix dimension, past which the values carry
    no independent information.
    """
    p = as_square_matrix(p)
    if kmax is None:
        kmax = p.shape[0]
    if kmax < 2:
        raise ValueError("kmax must be at least 2")
    out = []
    q = p @ p
    for _ in range(2, kmax + 1):
        out.append(complex(np.trace(q)))
        q = q @ p
    return out


def spectrum_distance(m, reference) -> float:
    """Max eigenvalue mismatch against ``reference`` under optimal matching.

    Eigenvalue ordering is not canonical, so the multisets are compared via
    an optimal assignment on absolute differences.
    """
    m = as_square_matrix(m)
    ref = np.asarray(reference, dtype=complex).ravel()
    eig = np.linalg.eigvals(m)
    if eig.shape != ref.shape:
        raise ValueError("spectrum length does not match matrix dimension")
    cost = np.abs(eig[:, None] - ref[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


@dataclass(frozen=True)
class OrbitPoint:
    """A point p = g diag(spectrum) g^{-1} on a fixed coadjoint orbit.

    The orbit is labelled by ``reference_spectrum`` (eigenvalues, summing to
    zero).  Construction validates that the eigenvalues of ``matrix`` match
    the reference; flows report finer drift through :func:`spectrum_distance`.
    """

    matrix: np.ndarray
    reference_spectrum: np.ndarray

    _VALIDATION_TOL = 1e-6

    def __post_init__(self):
        m = as_square_matrix(self.matrix).copy()
        spec = np.asarray(self.reference_spectrum, dtype=complex).ravel().copy()
        if spec.shape[0] != m.shape[0]:
            raise ValueError("reference spectrum length must equal the matrix dimension")
        scale = max(1.0, float(np.abs(spec).max()))
        if abs(spec.sum()) > 1e-9 * scale:
            raise ValueError("reference spectrum must sum to zero (trace-free orbit)")
        if spectrum_distance(m, spec) > self._VALIDATION_TOL * scale:
            raise ValueError("matrix eigenvalues do not lie on the declared orbit")
        object.__setattr__(self, "matrix", _freeze(m))
        object.__setattr__(self, "reference_spectrum", _freeze(spec))

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def spectrum_drift(self) -> float:
        return spectrum_distance(self.matrix, self.reference_spectrum)

    def conjugated(self, g: np.ndarray) -> "OrbitPoint":
        g = as_square_matrix(g)
        return OrbitPoint(g @ self.matrix @ np.linalg.inv(g), self.reference_spectrum)

    def with_matrix(self, m) -> "OrbitPoint":
        """Same orbit label, new representative (e.g. a flowed residue)."""
        return OrbitPoint(m, self.reference_spectrum)


def orbit_sample(spectrum, seed: int, identity_conjugator: bool = False,
                 max_condition: float = 1e6) -> OrbitPoint:
    """Sample g diag(spectrum) g^{-1} with a seeded, well-conditioned g.

    The spectrum must sum to zero and be pairwise distinct (a diagonalizable
    orbit).  Conjugators with condition number above ``max_condition`` are
    resampled internally and never returned.  ``identity_conjugator`` yields
    diag(spectrum) itself.
    """
    spec = np.asarray(spectrum, dtype=complex).ravel()
    if spec.size < 2:
        raise ValueError("spectrum needs at least two eigenvalues")
    scale = max(1.0, float(np.abs(spec).max()))
    if abs(spec.sum()) > 1e-9 * scale:
        raise ValueError(f"spectrum must sum to zero, got sum {spec.sum()}")
    diffs = np.abs(spec[:, None] - spec[None, :]) + np.eye(spec.size)
    if diffs.min() < 1e-9 * scale:
        raise ValueError("spectrum values must be pairwise distinct")
    if identity_conjugator:
        return OrbitPoint(np.diag(spec), spec)
    rng = np.random.default_rng(seed)
    for _ in range(64):
        g = rng.standard_normal((spec.size, spec.size)) + 1j * rng.standard_normal((spec.size, spec.size))
        if np.linalg.cond(g) <= max_condition:
            break
    else:  # pragma: no cover - vanishing probability
        raise RuntimeError("failed to draw a well-conditioned conjugator")
    p = g @ np.diag(spec) @ np.linalg.inv(g)
    return OrbitPoint(p, spec)


def _residue_matrix(p) -> np.ndarray:
    return p.matrix if isinstance(p, OrbitPoint) else as_square_matrix(p)


def lie_poisson_bracket(grad_f, grad_g, residues) -> complex:
    """Lie-Poisson bracket {F, G} = sum_a <p_a, [grad_a F, grad_a G]>.

    Gradients are per-site matrices in the convention dF = sum_a <grad_a F, dp_a>.
    Antisymmetric in (F, G) by construction; vanishes when either gradient is
    a Casimir gradient c * p_a^(k-1).
    """
    if not (len(grad_f) == len(grad_g) == len(residues)):
        raise ValueError("site count mismatch between gradients and residues")
    total = 0.0 + 0.0j
    for gf, gg, p in zip(grad_f, grad_g, residues):
        total += trace_pairing(_residue_matrix(p), commutator(gf, gg))
    return total
