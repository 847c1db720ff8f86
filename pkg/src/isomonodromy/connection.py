"""Genus-0 Fuchsian connections L(z) = sum_a p_a / (z - x_a).

Holds the connection data (deformation parameter kappa, marked points,
orbit residues), evaluation, the spectral curve det(lambda + L(z)) = 0
stored as exact principal-part data, and moduli-dimension bookkeeping.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import OrbitPoint, as_square_matrix, frobenius_norm, orbit_sample

__all__ = [
    "FuchsianConnection",
    "SpectralCurveData",
    "evaluate_L",
    "spectral_curve",
    "curve_probe_defect",
    "moduli_dimension",
    "random_connection",
]


@dataclass(frozen=True)
class FuchsianConnection:
    """A rational Lax matrix with simple poles at distinct marked points.

    ``trivial_at_infinity`` declares sum_a p_a = 0, which makes infinity a
    regular point (L = O(1/z^2)) and the loop product relation testable.
    """

    kappa: complex
    points: np.ndarray
    residues: tuple[OrbitPoint, ...]
    trivial_at_infinity: bool = True

    def __post_init__(self):
        if self.kappa == 0:
            raise ValueError("kappa must be nonzero")
        pts = np.asarray(self.points, dtype=complex).ravel().copy()
        res = tuple(self.residues)
        if len(res) != pts.size:
            raise ValueError("one residue per marked point is required")
        if pts.size == 0:
            raise ValueError("at least one marked point is required")
        dims = {p.dimension for p in res}
        if len(dims) != 1:
            raise ValueError("all residues must share one matrix dimension")
        if pts.size > 1:
            sep = np.abs(pts[:, None] - pts[None, :])
            np.fill_diagonal(sep, np.inf)
            if sep.min() <= 0.0:
                raise ValueError("marked points must be pairwise distinct")
        if self.trivial_at_infinity:
            total = sum(p.matrix for p in res)
            scale = max(1.0, max(frobenius_norm(p.matrix) for p in res))
            if frobenius_norm(total) > 1e-10 * scale:
                raise ValueError("trivial_at_infinity requires the residues to sum to zero")
        pts.setflags(write=False)
        object.__setattr__(self, "kappa", complex(self.kappa))
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "residues", res)

    @property
    def n_points(self) -> int:
        return self.points.size

    @property
    def matrix_dim(self) -> int:
        return self.residues[0].dimension

    def residue_matrices(self) -> np.ndarray:
        return np.array([p.matrix for p in self.residues])

    def scale(self) -> float:
        """Geometric scale used for pole-proximity thresholds."""
        return max(1.0, float(np.abs(self.points).max()))


def evaluate_L(conn: FuchsianConnection, z: complex) -> np.ndarray:
    """Evaluate L(z) = sum_a p_a / (z - x_a) away from the poles."""
    z = complex(z)
    d = z - conn.points
    bad = np.abs(d) <= 1e-12 * conn.scale()
    if bad.any():
        raise ValueError(f"evaluation at marked point index {int(np.argmax(bad))}")
    N = conn.matrix_dim
    L = np.zeros((N, N), dtype=complex)
    for da, p in zip(d, conn.residues):
        L += p.matrix / da
    return L


def char_poly_coeffs(m) -> np.ndarray:
    """Coefficients s_k with det(lambda + m) = sum_k s_k lambda^(N-k), s_0 = 1."""
    return np.poly(-as_square_matrix(m))


@dataclass(frozen=True)
class SpectralCurveData:
    """det(lambda + L(z)) = lambda^N + sum_k s_k(z) lambda^(N-k), k = 2..N.

    Each s_k is stored by its principal parts: ``principal_parts[k][a][m-1]``
    is the coefficient of (z - x_a)^(-m), 1 <= m <= k.  A rational s_k with
    poles only at the marked points and vanishing at infinity equals the sum
    of its principal parts, so the polynomial ``tail`` is identically zero at
    genus 0; it is kept for schema compatibility.
    """

    matrix_dim: int
    points: np.ndarray
    principal_parts: dict
    tail: dict = field(default_factory=dict)

    def coefficient(self, k: int, z: complex) -> complex:
        """Evaluate s_k(z) from the stored principal parts."""
        if not (2 <= k <= self.matrix_dim):
            raise ValueError(f"k must be in 2..{self.matrix_dim}")
        val = 0.0 + 0.0j
        for a, x in enumerate(self.points):
            coeffs = self.principal_parts[k][a]
            w = z - x
            for m, c in enumerate(coeffs, start=1):
                val += c / w**m
        for m, c in enumerate(self.tail.get(k, ())):
            val += c * z**m
        return val

    def evaluate(self, lam: complex, z: complex) -> complex:
        """Evaluate det(lambda + L(z)) from the stored data."""
        N = self.matrix_dim
        val = lam**N
        for k in range(2, N + 1):
            val += self.coefficient(k, z) * lam ** (N - k)
        return val

    def max_coefficient_difference(self, other: "SpectralCurveData") -> float:
        """Max absolute principal-part coefficient difference."""
        out = 0.0
        for k in range(2, self.matrix_dim + 1):
            for a in range(self.points.size):
                d = np.abs(np.asarray(self.principal_parts[k][a])
                           - np.asarray(other.principal_parts[k][a]))
                out = max(out, float(d.max()))
        return out


def spectral_curve(conn: FuchsianConnection, n_circle: int = 128) -> SpectralCurveData:
    """Extract the principal parts of every s_k by Fourier analysis.

    s_k is analytic on a punctured disc around each marked point, so its
    Laurent coefficients are read off from samples on a circle of radius
    half the distance to the nearest other pole; aliasing decays like
    (r/d)^(n_circle - k) and is far below rounding for n_circle = 128.
    """
    N = conn.matrix_dim
    pts = conn.points
    parts: dict = {k: [] for k in range(2, N + 1)}
    for a, x in enumerate(pts):
        others = np.delete(pts, a)
        if others.size:
            r = 0.5 * float(np.abs(others - x).min())
        else:
            r = 0.5 * conn.scale()
        theta = 2.0 * np.pi * np.arange(n_circle) / n_circle
        ring = x + r * np.exp(1j * theta)
        vals = np.array([char_poly_coeffs(evaluate_L(conn, z)) for z in ring])
        # vals[:, k] = s_k on the circle; DFT index M-m holds the (z-x)^(-m) term
        spectra = np.fft.fft(vals, axis=0) / n_circle
        for k in range(2, N + 1):
            coeffs = [spectra[n_circle - m, k] * r**m for m in range(1, k + 1)]
            parts[k].append(np.asarray(coeffs))
    data = SpectralCurveData(matrix_dim=N, points=pts, principal_parts=parts,
                             tail={k: () for k in range(2, N + 1)})
    _validate_curve(conn, data)
    return data


def curve_probe_defect(conn: FuchsianConnection, data: SpectralCurveData,
                       n_probes: int = 20, seed: int = 12021) -> float:
    """Max relative mismatch of stored vs direct det(lambda + L(z)) probes."""
    rng = np.random.default_rng(seed)
    scale = conn.scale()
    worst = 0.0
    checked = 0
    while checked < n_probes:
        z = scale * (rng.uniform(-3, 3) + 1j * rng.uniform(-3, 3))
        if np.abs(z - conn.points).min() < 0.3 * scale:
            continue
        lam = rng.uniform(0.5, 1.5) * np.exp(2j * np.pi * rng.uniform())
        direct = complex(np.linalg.det(lam * np.eye(conn.matrix_dim) + evaluate_L(conn, z)))
        stored = data.evaluate(lam, z)
        worst = max(worst, abs(stored - direct) / max(1.0, abs(direct)))
        checked += 1
    return worst


def _validate_curve(conn: FuchsianConnection, data: SpectralCurveData,
                    n_probes: int = 20, rel_tol: float = 1e-9) -> None:
    defect = curve_probe_defect(conn, data, n_probes)
    if defect > rel_tol:
        raise ArithmeticError(
            f"spectral-curve data fails pointwise validation ({defect:.3e})")


def moduli_dimension(genus: int, n: int, j: int) -> int:
    """Dimension (2j-1)(g-1) + (j-1)n of the weight-j deformation moduli.

    j = 2 gives 3g-3+n (complex-structure moduli), j = 3 gives 5g-5+2n.
    A non-positive value means there are no deformation moduli of that
    weight; the value is still returned for bookkeeping.
    """
    if genus < 0 or n < 0:
        raise ValueError("genus and point count must be non-negative")
    if j < 2:
        raise ValueError("differential weight j must be at least 2")
    return (2 * j - 1) * (genus - 1) + (j - 1) * n


def random_connection(n_points: int, matrix_dim: int, seed: int,
                      kappa: complex = 1.0, min_separation: float = 1.0,
                      box: float = 2.5) -> FuchsianConnection:
    """Deterministic random fixture: sum_a p_a = 0, ||p_a|| <= 1, separated poles.

    Points are drawn in a box with rejection until pairwise separations reach
    ``min_separation``; the first n-1 residues are orbit samples, the last
    closes the sum, and all are rescaled together to keep norms at most 1.
    """
    if n_points < 2:
        raise ValueError("need at least two marked points")
    rng = np.random.default_rng(seed)
    for _ in range(10_000):
        pts = box * (rng.uniform(-1, 1, n_points) + 1j * rng.uniform(-1, 1, n_points))
        sep = np.abs(pts[:, None] - pts[None, :])
        np.fill_diagonal(sep, np.inf)
        if sep.min() >= min_separation:
            break
    else:  # pragma: no cover
        raise RuntimeError("failed to place separated marked points")
    mats = []
    for a in range(n_points - 1):
        theta = rng.uniform(0.2, 0.6) + 1j * rng.uniform(-0.2, 0.2)
        spec = np.linspace(-(matrix_dim - 1) / 2, (matrix_dim - 1) / 2, matrix_dim) * theta
        mats.append(orbit_sample(spec, seed=int(rng.integers(2**32))).matrix)
    mats.append(-sum(mats))
    norm = max(frobenius_norm(m) for m in mats)
    if norm > 1.0:
        mats = [m / norm for m in mats]

    def _orbit(m):
        eig = np.linalg.eigvals(m)
        return OrbitPoint(m, eig - eig.sum() / matrix_dim)

    residues = tuple(_orbit(m) for m in mats)
    return FuchsianConnection(kappa=kappa, points=pts, residues=residues,
                              trivial_at_infinity=True)
