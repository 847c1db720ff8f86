"""Analytic continuation of (kappa d/dz + L) Psi = 0 along pole-avoiding
contours, and the monodromy representation it generates.

Paths are chains of line segments and circular arcs.  The standard loop
system is deterministic: each loop runs from the base point to a circle of
half the nearest-neighbour distance around its point, once around
counterclockwise, and back; straight runs that pass too close to another
pole are bent around it on the far side, which preserves the homotopy
class.  Transport composes right-to-left (Psi(end) = U Psi(start)), and
traversing the loops in counterclockwise stem-angle order from the base
point composes them into the boundary of a disc containing every pole, so
that ordered product equals the identity when the residues sum to zero.
Solutions are normalized by Psi(base) = Id; every reported quantity is a
conjugation-invariant trace, so the normalization drops out.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.integrate import solve_ivp

from .connection import FuchsianConnection, evaluate_L

__all__ = [
    "LineSegment",
    "CircularArc",
    "ContourPath",
    "TransportError",
    "default_base_point",
    "standard_product_order",
    "loop_around",
    "large_circle",
    "transport",
    "MonodromyRep",
    "monodromy_rep",
    "word_invariants",
    "word_labels",
    "rep_distance",
]

TOL_RANGE = (1e-13, 1e-6)


class TransportError(RuntimeError):
    """Numerical failure while continuing the linear system along a path."""

    def __init__(self, piece_index, message):
        self.piece_index = piece_index
        super().__init__(f"transport failed on path piece {piece_index}: {message}")


@dataclass(frozen=True)
class LineSegment:
    start: complex
    end: complex

    def at(self, s: float) -> complex:
        return self.start + s * (self.end - self.start)

    def velocity(self, s: float) -> complex:
        return self.end - self.start

    def reversed(self) -> "LineSegment":
        return LineSegment(self.end, self.start)

    def distance_to(self, q: complex) -> float:
        d = self.end - self.start
        if d == 0:
            return abs(q - self.start)
        s = np.clip(np.real((q - self.start) * np.conj(d)) / abs(d) ** 2, 0.0, 1.0)
        return abs(self.start + s * d - q)


@dataclass(frozen=True)
class CircularArc:
    """Arc of |z - center| = radius from angle_start to angle_end.

    Increasing angle means counterclockwise traversal; sweeps beyond 2*pi
    are legitimate (full loops).
    """

    center: complex
    radius: float
    angle_start: float
    angle_end: float

    def at(self, s: float) -> complex:
        ang = self.angle_start + s * (self.angle_end - self.angle_start)
        return self.center + self.radius * np.exp(1j * ang)

    def velocity(self, s: float) -> complex:
        ang = self.angle_start + s * (self.angle_end - self.angle_start)
        return 1j * (self.angle_end - self.angle_start) * self.radius * np.exp(1j * ang)

    def reversed(self) -> "CircularArc":
        return CircularArc(self.center, self.radius, self.angle_end, self.angle_start)

    def distance_to(self, q: complex) -> float:
        rel = q - self.center
        if rel == 0:
            return self.radius
        sweep = self.angle_end - self.angle_start
        lo, hi = (self.angle_start, self.angle_end) if sweep >= 0 else (self.angle_end, self.angle_start)
        if hi - lo >= 2 * np.pi:
            return abs(abs(rel) - self.radius)
        ang = float(np.angle(rel))
        k = np.floor((ang - lo) / (2 * np.pi))
        for cand in (ang - 2 * np.pi * k, ang - 2 * np.pi * (k + 1)):
            if lo - 1e-12 <= cand <= hi + 1e-12:
                return abs(abs(rel) - self.radius)
        return min(abs(q - self.at(0.0)), abs(q - self.at(1.0)))


@dataclass(frozen=True)
class ContourPath:
    """Connected chain of pieces with a declared pole clearance."""

    pieces: tuple
    clearance: float

    def __post_init__(self):
        if self.clearance <= 0:
            raise ValueError("clearance must be positive")
        if not self.pieces:
            raise ValueError("a path needs at least one piece")
        for p, q in zip(self.pieces, self.pieces[1:]):
            if abs(p.at(1.0) - q.at(0.0)) > 1e-9 * max(1.0, abs(p.at(1.0))):
                raise ValueError("path pieces are not connected end-to-end")
        object.__setattr__(self, "pieces", tuple(self.pieces))

    @property
    def start(self) -> complex:
        return self.pieces[0].at(0.0)

    @property
    def end(self) -> complex:
        return self.pieces[-1].at(1.0)

    def is_closed(self) -> bool:
        return abs(self.start - self.end) <= 1e-9 * max(1.0, abs(self.start))

    def reversed(self) -> "ContourPath":
        return ContourPath(tuple(p.reversed() for p in reversed(self.pieces)),
                           self.clearance)

    def joined(self, other: "ContourPath") -> "ContourPath":
        return ContourPath(self.pieces + other.pieces,
                           min(self.clearance, other.clearance))

    def min_pole_distance(self, points) -> float:
        pts = np.asarray(points, dtype=complex).ravel()
        return min(piece.distance_to(q) for piece in self.pieces for q in pts)


def default_base_point(points) -> complex:
    """Base point outside the convex hull of the marked points."""
    pts = np.asarray(points, dtype=complex).ravel()
    return 1.0 + float(np.abs(pts).max()) + 1j * (1.0 + float(np.abs(pts.imag).max()))


def standard_product_order(points, base_point: complex) -> tuple[int, ...]:
    """Sites in counterclockwise stem-angle order as seen from the base point.

    The base point lies outside the convex hull, so the loop stems span less
    than a half turn; measuring angles relative to their mean direction gives
    a branch-cut-free ordering.  Traversing the loops in this order composes
    them into the boundary of a disc containing every pole, which is the
    ordering the product relation Y_(o_n)...Y_(o_1) = Id refers to.  Ties
    (exactly collinear stems) are broken farthest-first, matching the side
    on which :func:`loop_around` bends a blocked stem.
    """
    pts = np.asarray(points, dtype=complex).ravel()
    d = pts - base_point
    mean_dir = np.sum(d / np.abs(d))
    if abs(mean_dir) < 1e-12:
        raise ValueError("degenerate stem geometry; move the base point")
    phi = np.angle(d / (mean_dir / abs(mean_dir)))
    return tuple(int(i) for i in np.lexsort((-np.abs(d), phi)))


def _detoured_segment(u: complex, v: complex, obstacles, delta: float) -> list:
    """Straight run u -> v, bent around obstacles closer than delta.

    The bend replaces the chord inside the delta-circle of an obstacle with
    the circle arc on the far side of the chord, which never crosses the
    obstacle, so the homotopy class of the run is unchanged.
    """
    d = v - u
    length = abs(d)
    hits = []
    for q in obstacles:
        seg = LineSegment(u, v)
        if seg.distance_to(q) >= delta:
            continue
        tq = np.real((q - u) * np.conj(d)) / length**2
        perp = abs(q - (u + tq * d))
        half = np.sqrt(max(delta**2 - perp**2, 0.0)) / length
        t1, t2 = tq - half, tq + half
        if not (0.0 < t1 and t2 < 1.0):
            raise ValueError("pole too close to a path endpoint for a detour")
        hits.append((t1, t2, q))
    if not hits:
        return [LineSegment(u, v)]
    hits.sort()
    for (a1, a2, _), (b1, b2, _) in zip(hits, hits[1:]):
        if b1 <= a2:
            raise ValueError("overlapping detours; marked points too close together")
    pieces = []
    cursor = 0.0
    for t1, t2, q in hits:
        z1, z2 = u + t1 * d, u + t2 * d
        pieces.append(LineSegment(u + cursor * d, z1))
        phi1, phi2 = float(np.angle(z1 - q)), float(np.angle(z2 - q))
        sweep_ccw = (phi2 - phi1) % (2 * np.pi)
        # side of the chord the obstacle is on: bend the other way
        side_q = np.sign(np.imag(np.conj(d) * (q - z1)))
        mid_ccw = q + delta * np.exp(1j * (phi1 + sweep_ccw / 2))
        side_ccw = np.sign(np.imag(np.conj(d) * (mid_ccw - z1)))
        if side_q == 0:
            use_ccw = side_ccw < 0
        else:
            use_ccw = (side_ccw != side_q)
        if use_ccw:
            pieces.append(CircularArc(q, delta, phi1, phi1 + sweep_ccw))
        else:
            pieces.append(CircularArc(q, delta, phi1, phi1 + sweep_ccw - 2 * np.pi))
        cursor = t2
    pieces.append(LineSegment(u + cursor * d, v))
    return pieces


def _loop_radii(points, base) -> np.ndarray:
    pts = np.asarray(points, dtype=complex).ravel()
    radii = np.empty(pts.size)
    for a, x in enumerate(pts):
        others = np.delete(pts, a)
        r = abs(base - x)
        if others.size:
            r = min(r, float(np.abs(others - x).min()))
        radii[a] = 0.5 * r
    return radii


def loop_around(conn: FuchsianConnection, site: int, base_point: complex | None = None,
                clearance: float | None = None) -> ContourPath:
    """Simple positively-oriented loop around one marked point.

    Runs from the base point straight to the circle of half the nearest
    neighbour distance, once around counterclockwise, and straight back,
    with detours around any other pole the straight run grazes.
    """
    pts = conn.points
    if not (0 <= site < pts.size):
        raise ValueError("site index out of range")
    base = default_base_point(pts) if base_point is None else complex(base_point)
    radii = _loop_radii(pts, base)
    if clearance is None:
        clearance = 0.5 * float(radii.min())
    x, r = pts[site], radii[site]
    entry = x + r * (base - x) / abs(base - x)
    obstacles = [q for b, q in enumerate(pts) if b != site]
    forward = _detoured_segment(base, entry, obstacles, clearance)
    phi = float(np.angle(entry - x))
    circle = CircularArc(x, r, phi, phi + 2 * np.pi)
    backward = [p.reversed() for p in reversed(forward)]
    path = ContourPath(tuple(forward) + (circle,) + tuple(backward),
                       min(clearance, r) * (1 - 1e-12))
    return path


def large_circle(conn: FuchsianConnection, base_point: complex | None = None) -> ContourPath:
    """Counterclockwise circle through the base point enclosing every pole."""
    pts = conn.points
    base = default_base_point(pts) if base_point is None else complex(base_point)
    center = complex(pts.mean())
    radius = abs(base - center)
    if np.abs(pts - center).max() >= radius:
        raise ValueError("base point does not enclose the marked points")
    phi = float(np.angle(base - center))
    clearance = float((radius - np.abs(pts - center)).min())
    return ContourPath((CircularArc(center, radius, phi, phi + 2 * np.pi),),
                       clearance * (1 - 1e-12))


def transport(conn: FuchsianConnection, path: ContourPath, tol: float = 1e-10) -> np.ndarray:
    """Transfer matrix U with Psi(end) = U Psi(start) along the path.

    Integrates dPsi/dz = -(1/kappa) L(z) Psi piecewise with an adaptive
    high-order scheme at local tolerance ``tol``; det U stays at 1 for
    trace-free residues.
    """
    if not (TOL_RANGE[0] <= tol <= TOL_RANGE[1]):
        raise ValueError(f"tol must lie in [{TOL_RANGE[0]}, {TOL_RANGE[1]}]")
    if path.min_pole_distance(conn.points) < path.clearance * (1 - 1e-9):
        raise ValueError("path violates its declared pole clearance")
    if path.clearance < 10 * tol:
        raise ValueError("clearance too small for the requested tolerance")
    N = conn.matrix_dim
    inv_kappa = 1.0 / conn.kappa
    U = np.eye(N, dtype=complex)
    for idx, piece in enumerate(path.pieces):

        def rhs(s, y):
            z = piece.at(s)
            L = evaluate_L(conn, z)
            psi = y.reshape(N, N)
            return (-inv_kappa * piece.velocity(s) * (L @ psi)).ravel()

        sol = solve_ivp(rhs, (0.0, 1.0), U.ravel(), method="DOP853",
                        rtol=max(tol, 3e-14), atol=tol)
        if not sol.success:
            raise TransportError(idx, sol.message)
        U = sol.y[:, -1].reshape(N, N)
        if not np.all(np.isfinite(U)):
            raise TransportError(idx, "non-finite state")
    return U


def word_labels(n_sites: int, max_len: int) -> list[str]:
    """Deterministic word order: all Y_a, then Y_aY_b (a<b), then length 3."""
    if max_len not in (1, 2, 3):
        raise ValueError("word length must be 1, 2 or 3")
    labels = [f"Y{a + 1}" for a in range(n_sites)]
    if max_len >= 2:
        labels += [f"Y{a + 1}Y{b + 1}" for a, b in combinations(range(n_sites), 2)]
    if max_len >= 3:
        labels += [f"Y{a + 1}Y{b + 1}Y{c + 1}"
                   for a, b, c in combinations(range(n_sites), 3)]
    return labels


@dataclass(frozen=True)
class MonodromyRep:
    """Loop transports around every marked point, in site order.

    ``product_order`` is the declared site ordering for the relation
    Y_(o_n) ... Y_(o_1) = Id (residues summing to zero); by default the
    sites sorted by (Re x, Im x).
    """

    base_point: complex
    loops: tuple[ContourPath, ...]
    matrices: np.ndarray
    product_order: tuple[int, ...]
    tolerance: float

    def __post_init__(self):
        mats = np.asarray(self.matrices, dtype=complex)
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise ValueError("matrices must have shape (n, N, N)")
        dets = np.linalg.det(mats)
        if np.any(np.abs(dets) < 1e-8):
            raise ValueError("monodromy matrices must be invertible")
        if sorted(self.product_order) != list(range(mats.shape[0])):
            raise ValueError("product_order must be a permutation of the sites")
        mats.setflags(write=False)
        object.__setattr__(self, "matrices", mats)
        object.__setattr__(self, "loops", tuple(self.loops))
        object.__setattr__(self, "product_order", tuple(int(i) for i in self.product_order))

    @property
    def n_sites(self) -> int:
        return self.matrices.shape[0]

    @property
    def matrix_dim(self) -> int:
        return self.matrices.shape[1]

    def ordered_product(self) -> np.ndarray:
        """Y_(o_n) ... Y_(o_2) Y_(o_1) in the declared ordering."""
        U = np.eye(self.matrix_dim, dtype=complex)
        for site in self.product_order:
            U = self.matrices[site] @ U
        return U

    def product_defect(self) -> float:
        return float(np.linalg.norm(self.ordered_product()
                                    - np.eye(self.matrix_dim), "fro"))

    def word_invariants(self, max_len: int = 2) -> list[complex]:
        return word_invariants(self, max_len)


def monodromy_rep(conn: FuchsianConnection, base_point: complex | None = None,
                  tol: float = 1e-10, product_order=None) -> MonodromyRep:
    """Transport around the standard loop of every marked point."""
    pts = conn.points
    base = default_base_point(pts) if base_point is None else complex(base_point)
    radii = _loop_radii(pts, base)
    clearance = 0.5 * float(radii.min())
    if np.abs(base - pts).min() < clearance:
        raise ValueError("base point too close to a marked point")
    loops = tuple(loop_around(conn, a, base, clearance) for a in range(pts.size))
    mats = np.array([transport(conn, loop, tol) for loop in loops])
    if product_order is None:
        product_order = standard_product_order(pts, base)
    achieved = float(np.abs(np.linalg.det(mats) - 1.0).max())
    return MonodromyRep(base_point=base, loops=loops, matrices=mats,
                        product_order=tuple(product_order), tolerance=max(achieved, tol))


def word_invariants(rep: MonodromyRep, max_len: int = 2) -> list[complex]:
    """Traces of words up to ``max_len`` in the deterministic label order.

    Invariant under simultaneous conjugation of all loop matrices, hence
    independent of the base-point normalization.
    """
    if max_len not in (1, 2, 3):
        raise ValueError("word length must be 1, 2 or 3")
    Y = rep.matrices
    out = [complex(np.trace(Y[a])) for a in range(rep.n_sites)]
    if max_len >= 2:
        out += [complex(np.trace(Y[a] @ Y[b]))
                for a, b in combinations(range(rep.n_sites), 2)]
    if max_len >= 3:
        out += [complex(np.trace(Y[a] @ Y[b] @ Y[c]))
                for a, b, c in combinations(range(rep.n_sites), 3)]
    return out


def rep_distance(r1: MonodromyRep, r2: MonodromyRep) -> float:
    """Max absolute difference of the length <= 2 word invariants."""
    if r1.n_sites != r2.n_sites:
        raise ValueError("representations have different site counts")
    if r1.product_order != r2.product_order:
        raise ValueError("representations use different loop conventions")
    w1 = word_invariants(r1, 2)
    w2 = word_invariants(r2, 2)
    return float(max(abs(a - b) for a, b in zip(w1, w2)))
