import numpy as np
import pytest

from isomonodromy.algebra import orbit_sample
from isomonodromy.connection import FuchsianConnection, random_connection
from isomonodromy.monodromy import (CircularArc, ContourPath, LineSegment,
                                    default_base_point, large_circle, loop_around,
                                    monodromy_rep, rep_distance,
                                    standard_product_order, transport,
                                    word_invariants, word_labels)
from conftest import closing_orbit, single_pole_connection


def square_path(center, half, clearance=0.3):
    c = center
    pts = [c + half * w for w in (1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j, 1 + 1j)]
    return ContourPath(tuple(LineSegment(a, b) for a, b in zip(pts, pts[1:])),
                       clearance)


def test_contractible_loop_is_identity():
    conn = random_connection(3, 2, seed=1)
    far = default_base_point(conn.points) + 4.0
    tol = 1e-10
    U = transport(conn, square_path(far, 0.5), tol)
    assert np.linalg.norm(U - np.eye(2)) < 100 * tol


def test_transport_inverse():
    conn = random_connection(3, 2, seed=2)
    loop = loop_around(conn, 0)
    tol = 1e-10
    U = transport(conn, loop, tol)
    V = transport(conn, loop.reversed(), tol)
    assert np.linalg.norm(U @ V - np.eye(2)) < 100 * tol


def test_transport_composes():
    conn = random_connection(3, 2, seed=3)
    base = default_base_point(conn.points)
    l1 = loop_around(conn, 0, base)
    l2 = loop_around(conn, 1, base)
    tol = 1e-10
    U12 = transport(conn, l1.joined(l2), tol)
    U1 = transport(conn, l1, tol)
    U2 = transport(conn, l2, tol)
    assert np.linalg.norm(U12 - U2 @ U1) < 100 * tol


def test_transport_det_one():
    conn = random_connection(4, 3, seed=4)
    tol = 1e-10
    for a in range(4):
        U = transport(conn, loop_around(conn, a), tol)
        assert abs(np.linalg.det(U) - 1.0) < 100 * tol


def test_diagonal_circle_oracle():
    # closed-form solution z^(-p/kappa) for one diagonal pole at the origin
    for theta in (0.1, 0.25 + 0.1j, 0.7):
        for kappa in (1.0, 2.0 - 0.5j):
            conn = single_pole_connection(theta, kappa=kappa)
            circle = ContourPath(
                (CircularArc(0.0, 1.0, 0.0, 2 * np.pi),), clearance=0.9)
            U = transport(conn, circle, 1e-11)
            expected = 2 * np.cos(2 * np.pi * theta / kappa)
            assert abs(np.trace(U) - expected) < 1e-9


def test_transport_validates_inputs():
    conn = random_connection(3, 2, seed=5)
    loop = loop_around(conn, 0)
    with pytest.raises(ValueError, match="tol"):
        transport(conn, loop, tol=1e-3)
    # a path through a pole violates its clearance
    bad = ContourPath((LineSegment(conn.points[0] + 1.0, conn.points[0] - 1.0),),
                      clearance=0.5)
    with pytest.raises(ValueError, match="clearance"):
        transport(conn, bad, 1e-10)


def test_zero_residues_give_identity_rep():
    from isomonodromy.algebra import OrbitPoint

    zero = OrbitPoint(np.zeros((2, 2)), [1e-13, -1e-13])
    conn = FuchsianConnection(kappa=1.0, points=[0.0, 2.0, 1j],
                              residues=(zero, zero, zero))
    rep = monodromy_rep(conn, tol=1e-10)
    for Y in rep.matrices:
        assert np.linalg.norm(Y - np.eye(2)) < 1e-8


def test_product_relation_and_large_circle():
    for seed in range(6):
        conn = random_connection(3 + seed % 2, 2, seed=seed)
        rep = monodromy_rep(conn, tol=1e-10)
        assert rep.product_defect() < 1e-7
        big = transport(conn, large_circle(conn, rep.base_point), 1e-10)
        assert np.linalg.norm(rep.ordered_product() - big) < 1e-7
        assert np.linalg.norm(big - np.eye(2)) < 1e-7


def test_two_point_inverse_relation():
    p1 = orbit_sample([0.3, -0.3], seed=6)
    p2 = closing_orbit([p1.matrix])
    conn = FuchsianConnection(kappa=1.0, points=[-1.0, 1.5 + 0.5j],
                              residues=(p1, p2))
    rep = monodromy_rep(conn, tol=1e-10)
    Y1, Y2 = rep.matrices
    assert np.linalg.norm(Y2 - np.linalg.inv(Y1)) < 1e-8


def test_word_invariants_identity_rep():
    from isomonodromy.algebra import OrbitPoint

    zero = OrbitPoint(np.zeros((2, 2)), [1e-13, -1e-13])
    conn = FuchsianConnection(kappa=1.0, points=[0.0, 2.0], residues=(zero, zero))
    rep = monodromy_rep(conn, tol=1e-10)
    for tr in word_invariants(rep, 3):
        assert abs(tr - 2.0) < 1e-8


def test_word_invariants_conjugation_invariant(rng):
    conn = random_connection(3, 2, seed=7)
    rep = monodromy_rep(conn, tol=1e-10)
    g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    gi = np.linalg.inv(g)
    conj = type(rep)(base_point=rep.base_point, loops=rep.loops,
                     matrices=np.array([g @ Y @ gi for Y in rep.matrices]),
                     product_order=rep.product_order, tolerance=rep.tolerance)
    w1 = word_invariants(rep, 3)
    w2 = word_invariants(conj, 3)
    assert max(abs(a - b) for a, b in zip(w1, w2)) < 1e-12 * max(
        1.0, max(abs(a) for a in w1))
    assert rep_distance(rep, conj) < 1e-11


def test_word_labels_order():
    assert word_labels(3, 2) == ["Y1", "Y2", "Y3", "Y1Y2", "Y1Y3", "Y2Y3"]
    assert word_labels(3, 3)[-1] == "Y1Y2Y3"
    with pytest.raises(ValueError):
        word_labels(3, 4)


def test_rep_distance_self_and_distinct():
    conn1 = random_connection(3, 2, seed=8)
    conn2 = random_connection(3, 2, seed=9)
    base = default_base_point(np.concatenate([conn1.points, conn2.points]))
    order = standard_product_order(conn1.points, base)
    r1 = monodromy_rep(conn1, base_point=base, tol=1e-10, product_order=order)
    r1b = monodromy_rep(conn1, base_point=base, tol=1e-10, product_order=order)
    r2 = monodromy_rep(conn2, base_point=base, tol=1e-10, product_order=order)
    assert rep_distance(r1, r1b) < 1e-12
    assert rep_distance(r1, r2) > 1e-3


def test_rep_distance_convention_mismatch():
    conn = random_connection(3, 2, seed=10)
    rep = monodromy_rep(conn, tol=1e-10)
    other = monodromy_rep(conn, tol=1e-10,
                          product_order=tuple(reversed(rep.product_order)))
    with pytest.raises(ValueError, match="convention"):
        rep_distance(rep, other)


def test_detour_geometry_keeps_clearance():
    # a pole sitting on the straight stem to a farther pole forces a detour
    p1 = orbit_sample([0.3, -0.3], seed=11)
    p2 = orbit_sample([0.2, -0.2], seed=12)
    p3 = closing_orbit([p1.matrix, p2.matrix])
    conn = FuchsianConnection(kappa=1.0, points=[-1j, -3j, 2.0],
                              residues=(p1, p2, p3))
    base = 2j
    rep = monodromy_rep(conn, base_point=base, tol=1e-10)
    for loop in rep.loops:
        assert loop.min_pole_distance(conn.points) >= loop.clearance * (1 - 1e-9)
    assert rep.product_defect() < 1e-7


def test_path_connectivity_validation():
    with pytest.raises(ValueError, match="connected"):
        ContourPath((LineSegment(0, 1), LineSegment(2, 3)), clearance=0.1)
    with pytest.raises(ValueError, match="clearance"):
        ContourPath((LineSegment(0, 1),), clearance=-1.0)
