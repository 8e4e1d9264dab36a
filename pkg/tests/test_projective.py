import math

import numpy as np
import pytest

from curvedyn import (CTX_C, CTX_R, HomogPoly, PolyMap, ScalarContext,
                      classical_desboves, desboves_map, eval_map, fs_distance,
                      jacobian, normalize, proj_equal)
from curvedyn.errors import ContextMismatch, Indeterminate, ZeroVector
from curvedyn.projective import induced_tangent_matrix


def test_normalize_scaling():
    p = normalize((2, 0, 0))
    assert p.coords == (1.0, 0.0, 0.0)
    q = normalize((1, 1, 1))
    assert abs(q.coords[0] - 1 / math.sqrt(3)) < 1e-15


def test_normalize_zero_vector():
    with pytest.raises(ZeroVector):
        normalize((0, 0, 0))


def test_normalize_idempotent(rng):
    for _ in range(50):
        p = normalize(tuple(rng.normal(size=3)))
        q = normalize(p.coords)
        assert all(abs(a - b) <= 4 * np.finfo(float).eps
                   for a, b in zip(p.coords, q.coords))


def test_fs_distance_basic():
    p = normalize((1, 0, 0))
    assert fs_distance(p, p) < 1e-12
    q = normalize((0, 1, 0))
    assert abs(fs_distance(p, q) - math.pi / 2) < 1e-12
    r = normalize((1, 1, 0))
    assert abs(fs_distance(p, r) - math.pi / 4) < 1e-12


def test_fs_distance_symmetric_and_sign_free(rng):
    for _ in range(20):
        p = normalize(tuple(rng.normal(size=3)))
        q = normalize(tuple(rng.normal(size=3)))
        assert abs(fs_distance(p, q) - fs_distance(q, p)) < 1e-14
        assert abs(fs_distance(p, q) - fs_distance(p, q.negate())) < 1e-14


def test_fs_distance_context_mismatch():
    with pytest.raises(ContextMismatch):
        fs_distance(normalize((1, 0, 0), CTX_R), normalize((1, 0, 0), CTX_C))


def test_homog_poly_partials_match_finite_differences(rng):
    poly = HomogPoly(4, {(4, 0, 0): 0.7, (2, 1, 1): -1.3, (0, 2, 2): 2.1,
                         (1, 3, 0): 0.4})
    x, y, z = rng.normal(size=3)
    h = 1e-6
    for axis, dv in enumerate(((h, 0, 0), (0, h, 0), (0, 0, h))):
        fd = (poly.eval(x + dv[0], y + dv[1], z + dv[2])
              - poly.eval(x - dv[0], y - dv[1], z - dv[2])) / (2 * h)
        assert abs(poly.partial(axis).eval(x, y, z) - fd) < 1e-7


def test_homog_poly_rejects_degree_mismatch():
    with pytest.raises(ValueError):
        HomogPoly(3, {(1, 1, 0): 1.0})


def test_eval_identity_map(rng):
    ident = PolyMap(tuple(HomogPoly(1, {e: 1.0}) for e in
                          ((1, 0, 0), (0, 1, 0), (0, 0, 1))))
    p = normalize(tuple(rng.normal(size=3)))
    assert proj_equal(eval_map(ident, p), p, 1e-12)


def test_classical_desboves_at_123():
    # direct polynomial evaluation oracle: (1:2:3) -> (-19:52:-21)
    f = classical_desboves()
    p = normalize((1, 2, 3))
    q = eval_map(f, p)
    expected = normalize((-19, 52, -21))
    assert proj_equal(q, expected, 1e-12)


def test_coordinate_point_fixed():
    f = desboves_map((0.3, 0.1, -0.2))
    p = normalize((1, 0, 0))
    assert proj_equal(eval_map(f, p), p, 1e-14)


def test_classical_indeterminacy_points():
    f = classical_desboves()
    for trip in f.metadata["indeterminacy"]:
        with pytest.raises(Indeterminate):
            eval_map(f, normalize(trip, CTX_C))


def test_jacobian_linear_map():
    half = PolyMap((HomogPoly(1, {(1, 0, 0): 1.0}),
                    HomogPoly(1, {(0, 1, 0): 1.0}),
                    HomogPoly(1, {(0, 0, 1): 0.5})))
    J = np.array(jacobian(half, normalize((0.3, -0.5, 0.81))))
    assert np.allclose(J, np.diag([1.0, 1.0, 0.5]))


@pytest.mark.parametrize("family", ["desboves", "degree3", "cassini"])
def test_euler_identity(family, rng):
    from curvedyn import cassini_map, degree3_map
    from curvedyn.families import GAMMA

    if family == "desboves":
        f, ctx = desboves_map((-5 / 9, 1 / 9, 7 / 9)), CTX_C
    elif family == "degree3":
        f, ctx = degree3_map(0.0, GAMMA / 2, -0.5), CTX_C
    else:
        f, ctx = cassini_map(0.4, 0.125), CTX_R
    for _ in range(200):
        v = rng.normal(size=3) + (1j * rng.normal(size=3) if ctx.is_complex else 0)
        p = normalize(tuple(v), ctx)
        J = np.array(jacobian(f, p), dtype=complex)
        F = np.array([complex(c) for c in f.eval_lift(p)])
        lhs = J @ p.as_array()
        assert np.max(np.abs(lhs - f.degree * F)) < 1e-12 * max(1, np.max(np.abs(F)))


def test_classical_desboves_jacobian_finite_difference(rng):
    f = classical_desboves()
    p = normalize((1, 2, 3))
    J = np.array(jacobian(f, p))
    h = 1e-6
    x = p.as_array()
    for j in range(3):
        dv = np.zeros(3)
        dv[j] = h
        fd = (f.eval_batch(x + dv) - f.eval_batch(x - dv)) / (2 * h)
        assert np.max(np.abs(J[:, j] - fd)) < 1e-6


def test_precision_backends_agree(ref_map, rng):
    hi = ScalarContext("complex", 128)
    for _ in range(25):
        v = rng.normal(size=3) + 1j * rng.normal(size=3)
        p53 = normalize(tuple(v), CTX_C)
        p128 = normalize(tuple(v), hi)
        q53 = eval_map(ref_map, p53)
        q128 = eval_map(ref_map, p128)
        back = normalize(tuple(complex(c) for c in q128.coords), CTX_C)
        assert fs_distance(q53, back) < 1e-12


def test_sparse_vs_fast_evaluators(ref_map, rng):
    P = rng.normal(size=(100, 3)) + 1j * rng.normal(size=(100, 3))
    fast = ref_map.eval_batch(P)
    x, y, z = P[:, 0], P[:, 1], P[:, 2]
    sparse = np.stack([c.eval(x, y, z) for c in ref_map.components], axis=-1)
    assert np.max(np.abs(fast - sparse)) < 1e-12 * np.max(np.abs(sparse))
    Jf = ref_map.jacobian_batch(P)
    rows = [np.stack([g.eval(x, y, z) for g in comp.gradient()], axis=-1)
            for comp in ref_map.components]
    Js = np.stack(rows, axis=-2)
    assert np.max(np.abs(Jf - Js)) < 1e-12 * np.max(np.abs(Js))


def test_induced_matrix_eigenvalues_at_saddle():
    # cassini saddle (0:1:0) has eigenvalues -2 and 0
    from curvedyn import cassini_map

    f = cassini_map(0.4, 0.125)
    M = induced_tangent_matrix(f, normalize((0, 1, 0)))
    eig = sorted(np.linalg.eigvals(M), key=abs)
    assert abs(eig[0]) < 1e-12
    assert abs(eig[1] + 2) < 1e-12
