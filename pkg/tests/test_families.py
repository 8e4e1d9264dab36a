import math
from fractions import Fraction

import numpy as np
import pytest

from curvedyn import (CTX_C, CTX_R, cassini_map, cassini_phi,
                      classical_desboves, degree3_map, desboves_map,
                      eval_map, fermat_fixed_points, first_integral_residual,
                      fs_distance, is_regular_desboves, lattes_p1_step,
                      normalize, proj_equal, quotient_desboves,
                      sign_permutation_conjugate, symmetric_product,
                      synthetic_ring_map)
from curvedyn.errors import (BadParameter, DegenerateFiber, DegenerateLine,
                             DegreeMismatch, PoleAtPoint, RealContextError)
from curvedyn.families import (GAMMA, DesbovesParams, elementary_params,
                               on_curve_fixed_point_derivatives,
                               ring_transverse_poly, two_thirds_params)
from curvedyn.fermat import fermat_embed_batch

REF = (-5 / 9, 1 / 9, 7 / 9)


# --- Desboves family --------------------------------------------------------

def test_fixed_inflection_point():
    f = desboves_map(REF)
    p = normalize((0, -1, 1))
    assert proj_equal(eval_map(f, p), p, 1e-14)


def test_fermat_curve_invariance(rng):
    f = desboves_map(REF)
    u, v = rng.random(500), rng.random(500)
    P = fermat_embed_batch(u, v)
    Q = f.eval_batch(P)
    Q = Q / np.linalg.norm(Q, axis=1, keepdims=True)
    assert np.max(np.abs(np.sum(Q**3, axis=1))) < 1e-10


def test_coordinate_lines_invariant_symbolically():
    f = desboves_map((0.37, -0.25, 0.8))
    for axis, comp in enumerate(f.components):
        for expo, coef in comp.terms.items():
            assert expo[axis] > 0 or abs(complex(coef)) == 0


def test_regularity():
    assert not is_regular_desboves((-2 / 3, 0, 2 / 3))
    assert is_regular_desboves(REF)
    assert not is_regular_desboves((0.3, 0.5, 1.5))  # c = b + 1


def test_two_thirds_and_elementary_builders():
    p = two_thirds_params(Fraction(1, 9))
    assert p.c - p.b == Fraction(2, 3) and p.b - p.a == Fraction(2, 3)
    e = elementary_params(0.25)
    assert (e.a, e.c) == (-1, 1)


def test_ex51_indeterminacy_points():
    # (-2/3, 0, 2/3): indeterminate where (x^3:y^3:z^3) = (1:7:1) or (0:1:0)
    from curvedyn.errors import Indeterminate

    f = desboves_map((-2 / 3, 0, 2 / 3))
    p = normalize((1, 7 ** (1 / 3), 1))
    with pytest.raises(Indeterminate):
        eval_map(f, p)
    with pytest.raises(Indeterminate):
        eval_map(f, normalize((0, 1, 0)))


# --- fixed point catalogue --------------------------------------------------

def test_on_curve_derivative_closed_forms():
    d = on_curve_fixed_point_derivatives(DesbovesParams(*[Fraction(v) for v in
                                                          ("-5/9", "1/9", "7/9")]))
    assert d["x=0"] == 0                      # transversally superattracting
    assert sum(d.values()) / 3 == -2          # exact mean law


def test_fixed_point_reports(ref_map):
    reps = fermat_fixed_points(REF, CTX_C, newton_seeds=900, seed=3)
    on_curve = [r for r in reps if r.on_fermat]
    coord = [r for r in reps if r.label == "coordinate"]
    interior = [r for r in reps if r.label == "interior"]
    assert len(on_curve) == 9 and len(coord) == 3
    assert len(interior) == 9  # regular parameters: full catalogue of 21
    for r in reps:
        q = eval_map(ref_map, r.point)
        assert fs_distance(q, r.point) < 1e-10
    two_zero = {tuple(round(abs(complex(c))) for c in r.point.coords): r
                for r in coord}
    assert abs(two_zero[(0, 0, 1)].transverse_derivative - 10 / 7) < 1e-12
    assert abs(two_zero[(0, 1, 0)].transverse_derivative + 2) < 1e-12


def test_degenerate_line_detection():
    with pytest.raises(DegenerateLine):
        fermat_fixed_points((0.25, 0.5, 1.5), CTX_C)


# --- degree 3 family --------------------------------------------------------

def test_degree3_requires_complex():
    with pytest.raises(RealContextError):
        degree3_map(0.0, 0.1, 0.2, ctx=CTX_R)


def test_degree3_bad_k():
    with pytest.raises(BadParameter):
        degree3_map(0.0, 0.0, 0.0, k=1.0)


def test_degree3_fixed_point_and_subfamily():
    h = degree3_map(0.0, GAMMA / 2, -0.5)
    p = normalize((0, -1, 1), CTX_C)
    assert proj_equal(eval_map(h, p), p, 1e-12)
    # subfamily constraint b + gamma c = 0 holds at the reference point
    a, b, c = h.params
    assert abs(b + GAMMA * c) < 1e-15


def test_degree3_first_integral(rng):
    h0 = degree3_map(0.0, 0.0, 0.0)
    Phi, Psi = h0.metadata["first_integral"]
    for _ in range(50):
        p = normalize(tuple(rng.normal(size=3) + 1j * rng.normal(size=3)), CTX_C)
        assert first_integral_residual(h0, Phi, Psi, p) < 1e-10


# --- classical first integral ----------------------------------------------

def test_classical_first_integral_examples():
    f0 = classical_desboves()
    Phi, Psi = f0.metadata["first_integral"]
    p = normalize((1, 2, 3), CTX_C)
    assert first_integral_residual(f0, Phi, Psi, p) < 1e-14
    with pytest.raises(PoleAtPoint):
        first_integral_residual(f0, Phi, Psi, normalize((0, 1, 1), CTX_C))


def test_reduction_to_classical():
    fa = desboves_map((0.0, 0.0, 0.0))
    f0 = classical_desboves()
    assert all(fa.components[i].terms == f0.components[i].terms
               for i in range(3))


# --- quotient map -----------------------------------------------------------

def test_quotient_semiconjugacy_componentwise(rng):
    f = desboves_map(REF)
    g = quotient_desboves(REF)
    P = rng.normal(size=(200, 3)) + 1j * rng.normal(size=(200, 3))
    lhs = f.eval_batch(P) ** 3
    rhs = g.eval_batch(P**3)
    assert np.max(np.abs(lhs - rhs)) < 1e-12 * np.max(np.abs(lhs))


def test_quotient_line_invariant(rng):
    g = quotient_desboves(REF)
    # points on xi + eta + zeta = 0 map into the same line
    for _ in range(50):
        xi, eta = rng.normal(size=2) + 1j * rng.normal(size=2)
        p = np.array([xi, eta, -xi - eta])
        img = g.eval_batch(p[None, :])[0]
        assert abs(np.sum(img)) < 1e-10 * np.max(np.abs(img))


def test_quotient_coordinate_fixed_point():
    g = quotient_desboves(REF)
    p = normalize((1, 0, 0), CTX_C)
    assert proj_equal(g and eval_map(g, p), p, 1e-12)


# --- Lattes base map ---------------------------------------------------------

def test_lattes_fixed_points():
    assert lattes_p1_step(0.0) == 0.0
    assert abs(lattes_p1_step(-1.0) + 1.0) < 1e-15
    assert lattes_p1_step(None) is None


def test_lattes_real_degree_minus_two():
    # winding of the induced circle map u -> f(tan(pi u)) over a fine grid
    n = 20000
    u = (np.arange(n) + 0.5) / n - 0.5
    X = np.tan(np.pi * u)
    Xp = -X * (X**3 + 2) / (2 * X**3 + 1)
    up = np.arctan(Xp) / np.pi
    inc = np.diff(up)
    inc = (inc + 0.5) % 1.0 - 0.5
    winding = round(float(np.sum(inc)))
    assert winding == -2


def test_elementary_base_equals_lattes(rng):
    # x and z components of (-1, b, 1) induce the Lattes map for every b
    for b in (0.1, 1 / 3, -0.7):
        f = desboves_map(elementary_params(b))
        for _ in range(20):
            X = complex(rng.normal(), rng.normal())
            P = np.array([X, rng.normal() + 0j, 1.0])
            img = f.eval_batch(P[None, :])[0]
            assert abs(img[0] / img[2] - lattes_p1_step(X)) < 1e-10 * max(
                1, abs(lattes_p1_step(X)))


# --- synthetic ring family ---------------------------------------------------

def test_ring_restriction_is_rigid_rotation(rng):
    f = synthetic_ring_map(0.381966, 2, (1.0, 1.0, 0.3))
    for _ in range(20):
        X = complex(rng.normal(), rng.normal())
        img = f.eval_batch(np.array([[X, 1.0, 0.0]]))[0]
        assert abs(img[2]) == 0.0
        assert abs(abs(img[0] / img[1]) - abs(X)) < 1e-12 * max(1, abs(X))


def test_ring_transverse_multiplier_finite_difference(rng):
    c0, c1, c2 = 0.8, -0.5 + 0.2j, 0.3
    f = synthetic_ring_map(0.3, 2, (c0, c1, c2))
    for _ in range(10):
        X = complex(rng.normal(), rng.normal())
        u = 1e-7
        img = f.eval_batch(np.array([[X, 1.0, u]]))[0]
        mult = (img[2] / img[1]) / u
        assert abs(mult - (c0 * X + c1)) < 1e-5


def test_ring_degree_mismatch():
    from curvedyn.projective import HomogPoly

    with pytest.raises(DegreeMismatch):
        synthetic_ring_map(0.3, 3, (1.0, 0.0, 0.0))  # degree-1 r for D=3


def test_ring_attracting_when_scaled_down(rng):
    f = synthetic_ring_map(0.381966, 2, (1.0, 1.0, 0.3), scale=0.05)
    coeffs = ring_transverse_poly(f)
    th = rng.random(200)
    X = np.exp(2j * np.pi * th)  # the unit circle of the ring
    vals = np.abs(coeffs[1] * X + coeffs[0])
    assert np.all(vals < 1)


# --- symmetric product -------------------------------------------------------

def test_symmetric_product_identity(rng):
    F = symmetric_product((0, 1), (1, 0))
    for _ in range(25):
        s = tuple(rng.normal(size=3) + 1j * rng.normal(size=3))
        out = np.array(F.eval(s))
        sn = np.array(s) / np.linalg.norm(s)
        on = out / np.linalg.norm(out)
        ip = abs(np.vdot(on, sn))
        assert ip > 1 - 1e-12


def test_symmetric_product_degenerate_fiber():
    F = symmetric_product((0, 1), (1, 0))
    with pytest.raises(DegenerateFiber):
        F.eval((0.0, 0.0, 0.0))


def test_symmetric_product_infinity_root():
    # s2 = 0: one root at infinity; squaring map sends it to infinity
    F = symmetric_product((0, 0, 1), (1, 0, 0))
    out = F.eval((1.0, 1.0, 0.0))  # roots {1, inf}
    # image pair = {1, inf}: s2' must vanish
    assert abs(out[2]) < 1e-14


# --- permutation conjugation --------------------------------------------------

def test_identity_permutation():
    out = sign_permutation_conjugate((0, 1, 2), REF)
    assert out.as_tuple() == REF


def test_cyclic_permutation_values():
    out = sign_permutation_conjugate((1, 2, 0), (1.0, 2.0, 3.0))
    assert out.as_tuple() == (2.0, 3.0, 1.0)
    out = sign_permutation_conjugate((1, 0, 2), (1.0, 2.0, 3.0))
    assert out.as_tuple() == (-2.0, -1.0, -3.0)


# --- cassini constructors ----------------------------------------------------

def test_cassini_parameter_guard():
    with pytest.raises(BadParameter):
        cassini_map(0.3, 0)
    with pytest.raises(BadParameter):
        cassini_phi(1)


def test_cassini_superattracting_center():
    from curvedyn.projective import induced_tangent_matrix

    f = cassini_map(0.7, 0.125)
    M = induced_tangent_matrix(f, normalize((0, 0, 1)))
    assert np.max(np.abs(M)) < 1e-12
