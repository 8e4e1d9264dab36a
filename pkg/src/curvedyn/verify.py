"""Exact-identity residual suite.

Each entry evaluates one closed-form identity at randomized points and
returns a worst-case (relative where meaningful) residual.  All of these
are structural facts about the families, so every residual should sit at
rounding level; the CLI and the acceptance gate require < 1e-9.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .contexts import CTX_C, CTX_R
from .families import (DEFAULT_DEG3_K, GAMMA, OMEGA, classical_desboves,
                       degree3_map, desboves_map, g_symmetries,
                       on_curve_fixed_point_derivatives, quotient_desboves,
                       sign_permutation_conjugate, sign_permutation_point_map,
                       symmetric_product)
from .fermat import fermat_embed_batch
from .projective import batch_normalize, normalize
from .sampling import stream

REFERENCE_PARAMS = (Fraction(-5, 9), Fraction(1, 9), Fraction(7, 9))


def _angle_residual(A: np.ndarray, B: np.ndarray) -> float:
    """max sine of the projective angle between corresponding rows of A, B.

    Computed from the orthogonal residual so exact equalities report at the
    rounding level instead of the ~1e-8 arccos floor.
    """
    A = batch_normalize(A)
    B = batch_normalize(B)
    ip = np.sum(A * np.conj(B), axis=-1)
    R = A - ip[..., None] * B
    return float(np.max(np.linalg.norm(R, axis=-1)))


def euler_residual(f, n: int = 1000, seed: int = 0) -> float:
    """J(p) . p = d F(p) for homogeneous lifts, relative to |F|."""
    rng = stream(seed, 40)
    cols = 3
    P = rng.normal(size=(n, cols)) + (1j * rng.normal(size=(n, cols))
                                      if True else 0)
    P = batch_normalize(P)
    J = f.jacobian_batch(P)
    F = f.eval_batch(P)
    lhs = np.einsum("...ij,...j->...i", J, P)
    scale = np.maximum(1.0, np.abs(F))
    return float(np.max(np.abs(lhs - f.degree * F) / scale))


def fixed_point_derivative_residuals(params=REFERENCE_PARAMS) -> dict:
    """Closed forms of the restriction derivatives, plus the mean = -2 law."""
    from .exponent import transverse_norm
    from .fermat import fermat_curve_model

    a, b, c = [Fraction(v) if not isinstance(v, Fraction) else v
               for v in params]
    derivs = on_curve_fixed_point_derivatives((a, b, c))
    mean = sum(derivs.values(), Fraction(0)) / 3
    out = {"fixed_point_mean_minus2": abs(float(mean + 2))}
    # transverse norm at (0:-1:1) must equal |3(c-b)-2| for any params
    f = desboves_map((float(a), float(b), float(c)))
    curve = fermat_curve_model(CTX_C, -2)
    p = normalize((0.0, -1.0, 1.0), CTX_C)
    tn = transverse_norm(f, curve, p)
    expected = abs(3 * float(c - b) - 2)
    out["transverse_norm_at_inflection"] = abs(float(tn) - expected)
    # the two-zero coordinate point derivatives (restriction to x = 0)
    out["y0_derivative_closed_form"] = abs(float((b + 1) / c) - 10 / 7)
    out["yinf_derivative_closed_form"] = abs(float((c - 1) / b) + 2.0)
    return out


def classical_integral_residuals(n: int = 1000, seed: int = 1) -> dict:
    """First integral of the unperturbed map: exact at (1:2:3), random points."""
    # exact integer arithmetic at (1:2:3)
    x, y, z = 1, 2, 3
    fx = x * (y**3 - z**3)
    fy = y * (z**3 - x**3)
    fz = z * (x**3 - y**3)
    eta0 = Fraction(x**3 + y**3 + z**3, 3 * x * y * z)
    eta1 = Fraction(fx**3 + fy**3 + fz**3, 3 * fx * fy * fz)
    out = {"classical_integral_123": float(abs(eta1 - eta0)),
           "classical_image_123": 0.0 if (fx, fy, fz) == (-19, 52, -21) else 1.0}
    # chordal residual at random complex points
    rng = stream(seed, 41)
    P = rng.normal(size=(n, 3)) + 1j * rng.normal(size=(n, 3))
    f0 = classical_desboves()
    Q = f0.eval_batch(P)
    num0 = np.sum(P**3, axis=1)
    den0 = 3 * P[:, 0] * P[:, 1] * P[:, 2]
    num1 = np.sum(Q**3, axis=1)
    den1 = 3 * Q[:, 0] * Q[:, 1] * Q[:, 2]
    chord = 2 * np.abs(num0 * den1 - num1 * den0) / (
        np.hypot(np.abs(num0), np.abs(den0)) * np.hypot(np.abs(num1), np.abs(den1)))
    out["classical_integral_random"] = float(np.max(chord))
    return out


def degree3_integral_residual(n: int = 1000, seed: int = 2) -> float:
    """Phi(H0)/Phi = Psi(H0)/Psi = k^3 y^3 z^3 at random points.

    (The shared multiplier is k^3 y^3 z^3 with k^3 = 3(g^2 - g); the
    common-factor equality is exactly the first-integral property.)
    """
    rng = stream(seed, 42)
    h0 = degree3_map(0.0, 0.0, 0.0)
    k3 = DEFAULT_DEG3_K**3
    P = rng.normal(size=(n, 3)) + 1j * rng.normal(size=(n, 3))
    Q = h0.eval_batch(P)
    phi0 = np.sum(P**3, axis=1)
    phi1 = np.sum(Q**3, axis=1)
    psi0 = P[:, 0] ** 3
    psi1 = Q[:, 0] ** 3
    mult = k3 * P[:, 1] ** 3 * P[:, 2] ** 3
    r1 = np.abs(phi1 - mult * phi0) / np.maximum(1.0, np.abs(phi1))
    r2 = np.abs(psi1 - mult * psi0) / np.maximum(1.0, np.abs(psi1))
    return float(max(np.max(r1), np.max(r2)))


def quotient_semiconjugacy_residual(params=REFERENCE_PARAMS, n: int = 1000,
                                    seed: int = 3) -> float:
    """pi o f = g o pi componentwise on lifts (pi = coordinate cubing)."""
    a, b, c = [float(v) for v in params]
    f = desboves_map((a, b, c))
    g = quotient_desboves((a, b, c))
    rng = stream(seed, 43)
    P = rng.normal(size=(n, 3)) + 1j * rng.normal(size=(n, 3))
    lhs = f.eval_batch(P) ** 3
    rhs = g.eval_batch(P**3)
    return float(np.max(np.abs(lhs - rhs)) / max(1.0, float(np.max(np.abs(lhs)))))


def permutation_conjugacy_residual(params=REFERENCE_PARAMS, n: int = 1000,
                                   seed: int = 4) -> float:
    """hat-sigma o f_params = f_{hat-sigma(params)} o hat-sigma, all sigma."""
    a, b, c = [float(v) for v in params]
    rng = stream(seed, 44)
    P = rng.normal(size=(n, 3)) + 1j * rng.normal(size=(n, 3))
    P = batch_normalize(P)
    f = desboves_map((a, b, c))
    worst = 0.0
    perms = [(0, 1, 2), (1, 2, 0), (2, 0, 1), (1, 0, 2), (0, 2, 1), (2, 1, 0)]
    for sigma in perms:
        act = sign_permutation_point_map(sigma)
        g = desboves_map(sign_permutation_conjugate(sigma, (a, b, c)))
        lhs = act(f.eval_batch(P))
        rhs = g.eval_batch(act(P))
        worst = max(worst, _angle_residual(lhs, rhs))
    return worst


def g_symmetry_residual(params=REFERENCE_PARAMS, n: int = 100,
                        seed: int = 5) -> float:
    """f o g = g o f for the nine diagonal cube-root symmetries."""
    a, b, c = [float(v) for v in params]
    f = desboves_map((a, b, c))
    rng = stream(seed, 45)
    P = rng.normal(size=(n, 3)) + 1j * rng.normal(size=(n, 3))
    P = batch_normalize(P)
    worst = 0.0
    for G in g_symmetries():
        lhs = f.eval_batch(P @ G.T)
        rhs = f.eval_batch(P) @ G.T
        worst = max(worst, _angle_residual(lhs, rhs))
    return worst


def cassini_e22_residual(k: float = 0.32, n: int = 1000, seed: int = 6) -> float:
    from .cassini import cassini_identity_residual

    return cassini_identity_residual(k, n=n, seed=seed)


def symmetric_product_residuals(n: int = 1000, seed: int = 7) -> dict:
    """Footnote formula for (f x f)/S2 and its defining semiconjugacy."""
    rng = stream(seed, 46)
    out = {}
    # the squaring map: image of the symmetrized pair has the closed form
    # (coefficient convention: p(x, y) = sum_j p_j x^j y^(d-j))
    sq = symmetric_product((0, 0, 1), (1, 0, 0))  # p = x^2, q = y^2
    worst = 0.0
    for _ in range(200):
        x1, y1, x2, y2 = rng.normal(size=4) + 1j * rng.normal(size=4)
        s = sq.symmetrize(x1, y1, x2, y2)
        img = np.array(sq.eval(s))
        expect = np.array([x1**2 * x2**2,
                           x1**2 * y2**2 + y1**2 * x2**2,
                           y1**2 * y2**2])
        worst = max(worst, _angle_residual(img[None, :], expect[None, :]))
    out["symmetric_square_formula"] = worst
    # identity map lifts to the identity
    ident = symmetric_product((0, 1), (1, 0))  # p = x, q = y
    worst = 0.0
    for _ in range(100):
        s = tuple(rng.normal(size=3) + 1j * rng.normal(size=3))
        img = np.array(ident.eval(s))
        worst = max(worst, _angle_residual(img[None, :], np.array(s)[None, :]))
    out["symmetric_identity"] = worst
    # general semiconjugacy pi(f(u), f(v)) = F_sym(pi(u, v))
    p = (0.3 + 0.1j, 1.0, -0.2)          # random degree-2 pair
    q = (1.0, -0.4j, 0.9)
    F = symmetric_product(p, q)
    worst = 0.0
    for _ in range(n):
        x1, y1, x2, y2 = rng.normal(size=4) + 1j * rng.normal(size=4)
        s = F.symmetrize(x1, y1, x2, y2)
        lhs = np.array(F.eval(s))
        f1 = F._apply_1d(x1, y1)
        f2 = F._apply_1d(x2, y2)
        rhs = np.array(F.symmetrize(f1[0], f1[1], f2[0], f2[1]))
        worst = max(worst, _angle_residual(lhs[None, :], rhs[None, :]))
    out["symmetric_semiconjugacy"] = worst
    return out


def coordinate_line_invariance_residual(params=REFERENCE_PARAMS) -> float:
    """Symbolic: each component of the lift keeps its coordinate factor."""
    a, b, c = [float(v) for v in params]
    f = desboves_map((a, b, c))
    worst = 0
    for axis, comp in enumerate(f.components):
        for expo, coef in comp.terms.items():
            if expo[axis] == 0 and abs(complex(coef)) > 0:
                worst = max(worst, abs(complex(coef)))
    return float(worst)


def run_identity_suite(seed: int = 0) -> dict:
    """All exact identities; returns {name: residual}."""
    out = {}
    f_ref = desboves_map(tuple(float(v) for v in REFERENCE_PARAMS))
    out["euler_desboves"] = euler_residual(f_ref, seed=seed)
    out["euler_degree3"] = euler_residual(degree3_map(0.0, GAMMA / 2, -0.5),
                                          seed=seed + 1)
    out.update(fixed_point_derivative_residuals())
    out.update(classical_integral_residuals(seed=seed + 2))
    out["degree3_integral"] = degree3_integral_residual(seed=seed + 3)
    out["quotient_semiconjugacy"] = quotient_semiconjugacy_residual(seed=seed + 4)
    out["permutation_conjugacy"] = permutation_conjugacy_residual(seed=seed + 5)
    out["g_symmetry"] = g_symmetry_residual(seed=seed + 6)
    out["cassini_e22"] = cassini_e22_residual(seed=seed + 7)
    out.update(symmetric_product_residuals(seed=seed + 8))
    out["coordinate_line_invariance"] = coordinate_line_invariance_residual()
    return out
