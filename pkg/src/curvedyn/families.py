"""Constructors and exact structure data for every map family in scope.

Each constructor returns a PolyMap whose sparse polynomial form is
authoritative; the metadata carries hand-written vectorized evaluators for
the hot loops (validated against the sparse form in the test suite),
catalogued indeterminacy points, and the on-curve multiplier.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iproduct

import numpy as np

from .contexts import ScalarContext, CTX_R, CTX_C
from .errors import (BadParameter, DegenerateFiber, DegenerateLine,
                     DegreeMismatch, NoConvergence, PoleAtPoint,
                     RealContextError)
from .projective import (HomogPoly, PolyMap, ProjPoint, batch_normalize,
                         eval_map, fs_distance, induced_tangent_matrix,
                         normalize)

OMEGA = complex(-0.5, math.sqrt(3) / 2)  # primitive cube root of unity
GAMMA = OMEGA
DEFAULT_DEG3_K = 1j * math.sqrt(3)

PHI_FERMAT = HomogPoly(3, {(3, 0, 0): 1, (0, 3, 0): 1, (0, 0, 3): 1})
PSI_CLASSICAL = HomogPoly(3, {(1, 1, 1): 3})
PSI_DEG3 = HomogPoly(3, {(3, 0, 0): 1})


# ---------------------------------------------------------------------------
# Desboves family (degree 4)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DesbovesParams:
    a: complex
    b: complex
    c: complex

    def as_tuple(self):
        return (self.a, self.b, self.c)


def _desboves_fast_eval(a, b, c):
    def fast(P):
        x, y, z = P[..., 0], P[..., 1], P[..., 2]
        x3, y3, z3 = x * x * x, y * y * y, z * z * z
        phi = x3 + y3 + z3
        return np.stack([x * (y3 - z3 + a * phi),
                         y * (z3 - x3 + b * phi),
                         z * (x3 - y3 + c * phi)], axis=-1)
    return fast


def _desboves_fast_jac(a, b, c):
    def fast(P):
        x, y, z = P[..., 0], P[..., 1], P[..., 2]
        x3, y3, z3 = x * x * x, y * y * y, z * z * z
        phi = x3 + y3 + z3
        J = np.empty(P.shape[:-1] + (3, 3), dtype=P.dtype)
        J[..., 0, 0] = y3 - z3 + a * phi + 3 * a * x3
        J[..., 0, 1] = 3 * (1 + a) * x * y * y
        J[..., 0, 2] = 3 * (a - 1) * x * z * z
        J[..., 1, 0] = 3 * (b - 1) * y * x * x
        J[..., 1, 1] = z3 - x3 + b * phi + 3 * b * y3
        J[..., 1, 2] = 3 * (1 + b) * y * z * z
        J[..., 2, 0] = 3 * (1 + c) * z * x * x
        J[..., 2, 1] = 3 * (c - 1) * z * y * y
        J[..., 2, 2] = x3 - y3 + c * phi + 3 * c * z3
        return J
    return fast


def _desboves_fast_scalar(a, b, c):
    def fast(x, y, z):
        x3, y3, z3 = x * x * x, y * y * y, z * z * z
        phi = x3 + y3 + z3
        return (x * (y3 - z3 + a * phi),
                y * (z3 - x3 + b * phi),
                z * (x3 - y3 + c * phi))
    return fast


def _desboves_fast_jac_scalar(a, b, c):
    def fast(x, y, z):
        x3, y3, z3 = x * x * x, y * y * y, z * z * z
        phi = x3 + y3 + z3
        return ((y3 - z3 + a * phi + 3 * a * x3, 3 * (1 + a) * x * y * y,
                 3 * (a - 1) * x * z * z),
                (3 * (b - 1) * y * x * x, z3 - x3 + b * phi + 3 * b * y3,
                 3 * (1 + b) * y * z * z),
                (3 * (1 + c) * z * x * x, 3 * (c - 1) * z * y * y,
                 x3 - y3 + c * phi + 3 * c * z3))
    return fast


def desboves_map(params: DesbovesParams | tuple) -> PolyMap:
    """Degree-4 family x(y^3-z^3+a*Phi) : y(z^3-x^3+b*Phi) : z(x^3-y^3+c*Phi).

    The cubic Phi = x^3+y^3+z^3 = 0 and the three coordinate lines are
    invariant for every parameter choice.
    """
    if not isinstance(params, DesbovesParams):
        params = DesbovesParams(*params)
    a, b, c = params.as_tuple()
    comps = (
        HomogPoly(4, {(1, 3, 0): 1 + a, (1, 0, 3): a - 1, (4, 0, 0): a}),
        HomogPoly(4, {(0, 1, 3): 1 + b, (3, 1, 0): b - 1, (0, 4, 0): b}),
        HomogPoly(4, {(3, 0, 1): 1 + c, (0, 3, 1): c - 1, (0, 0, 4): c}),
    )
    meta = {
        "family": "desboves",
        "params": (a, b, c),
        "multiplier": -2,
        "fast_eval": _desboves_fast_eval(a, b, c),
        "fast_jac": _desboves_fast_jac(a, b, c),
        "fast_eval_scalar": _desboves_fast_scalar(a, b, c),
        "fast_jac_scalar": _desboves_fast_jac_scalar(a, b, c),
    }
    return PolyMap(comps, meta)


def classical_desboves() -> PolyMap:
    """The unperturbed map x(y^3-z^3) : y(z^3-x^3) : z(x^3-y^3).

    Carries the first integral Phi/Psi with Psi = 3xyz; indeterminate at the
    twelve points where two coordinates vanish or x^3 = y^3 = z^3.
    """
    f = desboves_map(DesbovesParams(0, 0, 0))
    indet = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    for wy, wz in iproduct(range(3), range(3)):
        indet.append((1, OMEGA**wy, OMEGA**wz))
    f.metadata["family"] = "classical_desboves"
    f.metadata["indeterminacy"] = tuple(indet)
    f.metadata["first_integral"] = (PHI_FERMAT, PSI_CLASSICAL)
    return f


def two_thirds_params(b) -> DesbovesParams:
    """(b - 2/3, b, b + 2/3): two of the three on-curve fixed derivatives vanish."""
    return DesbovesParams(b - Fraction(2, 3), b, b + Fraction(2, 3))


def elementary_params(b) -> DesbovesParams:
    """(-1, b, 1): every line through (0:1:0) maps to another such line."""
    return DesbovesParams(-1, b, 1)


def is_regular_desboves(params: DesbovesParams | tuple, tol: float = 1e-12) -> bool:
    """Closed-form regularity test: the seven-hyperplane product is nonzero."""
    if not isinstance(params, DesbovesParams):
        params = DesbovesParams(*params)
    a, b, c = params.as_tuple()
    a, b, c = complex(a), complex(b), complex(c)
    scale = 1 + abs(a) + abs(b) + abs(c)
    factors = (a, b, c, a + b + c, a + 1 - b, b + 1 - c, c + 1 - a)
    return all(abs(f) > tol * scale for f in factors)


# ---------------------------------------------------------------------------
# degree-3 family with invariant Fermat curve (complex only)
# ---------------------------------------------------------------------------

def degree3_map(a, b, c, k: complex = DEFAULT_DEG3_K,
                ctx: ScalarContext = CTX_C) -> PolyMap:
    """(k x y z + a*Phi : y^3 - g z^3 + b*Phi : z^3 - g y^3 + c*Phi).

    g is the cube root of unity (-1+i sqrt3)/2 and k^3 = 3(g^2 - g); the
    Fermat curve is invariant with multiplier g*k.  Complex context only.
    """
    if not ctx.is_complex:
        raise RealContextError("degree-3 family needs a complex scalar field")
    if abs(k**3 - 3 * (GAMMA**2 - GAMMA)) > 1e-9:
        raise BadParameter("k^3 must equal 3*(g^2 - g)")
    a, b, c = complex(a), complex(b), complex(c)
    comps = (
        HomogPoly(3, {(1, 1, 1): k, (3, 0, 0): a, (0, 3, 0): a, (0, 0, 3): a}),
        HomogPoly(3, {(0, 3, 0): 1 + b, (0, 0, 3): b - GAMMA, (3, 0, 0): b}),
        HomogPoly(3, {(0, 0, 3): 1 + c, (0, 3, 0): c - GAMMA, (3, 0, 0): c}),
    )

    def fast(P):
        x, y, z = P[..., 0], P[..., 1], P[..., 2]
        y3, z3 = y * y * y, z * z * z
        phi = x * x * x + y3 + z3
        return np.stack([k * x * y * z + a * phi,
                         y3 - GAMMA * z3 + b * phi,
                         z3 - GAMMA * y3 + c * phi], axis=-1)

    def fast_jac(P):
        x, y, z = P[..., 0], P[..., 1], P[..., 2]
        x2, y2, z2 = x * x, y * y, z * z
        J = np.empty(P.shape[:-1] + (3, 3), dtype=complex)
        J[..., 0, 0] = k * y * z + 3 * a * x2
        J[..., 0, 1] = k * x * z + 3 * a * y2
        J[..., 0, 2] = k * x * y + 3 * a * z2
        J[..., 1, 0] = 3 * b * x2
        J[..., 1, 1] = 3 * (1 + b) * y2
        J[..., 1, 2] = 3 * (b - GAMMA) * z2
        J[..., 2, 0] = 3 * c * x2
        J[..., 2, 1] = 3 * (c - GAMMA) * y2
        J[..., 2, 2] = 3 * (1 + c) * z2
        return J

    meta = {
        "family": "degree3",
        "params": (a, b, c),
        "k": k,
        "multiplier": GAMMA * k,
        "fast_eval": fast,
        "fast_jac": fast_jac,
        "first_integral": (PHI_FERMAT, PSI_DEG3),
        "indeterminacy": ((1, 0, 0),) if (a, b, c) == (0, 0, 0) else (),
    }
    return PolyMap(comps, meta)


def degree3_subfamily(b, k: complex = DEFAULT_DEG3_K) -> PolyMap:
    """One-parameter slice a = 0, b + g*c = 0 keeping x = 0 invariant."""
    return degree3_map(0.0, b, -complex(b) / GAMMA, k=k)


# ---------------------------------------------------------------------------
# Cassini quartic family (degree 4, real parameters in practice)
# ---------------------------------------------------------------------------

def cassini_phi(k) -> HomogPoly:
    """x^2 y^2 - (x^2 + y^2) z^2 + k z^4, nodal quartic for k != 0, 1."""
    if k in (0, 1):
        raise BadParameter("k must avoid {0, 1}")
    return HomogPoly(4, {(2, 2, 0): 1, (2, 0, 2): -1, (0, 2, 2): -1, (0, 0, 4): k})


def cassini_map(a, k) -> PolyMap:
    """Degree-4 map preserving the Cassini quartic; (0:0:1) superattracts for a != 0."""
    if k in (0, 1):
        raise BadParameter("k must avoid {0, 1}")
    a = float(a)
    k = float(k)
    comps = (
        HomogPoly(4, {(3, 1, 0): -2, (1, 3, 0): -2, (1, 1, 2): 4 * k}),
        HomogPoly(4, {(0, 4, 0): 1, (4, 0, 0): -1}),
        HomogPoly(4, {(2, 2, 0): -a, (2, 0, 2): a, (0, 2, 2): a,
                      (0, 0, 4): -a * k, (3, 1, 0): 2, (1, 3, 0): -2}),
    )

    def fast(P):
        x, y, z = P[..., 0], P[..., 1], P[..., 2]
        x2, y2, z2 = x * x, y * y, z * z
        phi = x2 * y2 - (x2 + y2) * z2 + k * z2 * z2
        return np.stack([-2 * x * y * (x2 + y2 - 2 * k * z2),
                         y2 * y2 - x2 * x2,
                         -a * phi + 2 * x * y * (x2 - y2)], axis=-1)

    meta = {"family": "cassini", "params": (a, k), "fast_eval": fast,
            "curve_phi": cassini_phi(k)}
    return PolyMap(comps, meta)


# ---------------------------------------------------------------------------
# quotient of the Desboves family by the (Z/3)^2 symmetry group
# ---------------------------------------------------------------------------

def _cubed_linear_times_coord(coord: int, lin: tuple) -> HomogPoly:
    """x_coord * (l . (x,y,z))^3 expanded by the multinomial theorem."""
    terms = {}
    l1, l2, l3 = lin
    for i in range(4):
        for j in range(4 - i):
            kk = 3 - i - j
            coef = (math.factorial(3) // (math.factorial(i) * math.factorial(j)
                                          * math.factorial(kk)))
            coef = coef * l1**i * l2**j * l3**kk
            if coef == 0:
                continue
            expo = [i, j, kk]
            expo[coord] += 1
            key = tuple(expo)
            terms[key] = terms.get(key, 0) + coef
    return HomogPoly(4, terms)


def quotient_desboves(params: DesbovesParams | tuple) -> PolyMap:
    """Image of the Desboves map under (x:y:z) -> (x^3:y^3:z^3).

    Satisfies pi o f = g o pi componentwise on the homogeneous lifts; the
    line xi + eta + zeta = 0 (image of the Fermat curve) is invariant.
    """
    if not isinstance(params, DesbovesParams):
        params = DesbovesParams(*params)
    a, b, c = params.as_tuple()
    comps = (
        _cubed_linear_times_coord(0, (a, 1 + a, a - 1)),
        _cubed_linear_times_coord(1, (b - 1, b, 1 + b)),
        _cubed_linear_times_coord(2, (1 + c, c - 1, c)),
    )
    return PolyMap(comps, {"family": "quotient_desboves", "params": (a, b, c)})


# ---------------------------------------------------------------------------
# Lattes map on P^1 (base of the elementary fibration)
# ---------------------------------------------------------------------------

def lattes_p1_step(X):
    """One step of X' = -X (X^3 + 2) / (2 X^3 + 1); None encodes infinity."""
    if X is None:
        return None  # (1:0) is fixed
    X3 = X**3
    den = 2 * X3 + 1
    if abs(den) == 0:
        return None
    return -X * (X3 + 2) / den


def lattes_pair_step(x, y):
    """Projective form (x:y) -> (-x(x^3+2y^3) : y(2x^3+y^3))."""
    x3, y3 = x**3, y**3
    return -x * (x3 + 2 * y3), y * (2 * x3 + y3)


LATTES_CRITICAL_VALUES = tuple(-OMEGA**j for j in range(3))  # cube roots of -1


# ---------------------------------------------------------------------------
# synthetic family with an invariant rotation line (Herman-ring scaffold)
# ---------------------------------------------------------------------------

def synthetic_ring_map(alpha: float, base_degree: int, r_coeffs,
                       scale: float = 1.0) -> PolyMap:
    """(e^{2 pi i alpha} z0 z1^{D-1} : z1^D : z2 * r(z0,z1,z2)).

    The line z2 = 0 is invariant and the restriction is the rigid rotation
    X -> e^{2 pi i alpha} X, so every circle |X| = rho is invariant.
    r may be a coefficient triple (degree-1, for D = 2) or any HomogPoly of
    degree D - 1; `scale` multiplies r (small scale => attracting ring).
    """
    D = int(base_degree)
    if D < 2:
        raise BadParameter("base degree must be >= 2")
    if isinstance(r_coeffs, HomogPoly):
        rpoly = r_coeffs
    else:
        c0, c1, c2 = r_coeffs
        rpoly = HomogPoly(1, {(1, 0, 0): c0, (0, 1, 0): c1, (0, 0, 1): c2})
    if rpoly.degree != D - 1:
        raise DegreeMismatch(f"r has degree {rpoly.degree}, need {D - 1}")
    if scale != 1.0:
        rpoly = rpoly * scale
    rot = cmath.exp(2j * math.pi * alpha)
    comps = (
        HomogPoly(D, {(1, D - 1, 0): rot}),
        HomogPoly(D, {(0, D, 0): 1}),
        HomogPoly(D, {(i, j, kk + 1): v for (i, j, kk), v in rpoly.terms.items()}),
    )
    meta = {"family": "synthetic_ring", "params": (alpha, D),
            "rotation": rot, "r_poly": rpoly}
    return PolyMap(comps, meta)


def ring_transverse_poly(f: PolyMap):
    """phi(X) = r(X, 1, 0): the transverse multiplier along z2 = 0.

    Returned as a coefficient list [c_0, ..., c_m] with phi = sum c_j X^j.
    """
    rpoly = f.metadata["r_poly"]
    coeffs = [0.0] * (rpoly.degree + 1)
    for (i, j, kk), v in rpoly.terms.items():
        if kk == 0:
            coeffs[i] += v
    return coeffs


# ---------------------------------------------------------------------------
# symmetric product of a one-variable map (Ueda construction)
# ---------------------------------------------------------------------------

class SymmetricProductMap:
    """(f x f)/S2 acting on P^2 via the elementary-symmetric coordinates.

    Point (s0 : s1 : s2) encodes the unordered root pair of
    s2 Y^2 - s1 Y + s0; evaluation splits the pair, applies (p : q) to each
    root, and re-symmetrizes.  Exact for all degrees, no symbolic expansion.
    """

    def __init__(self, p_coeffs, q_coeffs):
        # one-variable homogeneous pair of common degree d:
        # p(x, y) = sum p_j x^j y^(d-j)
        if len(p_coeffs) != len(q_coeffs):
            raise DegreeMismatch("p and q need the same degree")
        self.p = tuple(complex(v) for v in p_coeffs)
        self.q = tuple(complex(v) for v in q_coeffs)
        self.degree = len(p_coeffs) - 1

    def _apply_1d(self, x, y):
        px = qx = 0j
        for j in range(self.degree + 1):
            mono = x**j * y**(self.degree - j)
            px += self.p[j] * mono
            qx += self.q[j] * mono
        return px, qx

    @staticmethod
    def split_fiber(s0, s1, s2):
        """Unordered root pair of s2 Y^2 - s1 Y + s0 as two P^1 points."""
        A, B, C = complex(s2), -complex(s1), complex(s0)
        scale = max(abs(A), abs(B), abs(C))
        if scale == 0:
            raise DegenerateFiber("zero fiber coordinates")
        disc = B * B - 4 * A * C
        sq = cmath.sqrt(disc)
        m = -B + sq if abs(-B + sq) >= abs(-B - sq) else -B - sq
        if abs(m) < 1e-300 * scale:
            # double root at C/A ... or fully degenerate
            if abs(A) > 1e-300 * scale:
                r = (-B / (2 * A), 1.0)
                return r, r
            raise DegenerateFiber("quadratic degenerated completely")
        return (m, 2 * A), (2 * C, m)

    def eval(self, s):
        s0, s1, s2 = s
        (x1, y1), (x2, y2) = self.split_fiber(s0, s1, s2)
        p1, q1 = self._apply_1d(x1, y1)
        p2, q2 = self._apply_1d(x2, y2)
        out = (p1 * p2, p1 * q2 + q1 * p2, q1 * q2)
        n = max(abs(v) for v in out)
        if n == 0:
            raise DegenerateFiber("image pair collapsed")
        return tuple(v / n for v in out)

    def eval_point(self, pt: ProjPoint) -> ProjPoint:
        return normalize(self.eval(tuple(pt.coords)), pt.context)

    @staticmethod
    def symmetrize(x1, y1, x2, y2):
        """pi((x1:y1), (x2:y2)) = (x1 x2 : x1 y2 + y1 x2 : y1 y2)."""
        return (x1 * x2, x1 * y2 + y1 * x2, y1 * y2)


def symmetric_product(p_coeffs, q_coeffs) -> SymmetricProductMap:
    return SymmetricProductMap(p_coeffs, q_coeffs)


# ---------------------------------------------------------------------------
# symmetries and conjugations
# ---------------------------------------------------------------------------

def _perm_sign(sigma) -> int:
    s = 1
    sig = list(sigma)
    for i in range(3):
        for j in range(i + 1, 3):
            if sig[i] > sig[j]:
                s = -s
    return s


def sign_permutation_conjugate(sigma, params: DesbovesParams | tuple):
    """Parameters of the conjugated map: sgn(sigma) * (p_sigma1, p_sigma2, p_sigma3).

    sigma is a permutation of (0, 1, 2); the same sign-corrected permutation
    acting on coordinates conjugates f_params to f_result.
    """
    if not isinstance(params, DesbovesParams):
        params = DesbovesParams(*params)
    vals = params.as_tuple()
    sgn = _perm_sign(sigma)
    return DesbovesParams(*(sgn * vals[i] for i in sigma))


def sign_permutation_point_map(sigma):
    """The coordinate action hat-sigma as a callable on (n,3) arrays."""
    sgn = _perm_sign(sigma)
    idx = list(sigma)

    def act(P):
        return sgn * P[..., idx]

    return act


def g_symmetries():
    """The nine diagonal automorphisms (a x : b y : z), a^3 = b^3 = 1."""
    return [np.diag([OMEGA**i, OMEGA**j, 1.0]) for i in range(3) for j in range(3)]


# ---------------------------------------------------------------------------
# first integrals
# ---------------------------------------------------------------------------

def chordal_distance(a, b, c, d) -> float:
    """Chordal metric on P^1 between (a : b) and (c : d), range [0, 2]."""
    num = 2 * abs(a * d - b * c)
    den = math.sqrt(abs(a) ** 2 + abs(b) ** 2) * math.sqrt(abs(c) ** 2 + abs(d) ** 2)
    return num / den


def first_integral_residual(f: PolyMap, Phi: HomogPoly, Psi: HomogPoly,
                            p: ProjPoint) -> float:
    """Chordal distance between eta(p) and eta(f(p)) for eta = Phi/Psi."""
    ctx = p.context
    q = eval_map(f, p)
    with ctx.active():
        a, b = Phi.eval_point(p), Psi.eval_point(p)
        c, d = Phi.eval_point(q), Psi.eval_point(q)
    tol = 1e-12
    if abs(complex(b)) < tol * Psi.coeff_scale() or \
       abs(complex(d)) < tol * Psi.coeff_scale():
        raise PoleAtPoint("Psi vanishes at the point or its image")
    return chordal_distance(complex(a), complex(b), complex(c), complex(d))


# ---------------------------------------------------------------------------
# fixed points of Desboves maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FixedPointReport:
    point: ProjPoint
    on_fermat: bool
    transverse_derivative: complex | None
    label: str
    line: str | None = None
    line_derivatives: tuple = ()
    eigenvalues: tuple | None = None


def on_curve_fixed_point_derivatives(params: DesbovesParams | tuple):
    """Closed-form transverse derivatives at the nine on-curve fixed points.

    Returns {line: derivative}: 3(c-b)-2 on x=0, 3(a-c)-2 on y=0,
    3(b-a)-2 on z=0, each attained at three points.
    """
    if not isinstance(params, DesbovesParams):
        params = DesbovesParams(*params)
    a, b, c = params.as_tuple()
    return {"x=0": 3 * (c - b) - 2, "y=0": 3 * (a - c) - 2, "z=0": 3 * (b - a) - 2}


def _newton_fixed_point(f: PolyMap, p: ProjPoint, max_iter: int = 80):
    """Damped Newton for f(p) = p in a local orthonormal chart."""
    from .projective import _complement_basis

    ctx = p.context
    dt = complex if ctx.is_complex else float

    def residual(P):
        q, bad = _try_eval(P)
        if bad:
            return None, None
        e1, e2 = _complement_basis(P)
        # align the image phase with P before subtracting
        ph = np.vdot(P, q)
        if abs(ph) < 1e-9:
            return None, None
        q = q * (ph.conjugate() / abs(ph)) if ctx.is_complex else q * np.sign(ph)
        d = q - P
        return np.array([np.vdot(e1, d), np.vdot(e2, d)]), (e1, e2)

    def _try_eval(P):
        Q = f.eval_batch(P[None, :])[0]
        n = np.linalg.norm(Q)
        if n < f.eps_indet():
            return None, True
        return Q / n, False

    P = p.as_array().astype(dt)
    for _ in range(max_iter):
        r, basis = residual(P)
        if r is None:
            return None
        if np.linalg.norm(r) < 1e-13:
            return normalize(tuple(P), ctx)
        e1, e2 = basis
        h = 1e-7
        Jcols = []
        for e in (e1, e2):
            rp, _ = residual((P + h * e) / np.linalg.norm(P + h * e))
            if rp is None:
                return None
            Jcols.append((rp - r) / h)
        J = np.stack(Jcols, axis=1)
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            return None
        lam = 1.0
        base = np.linalg.norm(r)
        for _ in range(20):
            Pn = P + lam * (step[0] * e1 + step[1] * e2)
            Pn = Pn / np.linalg.norm(Pn)
            rn, _ = residual(Pn)
            if rn is not None and np.linalg.norm(rn) < base:
                P = Pn
                break
            lam *= 0.5
        else:
            return None
    return None


def fermat_fixed_points(params: DesbovesParams | tuple,
                        ctx: ScalarContext = CTX_C,
                        newton_seeds: int = 1200, seed: int = 20) -> list:
    """Catalogue the fixed points of a Desboves map.

    Nine on-curve points and the three coordinate points come with closed
    forms (derivatives per the restriction to the named invariant line);
    the remaining fixed points with xyz != 0 are located by damped Newton
    seeded from a coarse random grid (complex: Fubini-Study, real: sphere).
    """
    if not isinstance(params, DesbovesParams):
        params = DesbovesParams(*params)
    a, b, c = params.as_tuple()
    for diff, line in (((complex(c) - complex(b)), "x=0"),
                       ((complex(a) - complex(c)), "y=0"),
                       ((complex(b) - complex(a)), "z=0")):
        if abs(diff - 1) < 1e-12:
            raise DegenerateLine(
                f"every point of the line {line} is fixed; all five "
                "restriction derivatives are +1")
    f = desboves_map(params)
    derivs = on_curve_fixed_point_derivatives(params)
    reports = []

    roots = [1.0] if not ctx.is_complex else [OMEGA**j for j in range(3)]
    # nine (three real) points on the curve: one coordinate zero
    for w in roots:
        for point, line in ((((0, -w, 1)), "x=0"), (((-w, 0, 1)), "y=0"),
                            (((-w, 1, 0)), "z=0")):
            reports.append(FixedPointReport(
                point=normalize(point, ctx), on_fermat=True,
                transverse_derivative=derivs[line], label=f"curve:{line}",
                line=line))

    # coordinate points: two zero coordinates, on two invariant lines each
    a_, b_, c_ = complex(a), complex(b), complex(c)
    two_zero = (
        ((0, 0, 1), "x=0", ((("x=0", _safe_div(b_ + 1, c_)),
                             ("y=0", _safe_div(a_ - 1, c_))))),
        ((0, 1, 0), "x=0", ((("x=0", _safe_div(c_ - 1, b_)),
                             ("z=0", _safe_div(a_ + 1, b_))))),
        ((1, 0, 0), "y=0", ((("y=0", _safe_div(c_ + 1, a_)),
                             ("z=0", _safe_div(b_ - 1, a_))))),
    )
    for point, line, pairs in two_zero:
        main = dict(pairs).get(line)
        reports.append(FixedPointReport(
            point=normalize(point, ctx), on_fermat=False,
            transverse_derivative=main, label="coordinate",
            line=line, line_derivatives=tuple(pairs)))

    # interior fixed points (xyz != 0): Newton from a coarse random cloud
    rng = np.random.default_rng(seed)
    found = []
    for _ in range(newton_seeds):
        if ctx.is_complex:
            v = rng.normal(size=3) + 1j * rng.normal(size=3)
        else:
            v = rng.normal(size=3)
        v = v / np.linalg.norm(v)
        try:
            sol = _newton_fixed_point(f, normalize(tuple(v), ctx))
        except Exception:
            sol = None
        if sol is None:
            continue
        arr = sol.as_array()
        if np.min(np.abs(arr)) < 1e-8:   # already catalogued
            continue
        if any(float(fs_distance(sol, other)) < 1e-6 for other in found):
            continue
        found.append(sol)
    for sol in found:
        try:
            eig = tuple(np.linalg.eigvals(induced_tangent_matrix(f, sol)))
        except Exception:
            eig = None
        reports.append(FixedPointReport(
            point=sol, on_fermat=False, transverse_derivative=None,
            label="interior", eigenvalues=eig))
    return reports


def _safe_div(num, den):
    if abs(den) < 1e-300:
        return math.inf
    return num / den
