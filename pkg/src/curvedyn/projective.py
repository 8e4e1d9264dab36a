"""Projective points, homogeneous polynomials, and rational self-maps of P^2.

Points are stored as unit-norm representative triples.  Polynomials are
sparse (exponent triple -> coefficient); maps built by the family
constructors usually also carry hand-written vectorized evaluators which the
batch kernels prefer (the sparse form stays authoritative and is what the
tests validate against).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .contexts import ScalarContext, CTX_R, require_same
from .errors import Indeterminate, ZeroVector


def _norm(ctx, xs):
    return ctx.sqrt(sum(ctx.abs2(x) for x in xs))


@dataclass(frozen=True)
class ProjPoint:
    """A point of P^2 over ctx.field, stored as a unit-norm triple."""

    coords: tuple
    context: ScalarContext

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def as_array(self) -> np.ndarray:
        dt = complex if self.context.is_complex else float
        return np.array([dt(c) for c in self.coords])

    def negate(self) -> "ProjPoint":
        return ProjPoint(tuple(-c for c in self.coords), self.context)


def normalize(raw, ctx: ScalarContext = CTX_R) -> ProjPoint:
    """Scale a nonzero triple to unit norm.  Raises ZeroVector on (0,0,0)."""
    with ctx.active():
        xs = ctx.triple(raw)
        n = _norm(ctx, xs)
        if ctx.to_float(n) < 1e3 * ctx.eps:
            raise ZeroVector("cannot normalize the zero triple")
        return ProjPoint(tuple(x / n for x in xs), ctx)


def fs_distance(p: ProjPoint, q: ProjPoint):
    """Fubini-Study distance arccos |<p, q>| in [0, pi/2].

    Small angles are computed through the residual u - <u,v> v, whose norm
    is exactly sin(theta) for unit representatives; the naive arccos of the
    inner product cannot resolve angles below ~1e-8 in double precision.
    """
    require_same(p.context, q.context)
    ctx = p.context
    with ctx.active():
        ip = sum(a * ctx.conj(b) for a, b in zip(p.coords, q.coords))
        r = [a - ip * b for a, b in zip(p.coords, q.coords)]
        s = ctx.sqrt(sum(ctx.abs2(v) for v in r))
        if float(s) < 0.7:
            return ctx.asin(s)
        return ctx.acos(abs(ip))


def proj_equal(p: ProjPoint, q: ProjPoint, tol: float = 1e-9) -> bool:
    """Projective equality is small Fubini-Study distance (no phase fixing)."""
    return float(fs_distance(p, q)) < tol


@dataclass(frozen=True)
class HomogPoly:
    """Sparse homogeneous polynomial in (x, y, z)."""

    degree: int
    terms: dict = field(default_factory=dict)  # (i,j,k) -> coefficient

    def __post_init__(self):
        for expo in self.terms:
            if sum(expo) != self.degree:
                raise ValueError(f"term {expo} does not have degree {self.degree}")

    def eval(self, x, y, z):
        """Evaluate on scalars or numpy arrays."""
        acc = 0
        for (i, j, k), coef in self.terms.items():
            acc = acc + coef * x**i * y**j * z**k
        return acc

    def eval_point(self, p: ProjPoint):
        with p.context.active():
            return self.eval(*p.coords)

    def partial(self, axis: int) -> "HomogPoly":
        """d/dx_axis, by term-wise monomial differentiation."""
        out = {}
        for expo, coef in self.terms.items():
            e = expo[axis]
            if e == 0:
                continue
            new = list(expo)
            new[axis] = e - 1
            key = tuple(new)
            out[key] = out.get(key, 0) + e * coef
        return HomogPoly(max(self.degree - 1, 0), out)

    def gradient(self):
        return tuple(self.partial(i) for i in range(3))

    def coeff_scale(self) -> float:
        return sum(abs(complex(c)) for c in self.terms.values())

    def __mul__(self, s):
        return HomogPoly(self.degree, {e: c * s for e, c in self.terms.items()})


@dataclass(frozen=True)
class PolyMap:
    """Self-map of P^2 given by three homogeneous polynomials of one degree.

    metadata carries at least {"family": str, "params": tuple}; families add
    catalogued indeterminacy points, fast vectorized evaluators, symmetry
    data, and the on-curve multiplier where applicable.
    """

    components: tuple  # three HomogPoly
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        degs = {c.degree for c in self.components}
        if len(degs) != 1:
            raise ValueError("components must share one degree")

    @property
    def degree(self) -> int:
        return self.components[0].degree

    @property
    def family(self) -> str:
        return self.metadata.get("family", "custom")

    @property
    def params(self):
        return self.metadata.get("params", ())

    def eps_indet(self) -> float:
        """Indeterminacy threshold at unit representatives."""
        return 1e-13 * max(c.coeff_scale() for c in self.components)

    # -- scalar paths ----------------------------------------------------

    def eval_lift(self, p: ProjPoint):
        """Raw image triple of the homogeneous lift at the unit representative."""
        with p.context.active():
            x, y, z = p.coords
            fast = self.metadata.get("fast_eval_scalar")
            if fast is not None:
                return fast(x, y, z)
            return tuple(c.eval(x, y, z) for c in self.components)

    def jacobian_lift(self, p: ProjPoint):
        """3x3 nested tuple of exact partials of the lift at p."""
        with p.context.active():
            x, y, z = p.coords
            fast = self.metadata.get("fast_jac_scalar")
            if fast is not None:
                return fast(x, y, z)
            grads = self._grads()
            return tuple(
                tuple(g.eval(x, y, z) for g in row) for row in grads
            )

    def _grads(self):
        cached = self.metadata.get("_grads")
        if cached is None:
            cached = tuple(c.gradient() for c in self.components)
            self.metadata["_grads"] = cached
        return cached

    # -- batch paths (hardware precision) ---------------------------------

    def eval_batch(self, P: np.ndarray) -> np.ndarray:
        """Unnormalized image triples for an (n,3) array of representatives."""
        fast = self.metadata.get("fast_eval")
        if fast is not None:
            return fast(P)
        x, y, z = P[..., 0], P[..., 1], P[..., 2]
        return np.stack([c.eval(x, y, z) for c in self.components], axis=-1)

    def jacobian_batch(self, P: np.ndarray) -> np.ndarray:
        fast = self.metadata.get("fast_jac")
        if fast is not None:
            return fast(P)
        x, y, z = P[..., 0], P[..., 1], P[..., 2]
        grads = self._grads()
        rows = [np.stack([g.eval(x, y, z) for g in row], axis=-1) for row in grads]
        return np.stack(rows, axis=-2)


def eval_map(f: PolyMap, p: ProjPoint) -> ProjPoint:
    """Evaluate f at p and renormalize.  Raises Indeterminate near I(f)."""
    ctx = p.context
    with ctx.active():
        img = f.eval_lift(p)
        n = _norm(ctx, img)
        if ctx.to_float(n) < f.eps_indet():
            raise Indeterminate(
                f"{f.family} map undefined at {tuple(map(ctx.to_complex, p.coords))}"
            )
        return ProjPoint(tuple(v / n for v in img), ctx)


def jacobian(f: PolyMap, p: ProjPoint):
    """Exact partial derivatives of the homogeneous lift at p (3x3)."""
    return f.jacobian_lift(p)


def eval_batch_normalized(f: PolyMap, P: np.ndarray):
    """Batch eval + normalize; returns (points, indeterminate_mask)."""
    Q = f.eval_batch(P)
    n = np.sqrt(np.sum(np.abs(Q) ** 2, axis=-1))
    bad = n < f.eps_indet()
    nsafe = np.where(bad, 1.0, n)
    return Q / nsafe[..., None], bad


def batch_normalize(P: np.ndarray) -> np.ndarray:
    return P / np.sqrt(np.sum(np.abs(P) ** 2, axis=-1, keepdims=True))


def induced_tangent_matrix(f: PolyMap, p: ProjPoint, basis=None):
    """Derivative of the induced map of P^2 at p, in orthonormal frames.

    Returns a 2x2 (numpy) matrix M with M[i, j] = <Df e_j, f_i> where
    (e_1, e_2) spans the orthogonal complement of p and (f_1, f_2) spans the
    complement of f(p).  At a fixed point the same frame is used on both
    sides, so eigenvalues of M are the multipliers of the fixed point.
    """
    ctx = p.context
    P = p.as_array()
    J = np.array(jacobian(f, p), dtype=complex if ctx.is_complex else float)
    F = np.array([(complex if ctx.is_complex else float)(v) for v in f.eval_lift(p)])
    nf = np.linalg.norm(F)
    if nf < f.eps_indet():
        raise Indeterminate("jacobian of induced map at indeterminacy point")
    Q = F / nf
    if basis is None:
        e1, e2 = _complement_basis(P)
    else:
        e1, e2 = basis
    fixed = abs(np.vdot(Q, P)) > 1.0 - 1e-9
    if fixed:
        f1, f2 = e1, e2
    else:
        f1, f2 = _complement_basis(Q)
    M = np.empty((2, 2), dtype=complex if ctx.is_complex else float)
    for j, e in enumerate((e1, e2)):
        w = J @ e
        w = (w - np.vdot(Q, w) * Q) / nf
        M[0, j] = np.vdot(f1, w)
        M[1, j] = np.vdot(f2, w)
    return M


def _complement_basis(P: np.ndarray):
    """Two orthonormal vectors spanning the orthogonal complement of P."""
    k = int(np.argmin(np.abs(P)))
    e = np.zeros(3, dtype=P.dtype)
    e[k] = 1.0
    v1 = e - np.vdot(P, e) * P
    v1 = v1 / np.linalg.norm(v1)
    v2 = np.conj(np.cross(P, v1))
    v2 = v2 / np.linalg.norm(v2)
    return v1, v2
