"""Uniformization of the cubic x^3 + y^3 + z^3 = 0 by the hexagonal torus.

The embedding
    t  |->  ( -2 wp(t) : 1 + wp'(t)/sqrt(3) : 1 - wp'(t)/sqrt(3) ),
with wp at g2 = 0, g3 = 1, lands on the cubic identically: writing
x = 1 + wp'/sqrt3, y = 1 - wp'/sqrt3, z = -2 wp gives
x^3 + y^3 = 2(1 + wp'^2) = 8 wp^3 = -z^3.  The origin t = 0 maps to the
inflection point (0:-1:1), so by the collinearity law (t1 + t2 + t3 in the
lattice iff the images are collinear) the tangent process on the curve is
exactly t |-> -2t, with no translation part.  All computations use the
t^3-scaled series so the pole at t = 0 cancels.

The real locus is {Im t = 0}: a single circle R/(T Z) with T the real
period.  Its canonical invariant measure is the pushforward of ds under
real_embed(s) = embed(s T).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import gmpy2
import numpy as np

from .contexts import ScalarContext, CTX_R, CTX_C, REAL, COMPLEX
from .errors import NoConvergence, OffCurve
from .projective import HomogPoly, ProjPoint, PolyMap, batch_normalize, fs_distance
from .torus import (Lattice, TorusPoint, equianharmonic_lattice, laurent_coeffs,
                    multiplier_matrix, real_period, reduce_min_norm,
                    wp_scaled_batch)

FERMAT_PHI = HomogPoly(3, {(3, 0, 0): 1, (0, 3, 0): 1, (0, 0, 3): 1})

SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class CurveModel:
    """Invariant curve = defining form + uniformization data."""

    phi: HomogPoly
    lattice: Lattice
    embed: Callable  # TorusPoint -> ProjPoint
    multiplier: complex  # on-curve multiplier of the active map
    origin_point: ProjPoint
    context: ScalarContext

    @property
    def multiplier_matrix(self):
        return multiplier_matrix(self.multiplier)


def fermat_embed_batch(u: np.ndarray, v: np.ndarray,
                       lat: Lattice | None = None) -> np.ndarray:
    """Unit-norm curve points for arrays of lattice coordinates (complex)."""
    if lat is None:
        lat = equianharmonic_lattice()
    t = reduce_min_norm(np.asarray(u, float), np.asarray(v, float), lat)
    A, B, C = wp_scaled_batch(t)
    P = np.stack([-2.0 * A, B + C / SQRT3, B - C / SQRT3], axis=-1)
    return batch_normalize(P)


def real_embed_batch(s: np.ndarray, lat: Lattice | None = None) -> np.ndarray:
    """Unit-norm real curve points for an array of circle coordinates s mod 1."""
    P = fermat_embed_batch(np.asarray(s, float), np.zeros_like(s, dtype=float), lat)
    # the imaginary parts are zero in exact arithmetic; drop the roundoff
    return batch_normalize(P.real)


def fermat_embed(t, ctx: ScalarContext = CTX_C) -> ProjPoint:
    """Single-point embedding; t is a TorusPoint or (u, v) lattice coords."""
    if isinstance(t, TorusPoint):
        u, v = t.u, t.v
    else:
        u, v = t
    P = fermat_embed_batch(np.array([u]), np.array([v]))[0]
    if ctx.is_complex:
        return ProjPoint(ctx.triple(tuple(P)), ctx)
    if np.max(np.abs(P.imag)) > 1e-12:
        raise OffCurve("requested a real point at a non-real torus parameter")
    Pr = P.real / np.linalg.norm(P.real)
    return ProjPoint(ctx.triple(tuple(Pr)), ctx)


def real_embed(s: float, ctx: ScalarContext = CTX_R) -> ProjPoint:
    P = real_embed_batch(np.array([float(s) % 1.0]))[0]
    return ProjPoint(ctx.triple(tuple(P)), ctx)


@lru_cache(maxsize=None)
def _origin(ctx: ScalarContext) -> ProjPoint:
    r = 1 / math.sqrt(2.0)
    return ProjPoint(ctx.triple((0.0, -r, r)), ctx)


def fermat_curve_model(ctx: ScalarContext, multiplier: complex = -2) -> CurveModel:
    """Curve model for the Fermat cubic under a map with the given multiplier."""
    lat = equianharmonic_lattice(ctx.precision_bits)
    emb = (lambda t: fermat_embed(t, ctx)) if ctx.is_complex else \
          (lambda t: real_embed(t if not isinstance(t, TorusPoint) else t.u, ctx))
    return CurveModel(FERMAT_PHI, lat, emb, multiplier, _origin(ctx), ctx)


def collinearity_residual(t1: TorusPoint, t2: TorusPoint) -> float:
    """|det| of the embedded triple at (t1, t2, -t1-t2); zero iff collinear."""
    lat = t1.lattice
    u = np.array([t1.u, t2.u, -t1.u - t2.u])
    v = np.array([t1.v, t2.v, -t1.v - t2.v])
    M = fermat_embed_batch(u, v, lat)
    return float(abs(np.linalg.det(M)))


def tangent_semiconjugacy_residual(f: PolyMap, t, curve: CurveModel) -> float:
    """fs distance between f(embed(t)) and embed(multiplier * t).

    Small values certify the uniformization and the map at the same time.
    """
    from .projective import eval_map

    if not isinstance(t, TorusPoint):
        t = TorusPoint(t[0], t[1], curve.lattice)
    p = fermat_embed(t, curve.context) if curve.context.is_complex else \
        real_embed(t.u, curve.context)
    lhs = eval_map(f, p)
    rhs_t = t.scaled(curve.multiplier_matrix)
    rhs = curve.embed(rhs_t)
    return float(fs_distance(lhs, rhs))


# ---------------------------------------------------------------------------
# Newton reprojection onto an implicit curve
# ---------------------------------------------------------------------------

CAPTURE_RADIUS = 1e-2


def newton_reproject(p: ProjPoint, phi: HomogPoly = FERMAT_PHI,
                     target: float | None = None, max_iter: int = 50) -> ProjPoint:
    """Pull a nearby point back onto {phi = 0} by Newton steps along grad phi.

    The step direction is the conjugate gradient projected into the
    orthogonal complement of the representative, so the correction is purely
    transverse first-order.  Requires |phi(p)| below the capture radius.
    """
    ctx = p.context
    if target is None:
        target = 1e-25 if ctx.precision_bits >= 128 else 30 * ctx.eps
    with ctx.active():
        xs = list(p.coords)
        val = phi.eval(*xs)
        if abs(val) > CAPTURE_RADIUS * phi.coeff_scale():
            raise NoConvergence(f"|phi| = {float(abs(val)):.3g} outside capture radius")
        for _ in range(max_iter):
            if float(abs(val)) < target:
                return ProjPoint(tuple(xs), ctx)
            g = [gp.eval(*xs) for gp in phi.gradient()]
            # w = conj(g) projected orthogonal to the representative
            w = [ctx.conj(gi) for gi in g]
            ip = sum(wi * ctx.conj(xi) for wi, xi in zip(w, xs))
            w = [wi - ip * xi for wi, xi in zip(w, xs)]
            d = sum(gi * wi for gi, wi in zip(g, w))
            if abs(d) == 0:
                break
            step = -val / d
            xs = [xi + step * wi for xi, wi in zip(xs, w)]
            n = ctx.sqrt(sum(ctx.abs2(xi) for xi in xs))
            xs = [xi / n for xi in xs]
            val = phi.eval(*xs)
        if float(abs(val)) < target:
            return ProjPoint(tuple(xs), ctx)
        raise NoConvergence(
            f"newton_reproject stalled at |phi| = {float(abs(val)):.3g}")
