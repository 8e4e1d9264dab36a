"""Transverse derivative norms and transverse Lyapunov exponents.

The pointwise object: at a curve point p with unit representative P, the
projective tangent plane is the orthogonal complement of P.  The curve
tangent direction tau is the in-plane direction annihilated by grad Phi,
the transverse unit direction nu is the in-plane complement of tau, and the
derivative of the induced map sends nu to

    w = (I - Q Q*) J nu / |F(P)|,   Q = F(P)/|F(P)|,

whose component along nu at the image point is the transverse norm.  Its
log, averaged against the canonical measure of the curve, is the exponent.

Estimators:
  * torus_quadrature - randomized rank-1 lattice averages over the
    uniformizing torus (complex) or shifted uniform grids on the circle
    coordinate (real).  Unbiased; stderr from the shift scatter.
  * birkhoff_orbit - complex: the exact integer orbit of the multiplier
    action on the torus; real: honest ambient iteration of the map at high
    precision with Newton reprojection onto the curve every step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .contexts import ScalarContext, CTX_R, CTX_C
from .errors import (CriticalOrbitHit, Indeterminate, NoSignChange, OffCurve,
                     SingularSample)
from .fermat import (CurveModel, fermat_curve_model, fermat_embed_batch,
                     newton_reproject, real_embed, real_embed_batch)
from .families import (LATTES_CRITICAL_VALUES, desboves_map, elementary_params,
                       lattes_p1_step, two_thirds_params)
from .projective import PolyMap, ProjPoint, batch_normalize
from .sampling import batch_stderr, fsum_mean, lattice_nodes, stream
from .torus import integer_torus_orbit

ORTHOGONAL = "orthogonal_complement"
FIBER = "fiber_vertical"

REJECT_FLOOR = 1e-300  # integrable log singularities: trim, count, renormalize
ON_CURVE_TOL = 1e-8


@dataclass(frozen=True)
class ExponentEstimate:
    value: float
    stderr: float
    samples: int
    method: str            # "torus_quadrature" | "birkhoff_orbit"
    metric: str = ORTHOGONAL
    rejected: int = 0
    field: str = "complex"

    def agrees(self, other: "ExponentEstimate", k_sigma: float = 2.0) -> bool:
        tol = k_sigma * math.hypot(self.stderr, other.stderr)
        return abs(self.value - other.value) <= tol


# ---------------------------------------------------------------------------
# pointwise transverse norms
# ---------------------------------------------------------------------------

def _tangent_normal_batch(P: np.ndarray, gradphi):
    G = gradphi(P)
    tau = np.cross(np.conj(P), G)
    tau = tau / np.linalg.norm(tau, axis=-1, keepdims=True)
    nu = np.conj(np.cross(P, tau))
    nu = nu / np.linalg.norm(nu, axis=-1, keepdims=True)
    return tau, nu


def _gradphi_fermat(P):
    return 3 * P * P  # gradient of x^3+y^3+z^3 (componentwise square * 3)


def transverse_norm_batch(f: PolyMap, P: np.ndarray,
                          gradphi=_gradphi_fermat) -> np.ndarray:
    """Vectorized ||f'_tr|| at on-curve representatives (orthogonal metric)."""
    _, nu = _tangent_normal_batch(P, gradphi)
    Q0 = f.eval_batch(P)
    nq = np.linalg.norm(Q0, axis=-1, keepdims=True)
    Q = Q0 / nq
    J = f.jacobian_batch(P)
    w = np.einsum("...ij,...j->...i", J, nu)
    w = (w - np.sum(w * np.conj(Q), axis=-1, keepdims=True) * Q) / nq
    _, nuq = _tangent_normal_batch(Q, gradphi)
    return np.abs(np.sum(w * np.conj(nuq), axis=-1))


def fiber_norm_batch(f: PolyMap, P: np.ndarray) -> np.ndarray:
    """||f'|| on fiber-vertical vectors in the flat fiber metric.

    Only meaningful for elementary geometry with center (0:1:0): fibers are
    the lines (x:z) = const and the metric is |dy| / sqrt(|x|^2 + |z|^2).
    """
    J = f.jacobian_batch(P)
    dyy = np.abs(J[..., 1, 1])
    Q0 = f.eval_batch(P)
    num = np.sqrt(np.abs(P[..., 0]) ** 2 + np.abs(P[..., 2]) ** 2)
    den = np.sqrt(np.abs(Q0[..., 0]) ** 2 + np.abs(Q0[..., 2]) ** 2)
    return dyy * num / den


def transverse_norm(f: PolyMap, curve: CurveModel, p: ProjPoint,
                    metric: str = ORTHOGONAL) -> float:
    """Scalar transverse norm at a single on-curve point.

    Works in the point's scalar context (any precision).  Raises OffCurve
    when the curve residual exceeds 1e-8 and propagates Indeterminate.
    """
    ctx = p.context
    with ctx.active():
        resid = abs(curve.phi.eval(*p.coords))
        if float(resid) > ON_CURVE_TOL * curve.phi.coeff_scale():
            raise OffCurve(f"curve residual {float(resid):.2e}")
        if metric == FIBER:
            return _fiber_norm_scalar(f, p)
        return _transverse_norm_scalar(f, curve, p)


def _cross(u, v):
    return (u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0])


def _transverse_norm_scalar(f: PolyMap, curve: CurveModel, p: ProjPoint):
    ctx = p.context
    conj = ctx.conj
    P = p.coords
    G = tuple(g.eval(*P) for g in curve.phi.gradient())
    tau = _cross(tuple(conj(x) for x in P), G)
    ntau = ctx.sqrt(sum(ctx.abs2(t) for t in tau))
    tau = tuple(t / ntau for t in tau)
    nu = tuple(conj(w) for w in _cross(P, tau))
    nnu = ctx.sqrt(sum(ctx.abs2(t) for t in nu))
    nu = tuple(t / nnu for t in nu)

    F = f.eval_lift(p)
    nq = ctx.sqrt(sum(ctx.abs2(v) for v in F))
    if float(nq) < f.eps_indet():
        raise Indeterminate("transverse norm at an indeterminacy point")
    Q = tuple(v / nq for v in F)
    J = f.jacobian_lift(p)
    w = tuple(sum(J[i][j] * nu[j] for j in range(3)) for i in range(3))
    ip = sum(wi * conj(qi) for wi, qi in zip(w, Q))
    w = tuple((wi - ip * qi) / nq for wi, qi in zip(w, Q))

    Gq = tuple(g.eval(*Q) for g in curve.phi.gradient())
    tq = _cross(tuple(conj(x) for x in Q), Gq)
    ntq = ctx.sqrt(sum(ctx.abs2(t) for t in tq))
    tq = tuple(t / ntq for t in tq)
    nq2 = tuple(conj(v) for v in _cross(Q, tq))
    nnq = ctx.sqrt(sum(ctx.abs2(t) for t in nq2))
    nq2 = tuple(t / nnq for t in nq2)
    return abs(sum(wi * conj(ni) for wi, ni in zip(w, nq2)))


def _fiber_norm_scalar(f: PolyMap, p: ProjPoint):
    ctx = p.context
    P = p.coords
    J = f.jacobian_lift(p)
    F = f.eval_lift(p)
    num = ctx.sqrt(ctx.abs2(P[0]) + ctx.abs2(P[2]))
    den = ctx.sqrt(ctx.abs2(F[0]) + ctx.abs2(F[2]))
    return abs(J[1][1]) * num / den


# ---------------------------------------------------------------------------
# exponent along the complex curve
# ---------------------------------------------------------------------------

N_SHIFTS = 16


def _norms_at_nodes(f, u, v, metric):
    P = fermat_embed_batch(u, v)
    if metric == FIBER:
        return fiber_norm_batch(f, P)
    return transverse_norm_batch(f, P)


def lyap_complex(f: PolyMap, curve: CurveModel | None = None,
                 n_samples: int = 10**6, seed: int = 1,
                 method: str = "torus_quadrature",
                 metric: str = ORTHOGONAL) -> ExponentEstimate:
    """Transverse exponent along the complex Fermat curve.

    torus_quadrature: N_SHIFTS randomly shifted Fibonacci lattices on the
    fundamental domain.  birkhoff_orbit: the multiplier acting on the torus
    as an exact integer orbit, evaluated in blocks.
    """
    if curve is None:
        curve = fermat_curve_model(CTX_C, f.metadata.get("multiplier", -2))
    if method == "torus_quadrature":
        rng = stream(seed, 0)
        per = max(n_samples // N_SHIFTS, 1000)
        means = []
        rejected = 0
        total = 0
        for _ in range(N_SHIFTS):
            du, dv = rng.random(2)
            u, v = lattice_nodes(per, (du, dv))
            tn = _norms_at_nodes(f, u, v, metric)
            good = tn > REJECT_FLOOR
            rejected += int(np.sum(~good))
            total += len(tn)
            means.append(float(np.mean(np.log(tn[good]))))
        value = fsum_mean(means)
        stderr = float(np.std(means, ddof=1) / math.sqrt(len(means)))
        return ExponentEstimate(value, stderr, total, "torus_quadrature",
                                metric, rejected, "complex")
    if method == "birkhoff_orbit":
        rng = stream(seed, 1)
        u0, v0 = rng.random(2)
        u, v = integer_torus_orbit(curve.multiplier_matrix, n_samples, (u0, v0))
        tn = _norms_at_nodes(f, u, v, metric)
        good = tn > REJECT_FLOOR
        rejected = int(np.sum(~good))
        logs = np.log(tn[good])
        value, stderr = batch_stderr(logs)
        return ExponentEstimate(value, stderr, len(tn), "birkhoff_orbit",
                                metric, rejected, "complex")
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# exponent along the real curve
# ---------------------------------------------------------------------------

def lyap_real(f: PolyMap, curve: CurveModel | None = None,
              n_iter: int = 10**5, seed: int = 2,
              precision_bits: int = 192,
              method: str = "birkhoff_orbit",
              burn_in: int = 1000,
              metric: str = ORTHOGONAL) -> ExponentEstimate:
    """Transverse exponent along the real Fermat curve.

    birkhoff_orbit iterates the actual map on the real curve at
    precision_bits with Newton reprojection every step (the on-curve
    dynamics doubles errors, so hardware precision would not shadow);
    torus_quadrature averages over the circle coordinate directly, which
    samples the same canonical measure.
    """
    if curve is None:
        curve = fermat_curve_model(CTX_R, -2)
    if method == "torus_quadrature":
        rng = stream(seed, 2)
        per = max(n_iter // N_SHIFTS, 1000)
        means = []
        rejected = 0
        total = 0
        for _ in range(N_SHIFTS):
            s = ((np.arange(per) + 0.5) / per + rng.random()) % 1.0
            P = real_embed_batch(s)
            if metric == FIBER:
                tn = fiber_norm_batch(f, P)
            else:
                tn = transverse_norm_batch(f, P)
                # hardware evaluation floors out where the transverse
                # derivative vanishes to high order; those few samples are
                # re-evaluated at high precision (the zero at the origin
                # point is quartic along the real locus, so the floored
                # region has measure ~1e-4 and would bias the mean)
                weak = np.where(tn < 1e-12)[0]
                if len(weak):
                    tn[weak] = _rescue_real_norms(f, curve, P[weak])
            good = tn > REJECT_FLOOR
            rejected += int(np.sum(~good))
            total += len(tn)
            means.append(float(np.mean(np.log(tn[good]))))
        value = fsum_mean(means)
        stderr = float(np.std(means, ddof=1) / math.sqrt(len(means)))
        return ExponentEstimate(value, stderr, total, "torus_quadrature",
                                metric, rejected, "real")
    if method == "birkhoff_orbit":
        logs, rejected = _real_birkhoff_logs(f, n_iter, seed, precision_bits,
                                             burn_in)
        value, stderr = batch_stderr(np.array(logs))
        return ExponentEstimate(value, stderr, len(logs), "birkhoff_orbit",
                                metric, rejected, "real")
    raise ValueError(f"unknown method {method!r}")


def _rescue_real_norms(f: PolyMap, curve: CurveModel, P: np.ndarray,
                       bits: int = 192) -> np.ndarray:
    """Re-evaluate nearly vanishing transverse norms at high precision."""
    ctx = ScalarContext("real", bits)
    hp_curve = fermat_curve_model(ctx, curve.multiplier)
    out = np.empty(len(P))
    with ctx.active():
        for i, row in enumerate(P):
            p = ProjPoint(ctx.triple(tuple(row)), ctx)
            p = newton_reproject(p, hp_curve.phi)
            out[i] = float(transverse_norm(f, hp_curve, p))
    return out


def _real_birkhoff_logs(f: PolyMap, n_iter: int, seed: int,
                        precision_bits: int, burn_in: int):
    """Ambient high-precision orbit on the real curve; returns log norms."""
    ctx = ScalarContext("real", max(precision_bits, 128))
    curve = fermat_curve_model(ctx, -2)
    rng = stream(seed, 3)
    p = real_embed(float(rng.random()), ctx)
    p = newton_reproject(p, curve.phi)
    logs = []
    rejected = 0
    with ctx.active():
        for i in range(n_iter + burn_in):
            if i >= burn_in:
                tn = transverse_norm(f, curve, p)
                if float(tn) <= REJECT_FLOOR:
                    rejected += 1
                else:
                    logs.append(float(ctx.log(tn)))
            q = _eval_normalized_scalar(f, p, ctx)
            p = newton_reproject(q, curve.phi)
    return logs, rejected


def _eval_normalized_scalar(f: PolyMap, p: ProjPoint, ctx: ScalarContext):
    F = f.eval_lift(p)
    n = ctx.sqrt(sum(ctx.abs2(v) for v in F))
    if float(n) < f.eps_indet():
        raise Indeterminate("orbit hit an indeterminacy point")
    return ProjPoint(tuple(v / n for v in F), ctx)


# ---------------------------------------------------------------------------
# exponent along the invariant line y = 0 for elementary maps
# ---------------------------------------------------------------------------

def lyap_line_elementary(b, n_iter: int = 2 * 10**5, seed: int = 3,
                         field: str = "real",
                         max_restarts: int = 5) -> ExponentEstimate:
    """Exponent along {y = 0} for the elementary family (-1, b, 1).

    Averages log of the vertical fiber derivative at y = 0 along a generic
    orbit of the degree-4 base map on P^1 (whose absolutely continuous
    ergodic measure makes orbit averages converge).  Orbits that land within
    1e-12 of a critical value are restarted with a fresh seed.
    """
    if abs(complex(b)) < 1e-15:
        raise CriticalOrbitHit("b = 0 is degenerate (center indeterminate)")
    b = complex(b) if field == "complex" else float(b)
    rng = stream(seed, 4)
    for attempt in range(max_restarts):
        if field == "complex":
            X = complex(rng.normal(), rng.normal())
        else:
            X = float(rng.normal()) * 2.0
        result = _line_orbit_logs(b, X, n_iter)
        if result is not None:
            logs, rejected = result
            value, stderr = batch_stderr(np.array(logs))
            return ExponentEstimate(value, stderr, len(logs), "birkhoff_orbit",
                                    FIBER, rejected, field)
    raise CriticalOrbitHit("base orbit kept landing on critical values")


def _line_orbit_logs(b, X, n_iter, burn: int = 200):
    """Returns (logs, rejected) or None when the orbit is pinned.

    The invariant density diverges like a square root at the critical
    values, so near passes are frequent and harmless (the integrand is
    regular there); such samples are rejected and counted rather than
    aborting the orbit.  Only an orbit landing essentially exactly on a
    critical value (a fixed point of the base map) forces a restart.
    """
    logs = []
    rejected = 0
    for i in range(n_iter + burn):
        X3 = X * X * X
        den = 2 * X3 + 1
        if abs(den) < 1e-14:
            return None  # exact pole: restart
        d_crit = min(abs(X - cv) for cv in LATTES_CRITICAL_VALUES)
        if d_crit < 1e-15:
            return None  # pinned at a critical value: restart
        skip = d_crit < 1e-12
        if i >= burn:
            if skip:
                rejected += 1
            else:
                # d/dy of the y-component at (X:0:1), flat fiber metric
                num = abs(1 - X3 + b * (X3 + 1)) * math.sqrt(abs(X) ** 2 + 1)
                den2 = math.hypot(abs(X * (X3 + 2)), abs(den))
                if num > 0.0:
                    logs.append(math.log(num / den2))
                else:
                    rejected += 1
        X = -X * (X3 + 2) / den
    return logs, rejected


# ---------------------------------------------------------------------------
# parameter sweeps and sign thresholds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FamilySlice:
    """One-parameter family descriptor for sweeps and threshold finding."""

    name: str
    params_of: object  # b -> DesbovesParams

    def map_at(self, b) -> PolyMap:
        return desboves_map(self.params_of(b))


TWO_THIRDS = FamilySlice("two_thirds", two_thirds_params)
ELEMENTARY = FamilySlice("elementary", elementary_params)


def sweep(family: FamilySlice, grid, n_samples: int = 10**5, seed: int = 5,
          fields=("real", "complex"), method: str = "torus_quadrature"):
    """Exponent estimates over a parameter grid; failures become rows too.

    Returns a list of dict rows following the CSV schema
    family,a,b,c,field,method,metric,samples,lyap,stderr,rejected.
    """
    rows = []
    for b in grid:
        pars = family.params_of(b)
        f = desboves_map(pars)
        for fieldname in fields:
            row = {"family": family.name,
                   "a": float(pars.a), "b": float(pars.b), "c": float(pars.c),
                   "field": fieldname, "method": method,
                   "metric": ORTHOGONAL}
            try:
                if fieldname == "real":
                    est = lyap_real(f, n_iter=n_samples, seed=seed,
                                    method=method)
                else:
                    est = lyap_complex(f, n_samples=n_samples, seed=seed,
                                       method=method)
                row.update(samples=est.samples, lyap=est.value,
                           stderr=est.stderr, rejected=est.rejected)
            except Exception as exc:  # per-point failures recorded, not fatal
                row.update(samples=0, lyap=float("nan"), stderr=float("nan"),
                           rejected=0, error=type(exc).__name__)
            rows.append(row)
    return rows


def threshold_find(family: FamilySlice, bracket, tol: float = 5e-3,
                   field: str = "real", n_samples: int = 2 * 10**5,
                   seed: int = 6, max_iter: int = 40) -> float:
    """Bisect for the parameter where the exponent changes sign.

    Endpoint estimates must differ from zero by 3 sigma with opposite signs,
    otherwise NoSignChange is raised ("blowout bifurcation" locator).
    """
    def estimate(b):
        f = family.map_at(b)
        if field == "real":
            return lyap_real(f, n_iter=n_samples, seed=seed,
                             method="torus_quadrature")
        return lyap_complex(f, n_samples=n_samples, seed=seed)

    lo, hi = bracket
    e_lo, e_hi = estimate(lo), estimate(hi)
    for e, b in ((e_lo, lo), (e_hi, hi)):
        if abs(e.value) < 3 * e.stderr:
            raise NoSignChange(f"exponent at b={b} not sign-definite "
                               f"({e.value:.4f} +- {e.stderr:.4f})")
    if math.copysign(1, e_lo.value) == math.copysign(1, e_hi.value):
        raise NoSignChange("same confident sign at both endpoints")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo < tol:
            return mid
        e_mid = estimate(mid)
        if math.copysign(1, e_mid.value) == math.copysign(1, e_lo.value):
            lo, e_lo = mid, e_mid
        else:
            hi, e_hi = mid, e_mid
    return 0.5 * (lo + hi)


def write_sweep_csv(rows, path):
    cols = ["family", "a", "b", "c", "field", "method", "metric",
            "samples", "lyap", "stderr", "rejected"]
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row.get(c)) for c in cols) + "\n")


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)
