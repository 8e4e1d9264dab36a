"""Invariant-circle discovery, rotation numbers, sweeps, persistence probes.

The Desboves attractor at the reference parameters is a 2-cycle of closed
curves swapped by the map, so discovery always splits even/odd iterates,
tests each cluster for being a closed 1-dimensional curve (plane fit + low
order Fourier fit of the 3D points against the in-plane angle), and fits
both members of the pair.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .contexts import CTX_R, ScalarContext
from .errors import Escaped, InsufficientData, NoConvergence, NotACircle
from .projective import (PolyMap, ProjPoint, eval_batch_normalized,
                         normalize)
from .sampling import batch_stderr, sphere_uniform, stream

FOURIER_HARMONICS = 10


@dataclass
class FittedLoop:
    """Closed-curve fit: Fourier series of 3D points against in-plane angle."""

    center: np.ndarray
    plane: np.ndarray          # rows: e1, e2 (in-plane), e3 (normal)
    coeffs: np.ndarray         # (2H+1, 3) Fourier coefficients
    residual: float            # max point distance to the fit
    diameter: float

    def angle_of(self, pts: np.ndarray) -> np.ndarray:
        E = np.atleast_2d(pts) - self.center
        x = E @ self.plane[0]
        y = E @ self.plane[1]
        return np.arctan2(y, x)

    def at(self, theta: np.ndarray) -> np.ndarray:
        theta = np.atleast_1d(theta)
        cols = [np.ones_like(theta)]
        for h in range(1, FOURIER_HARMONICS + 1):
            cols += [np.cos(h * theta), np.sin(h * theta)]
        return np.stack(cols, axis=1) @ self.coeffs

    def tangent_at(self, theta: float) -> np.ndarray:
        cols = [np.zeros(1)]
        for h in range(1, FOURIER_HARMONICS + 1):
            cols += [-h * np.sin(h * np.atleast_1d(theta)),
                     h * np.cos(h * np.atleast_1d(theta))]
        d = np.stack(cols, axis=1) @ self.coeffs
        return d[0] / np.linalg.norm(d[0])


@dataclass
class CircleModel:
    """A numerically found invariant circle (possibly one of a swapped pair)."""

    points: np.ndarray            # ordered cyclic sample of the main loop
    rotation_number: float
    fit_residual: float
    period_of_cycle: int          # 2 when f swaps two loops
    loop: FittedLoop
    partner: FittedLoop | None = None
    partner_points: np.ndarray | None = None


def _coherent_signs(pts: np.ndarray) -> np.ndarray:
    out = pts.copy()
    for i in range(1, len(out)):
        if np.dot(out[i - 1], out[i]) < 0:
            out[i] = -out[i]
    return out


def _fit_loop(cloud: np.ndarray) -> FittedLoop:
    ctr = cloud.mean(axis=0)
    E = cloud - ctr
    _, S, Vt = np.linalg.svd(E, full_matrices=False)
    theta = np.arctan2(E @ Vt[1], E @ Vt[0])
    cols = [np.ones_like(theta)]
    for h in range(1, FOURIER_HARMONICS + 1):
        cols += [np.cos(h * theta), np.sin(h * theta)]
    A = np.stack(cols, axis=1)
    coeffs, *_ = np.linalg.lstsq(A, cloud, rcond=None)
    resid = float(np.linalg.norm(cloud - A @ coeffs, axis=1).max())
    diam = float(2 * np.linalg.norm(E, axis=1).max())
    return FittedLoop(ctr, Vt, coeffs, resid, diam)


def _iterate(f: PolyMap, P: np.ndarray, n: int, collect: bool = False):
    out = np.empty((n, 3)) if collect else None
    for i in range(n):
        Q, bad = eval_batch_normalized(f, P[None, :])
        if bad[0] or not np.all(np.isfinite(Q[0])):
            raise Escaped("orbit reached an indeterminacy point")
        P = Q[0].real if not np.iscomplexobj(Q) else Q[0]
        if collect:
            out[i] = P
    return (P, out) if collect else P


def find_attracting_circle(f: PolyMap, seed_point=None, n_transient: int = 40000,
                           n_collect: int = 4000, seed: int = 0,
                           planarity_tol: float = 0.15,
                           fit_tol: float = 0.02) -> CircleModel:
    """Drive an orbit onto the circle attractor and fit a CircleModel.

    Raises Escaped if the orbit converges to the invariant cubic (or leaves
    through an indeterminacy point), NotACircle if the tail collapses to a
    point or fails the closed-curve tests.
    """
    if seed_point is None:
        rng = stream(seed, 0)
        P = sphere_uniform(rng, 1)[0]
    else:
        P = seed_point.as_array() if isinstance(seed_point, ProjPoint) \
            else np.asarray(seed_point, float)
        P = P / np.linalg.norm(P)
    P = _iterate(f, P, n_transient)
    P, pts = _iterate(f, P, 2 * n_collect, collect=True)
    if np.abs(np.sum(pts[-200:] ** 3, axis=1)).max() < 1e-8:
        raise Escaped("orbit converged to the invariant cubic")
    even = _coherent_signs(pts[0::2])
    odd = _coherent_signs(pts[1::2])
    # alternation test: consecutive iterates far apart, even cluster coherent
    d_alt = np.linalg.norm(_coherent_signs(pts[:200])[1:] - _coherent_signs(pts[:200])[:-1], axis=1).mean()
    d_even = np.linalg.norm(even[1:51] - even[:50], axis=1).mean()
    period = 2 if d_alt > 3 * d_even else 1
    cloud = even if period == 2 else _coherent_signs(pts)
    E = cloud - cloud.mean(axis=0)
    S = np.linalg.svd(E, compute_uv=False)
    if S[0] / math.sqrt(len(cloud)) < 1e-6:
        raise NotACircle("attractor collapsed to a point")
    if S[2] / S[0] > planarity_tol:
        raise NotACircle(f"tail not curve-like (planarity {S[2]/S[0]:.3f})")
    loop = _fit_loop(cloud)
    if loop.residual > fit_tol * loop.diameter:
        raise NotACircle(f"closed-curve fit residual {loop.residual:.3g} "
                         f"exceeds {fit_tol:.2%} of diameter")
    partner = partner_pts = None
    if period == 2:
        partner = _fit_loop(odd)
        partner_pts = odd
    rho = rotation_number(cloud, loop)
    ordering = np.argsort(loop.angle_of(cloud))
    return CircleModel(points=cloud[ordering], rotation_number=rho,
                       fit_residual=loop.residual, period_of_cycle=period,
                       loop=loop, partner=partner, partner_points=partner_pts)


def rotation_number(orbit_pts: np.ndarray, loop: FittedLoop | None = None) -> float:
    """Average angular increment along the fitted circle, mod 1.

    Input must be consecutive iterates under f^period on one loop.  Uses
    Richardson-style extrapolation over nested windows; the orientation
    convention makes the first recorded increment positive.
    """
    if len(orbit_pts) < 1000:
        raise InsufficientData("need >= 1000 consecutive on-circle iterates")
    if loop is None:
        loop = _fit_loop(orbit_pts)
    th = np.unwrap(loop.angle_of(orbit_pts)) / (2 * math.pi)
    if th[1] - th[0] < 0:
        th = -th
    n = len(th)
    # two nested estimates: full window and half window, extrapolated
    r_full = (th[-1] - th[0]) / (n - 1)
    r_half = (th[n // 2] - th[0]) / (n // 2)
    rho = 2 * r_full - r_half
    return rho % 1.0


def circle_transverse_exponent(f: PolyMap, circle: CircleModel,
                               n_iter: int = 20000, fit_tol: float = 1e-6):
    """Birkhoff average of the log transverse-derivative norm along the circle.

    The derivative acts on the quotient of the ambient tangent plane by the
    circle tangent direction; tangents come from the Fourier fits.  For a
    swapped pair the orbit alternates loops and the norms compose across the
    pair, which is what the average needs.
    """
    from .exponent import ExponentEstimate

    if circle.fit_residual > max(fit_tol, 0.05 * circle.loop.diameter):
        raise InsufficientData("circle fit residual too large")
    loops = [circle.loop, circle.partner or circle.loop]
    P = circle.points[0].copy()
    logs = []
    parity = 0
    for _ in range(n_iter):
        lp = loops[parity]
        lq = loops[(parity + 1) % circle.period_of_cycle] \
            if circle.period_of_cycle == 2 else lp
        tn = _circle_transverse_norm(f, P, lp, lq)
        Q, bad = eval_batch_normalized(f, P[None, :])
        if bad[0]:
            raise Escaped("hit indeterminacy while averaging")
        Qp = Q[0]
        if np.dot(Qp, P) < 0:
            Qp = -Qp
        if tn > 0:
            logs.append(math.log(tn))
        P = Qp
        parity = (parity + 1) % circle.period_of_cycle
    value, stderr = batch_stderr(np.array(logs))
    return ExponentEstimate(value, stderr, len(logs), "birkhoff_orbit",
                            "orthogonal_complement", 0, "real")


def _circle_transverse_norm(f: PolyMap, P: np.ndarray, loop_p: FittedLoop,
                            loop_q: FittedLoop) -> float:
    from .projective import _complement_basis

    J = f.jacobian_batch(P[None, :])[0]
    F = f.eval_batch(P[None, :])[0]
    nf = np.linalg.norm(F)
    Q = F / nf
    sgnQ = 1.0 if np.dot(Q, loop_q.center) >= 0 else -1.0
    Qc = Q * sgnQ
    # tangent of the loop at P, projected into the sphere tangent plane
    tP = loop_p.tangent_at(float(loop_p.angle_of(P)[0]))
    tP = tP - np.dot(tP, P) * P
    tP = tP / np.linalg.norm(tP)
    nuP = np.cross(P, tP)
    tQ = loop_q.tangent_at(float(loop_q.angle_of(Qc)[0]))
    tQ = tQ - np.dot(tQ, Q) * Q
    tQ = tQ / np.linalg.norm(tQ)
    nuQ = np.cross(Q, tQ)
    w = (J @ nuP - np.dot(J @ nuP, Q) * Q) / nf
    return float(abs(np.dot(w, nuQ)))


# ---------------------------------------------------------------------------
# rotation-number sweeps with plateau detection
# ---------------------------------------------------------------------------

def rotation_sweep(a: float, b: float, c_grid, seed: int = 1,
                   n_transient: int = 40000, n_collect: int = 4000,
                   with_exponent: bool = True):
    """find_attracting_circle + rotation_number per grid value of c.

    Row statuses: circle | shrunk_to_point | broke_up | escaped.
    """
    from .families import desboves_map

    rows = []
    for c in c_grid:
        f = desboves_map((a, b, c))
        row = {"c": float(c), "rotation": float("nan"),
               "status": "circle", "fit_residual": float("nan"),
               "lyap": float("nan"), "stderr": float("nan")}
        try:
            model = find_attracting_circle(f, seed=seed,
                                           n_transient=n_transient,
                                           n_collect=n_collect)
            row["rotation"] = model.rotation_number
            row["fit_residual"] = model.fit_residual
            if with_exponent:
                est = circle_transverse_exponent(f, model, n_iter=4000)
                row["lyap"], row["stderr"] = est.value, est.stderr
        except NotACircle as exc:
            row["status"] = ("shrunk_to_point" if "point" in str(exc)
                             else "broke_up")
        except Escaped:
            row["status"] = "escaped"
        except NoConvergence:
            row["status"] = "broke_up"
        rows.append(row)
    return rows


def detect_plateaus(rows, denominators=range(2, 9), tol: float = 1e-4,
                    min_run: int = 3):
    """Maximal grid runs where rho sits at a rational p/q within tol."""
    plateaus = []
    targets = sorted({(p, q) for q in denominators for p in range(1, q)
                      if math.gcd(p, q) == 1})
    for p, q in targets:
        val = p / q
        run = []
        for row in rows:
            ok = row["status"] == "circle" and abs(row["rotation"] - val) < tol
            if ok:
                run.append(row)
            else:
                if len(run) >= min_run:
                    plateaus.append({"p": p, "q": q,
                                     "c_lo": run[0]["c"], "c_hi": run[-1]["c"],
                                     "n": len(run)})
                run = []
        if len(run) >= min_run:
            plateaus.append({"p": p, "q": q, "c_lo": run[0]["c"],
                             "c_hi": run[-1]["c"], "n": len(run)})
    return plateaus


def newton_periodic_orbit(f: PolyMap, p0: np.ndarray, period: int,
                          max_iter: int = 60, tol: float = 1e-12):
    """Polish a periodic point of f^period by damped Newton in a 2D chart.

    Returns the point as an array, or None.  Used to certify that a rotation
    plateau p/q really carries an attracting period-q orbit of f o f.
    """
    from .projective import _complement_basis

    def step_map(P):
        for _ in range(period):
            Q, bad = eval_batch_normalized(f, P[None, :])
            if bad[0]:
                return None
            P = Q[0]
        return P

    P = np.asarray(p0, float)
    P = P / np.linalg.norm(P)
    for _ in range(max_iter):
        FP = step_map(P)
        if FP is None:
            return None
        if np.dot(FP, P) < 0:
            FP = -FP
        e1, e2 = _complement_basis(P)
        r = np.array([np.dot(e1, FP - P), np.dot(e2, FP - P)])
        if np.linalg.norm(r) < tol:
            return P
        h = 1e-7
        cols = []
        for e in (e1, e2):
            Ph = P + h * e
            Ph /= np.linalg.norm(Ph)
            FPh = step_map(Ph)
            if FPh is None:
                return None
            if np.dot(FPh, Ph) < 0:
                FPh = -FPh
            rh = np.array([np.dot(e1, FPh - Ph), np.dot(e2, FPh - Ph)])
            cols.append((rh - r) / h)
        try:
            delta = np.linalg.solve(np.stack(cols, axis=1), -r)
        except np.linalg.LinAlgError:
            return None
        lam, base = 1.0, np.linalg.norm(r)
        for _ in range(15):
            Pn = P + lam * (delta[0] * e1 + delta[1] * e2)
            Pn /= np.linalg.norm(Pn)
            FPn = step_map(Pn)
            if FPn is not None:
                if np.dot(FPn, Pn) < 0:
                    FPn = -FPn
                if np.linalg.norm(FPn - Pn) < base:
                    P = Pn
                    break
            lam *= 0.5
        else:
            return None
    return None


def verify_plateau_orbit(a: float, b: float, c: float, q: int,
                         seed: int = 3) -> bool:
    """True if an attracting period-q orbit of f o f exists near the circles."""
    from .families import desboves_map

    f = desboves_map((a, b, c))
    try:
        model = find_attracting_circle(f, seed=seed)
    except Exception:
        return False
    # seeds along the fitted circle; period q under f o f = 2q under f
    for theta in np.linspace(0, 2 * math.pi, 8, endpoint=False):
        p0 = model.loop.at(np.array([theta]))[0]
        p0 = p0 / np.linalg.norm(p0)
        sol = newton_periodic_orbit(f, p0, 2 * q)
        if sol is None:
            continue
        # require genuine period q for f o f (not a divisor)
        P = sol.copy()
        ok = True
        for divisor in range(1, q):
            if q % divisor:
                continue
            Q = sol.copy()
            for _ in range(2 * divisor):
                Q, _b = eval_batch_normalized(f, Q[None, :])
                Q = Q[0]
            if min(np.linalg.norm(Q - sol), np.linalg.norm(Q + sol)) < 1e-8:
                ok = False
                break
        if ok:
            return True
    return False


# ---------------------------------------------------------------------------
# persistence probe
# ---------------------------------------------------------------------------

def _hausdorff(A: np.ndarray, B: np.ndarray) -> float:
    """Symmetric Hausdorff distance between antipodally identified clouds."""
    def dmat(U, V):
        d1 = np.linalg.norm(U[:, None, :] - V[None, :, :], axis=2)
        d2 = np.linalg.norm(U[:, None, :] + V[None, :, :], axis=2)
        return np.minimum(d1, d2)

    D = dmat(A, B)
    return float(max(D.min(axis=1).max(), D.min(axis=0).max()))


def persistence_probe(params0, delta: float, probes: int = 4, seed: int = 5,
                      n_transient: int = 40000, n_collect: int = 3000) -> dict:
    """Perturb the parameters and track the circle pair.

    Returns a report with per-probe Hausdorff drift and rotation-number
    change; a probe where no circle is found is flagged, not fatal.
    """
    from .families import desboves_map

    a, b, c = [float(v) for v in params0]
    base_map = desboves_map((a, b, c))
    base = find_attracting_circle(base_map, seed=seed,
                                  n_transient=n_transient, n_collect=n_collect)
    rng = stream(seed, 17)
    results = []
    for i in range(probes):
        dc = delta if probes == 1 else delta * (2 * rng.random() - 1)
        f = desboves_map((a, b, c + dc))
        entry = {"dc": float(dc), "found": False, "hausdorff": float("nan"),
                 "d_rho": float("nan")}
        try:
            seedpt = base.points[0]
            model = find_attracting_circle(f, seed_point=seedpt,
                                           n_transient=n_transient // 2,
                                           n_collect=n_collect)
            entry["found"] = True
            entry["hausdorff"] = _hausdorff(base.points, model.points)
            d = abs(model.rotation_number - base.rotation_number)
            entry["d_rho"] = min(d, 1 - d)
        except (NotACircle, Escaped, NoConvergence):
            pass
        results.append(entry)
    return {"params0": [a, b, c], "delta": delta,
            "rho0": base.rotation_number, "probes": results}


def write_rotation_csv(rows, path):
    cols = ["c", "rotation", "status", "fit_residual", "lyap", "stderr"]
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row.get(k)) for k in cols) + "\n")


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)
