"""Orbit classification, basin statistics, orbit traces, basin rendering."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .contexts import ScalarContext, CTX_R, CTX_C
from .errors import Indeterminate, IoError
from .projective import (PolyMap, ProjPoint, batch_normalize,
                         eval_batch_normalized, induced_tangent_matrix,
                         normalize)
from .sampling import fs_uniform, sphere_uniform, stream, wilson_interval

LINE_LABELS = ("line_x0", "line_y0", "line_z0")


@dataclass(frozen=True)
class Thresholds:
    """Convergence thresholds for orbit classification."""

    residual: float = 1e-12        # |Phi| at unit norm for the curve label
    line_tol: float = 1e-12        # coordinate magnitude for line labels
    point_tol: float = 1e-10       # fs distance for point labels
    window: int = 100              # consecutive confirmations required
    escalate_at: float = 1e-8      # |Phi| below which iteration goes high-prec
    escalate_bits: int = 128
    circle_tail: int = 2000        # tail length for the circle test
    circle_planarity: float = 0.15  # sigma3/sigma1 prefilter for the tail
    circle_fit_tol: float = 0.02   # trig-fit residual / diameter


@dataclass
class OrbitTrace:
    """Per-iterate series (|x|^2, |y|^2, |z|^2, |Phi|) at unit representatives."""

    iters: np.ndarray
    x2: np.ndarray
    y2: np.ndarray
    z2: np.ndarray
    absphi: np.ndarray
    terminated: str | None = None   # "indeterminate" marker

    def write_csv(self, path):
        with open(path, "w") as fh:
            fh.write("iter,x2,y2,z2,absphi\n")
            for row in zip(self.iters, self.x2, self.y2, self.z2, self.absphi):
                fh.write(f"{int(row[0])},{row[1]:.12g},{row[2]:.12g},"
                         f"{row[3]:.12g},{row[4]:.12g}\n")


@dataclass
class BasinReport:
    counts: dict
    n: int
    seed: int
    budget: int
    thresholds: Thresholds
    family: str = ""
    params: tuple = ()

    @property
    def fractions(self) -> dict:
        return {k: v / self.n for k, v in self.counts.items()}

    def wilson(self) -> dict:
        return {k: wilson_interval(v, self.n) for k, v in self.counts.items()}

    def to_json(self) -> str:
        return json.dumps({
            "family": self.family,
            "params": [_num(p) for p in self.params],
            "seed": self.seed, "n": self.n, "budget": self.budget,
            "labels": dict(sorted(self.counts.items())),
            "ci": {k: list(v) for k, v in sorted(self.wilson().items())},
        }, sort_keys=True)


def _num(p):
    p = complex(p)
    return [p.real, p.imag] if p.imag else p.real


def attracting_points_catalog(f: PolyMap, ctx: ScalarContext):
    """Attracting fixed points to classify against (|eigenvalues| < 1).

    Coordinate points are always checked; for Desboves maps the closed-form
    fixed-point catalogue supplies candidates.
    """
    cands = []
    for trip in ((1, 0, 0), (0, 1, 0), (0, 0, 1)):
        cands.append(normalize(trip, ctx))
    if f.family in ("desboves", "classical_desboves"):
        from .families import fermat_fixed_points
        try:
            for rep in fermat_fixed_points(f.params, ctx, newton_seeds=300):
                if not rep.on_fermat and rep.label == "interior":
                    cands.append(rep.point)
        except Exception:
            pass
    out = []
    for p in cands:
        try:
            q, bad = eval_batch_normalized(f, p.as_array()[None, :])
            if bad[0]:
                continue
            if abs(np.vdot(q[0], p.as_array())) < 1.0 - 1e-8:
                continue  # not fixed
            eig = np.linalg.eigvals(induced_tangent_matrix(f, p))
            if np.max(np.abs(eig)) < 0.999:
                out.append(p)
        except Exception:
            continue
    return out


def classify_orbit(f: PolyMap, p0: ProjPoint, budget: int = 50000,
                   thresholds: Thresholds = Thresholds(),
                   attractors=None, detect_circles: bool = True):
    """Assign a basin label to one orbit within the iteration budget.

    Returns (label, diagnostics).  Labels: fermat_curve, line_x0/y0/z0,
    point:<k> (index into the attractor catalogue), circle_pair, undecided.
    Iteration escalates to high precision while |Phi| < escalate_at so that
    transient curve-hugging is not misread as convergence.
    """
    th = thresholds
    ctx = p0.context
    if attractors is None:
        attractors = attracting_points_catalog(f, ctx)
    att = [a.as_array() for a in attractors]
    P = p0.as_array()
    hp_ctx = ScalarContext(ctx.field, th.escalate_bits)
    hp_point = None  # high-precision shadow while near the curve
    counters = {"curve": 0, "x": 0, "y": 0, "z": 0}
    pt_counters = [0] * len(att)
    first_hit = None
    near_variety = 0
    tail = []
    diag = {"escalations": 0}
    for it in range(budget):
        absphi = abs(np.sum(P**3))
        ax, ay, az = np.abs(P)
        if min(ax, ay, az, absphi ** (1.0 / 3.0)) < 1e-3:
            near_variety += 1
        counters["curve"] = counters["curve"] + 1 if absphi < th.residual else 0
        counters["x"] = counters["x"] + 1 if ax < th.line_tol else 0
        counters["y"] = counters["y"] + 1 if ay < th.line_tol else 0
        counters["z"] = counters["z"] + 1 if az < th.line_tol else 0
        for k, a in enumerate(att):
            d = math.acos(min(1.0, abs(np.vdot(a, P))))
            pt_counters[k] = pt_counters[k] + 1 if d < th.point_tol else 0
            if pt_counters[k] >= th.window:
                diag.update(first_hit=max(it - th.window + 1, 0), near_variety=near_variety)
                return f"point:{k}", diag
        if counters["curve"] >= th.window:
            diag.update(first_hit=max(it - th.window + 1, 0), near_variety=near_variety)
            return "fermat_curve", diag
        for key, lbl in zip(("x", "y", "z"), LINE_LABELS):
            if counters[key] >= th.window:
                diag.update(first_hit=max(it - th.window + 1, 0), near_variety=near_variety)
                return lbl, diag
        if detect_circles and it >= budget - th.circle_tail:
            tail.append(P.copy())
        # iterate (escalating precision near the curve)
        if absphi < th.escalate_at and th.escalate_bits > 53:
            if hp_point is None:
                hp_point = normalize(tuple(P), hp_ctx)
                diag["escalations"] += 1
            with hp_ctx.active():
                F = f.eval_lift(hp_point)
                n = hp_ctx.sqrt(sum(hp_ctx.abs2(v) for v in F))
                if float(n) < f.eps_indet():
                    diag["terminated"] = "indeterminate"
                    return "undecided", diag
                hp_point = ProjPoint(tuple(v / n for v in F), hp_ctx)
                P = hp_point.as_array()
        else:
            hp_point = None
            Q, bad = eval_batch_normalized(f, P[None, :])
            if bad[0]:
                diag["terminated"] = "indeterminate"
                return "undecided", diag
            P = Q[0]
    diag.update(first_hit=None, near_variety=near_variety)
    if detect_circles and len(tail) >= 200:
        if _tail_is_circle_pair(np.array(tail), th):
            return "circle_pair", diag
    return "undecided", diag


def _coherent_signs(pts: np.ndarray) -> np.ndarray:
    out = pts.copy()
    for i in range(1, len(out)):
        if np.real(np.vdot(out[i - 1], out[i])) < 0:
            out[i] = -out[i]
    return out


def _closed_curve_residual(cloud: np.ndarray) -> float:
    """Relative residual of a low-order Fourier fit along the tail's angles."""
    ctr = cloud.mean(axis=0)
    E = cloud - ctr
    _, S, Vt = np.linalg.svd(E, full_matrices=False)
    if S[0] == 0:
        return 0.0
    xy = E @ Vt[:2].T
    theta = np.arctan2(xy[:, 1], xy[:, 0])
    H = 8
    cols = [np.ones_like(theta)]
    for h in range(1, H + 1):
        cols += [np.cos(h * theta), np.sin(h * theta)]
    A = np.stack(cols, axis=1)
    fit, *_ = np.linalg.lstsq(A, cloud, rcond=None)
    resid = np.linalg.norm(cloud - A @ fit, axis=1)
    diam = 2 * np.linalg.norm(E, axis=1).max()
    return float(resid.max() / max(diam, 1e-300))


def _tail_is_circle_pair(tail: np.ndarray, th: Thresholds) -> bool:
    for cloud in (tail[0::2], tail[1::2]):
        cloud = _coherent_signs(cloud)
        E = cloud - cloud.mean(axis=0)
        S = np.linalg.svd(E, compute_uv=False)
        if S[0] < 1e-8:      # collapsed to a point
            return False
        if S[2] / S[0] > th.circle_planarity:
            return False
        if _closed_curve_residual(cloud) > th.circle_fit_tol:
            return False
        # non-convergence: consecutive points keep a definite separation
        step = np.linalg.norm(np.diff(cloud, axis=0), axis=1)
        if step[-50:].mean() < 1e-8:
            return False
    return True


def basin_fractions(f: PolyMap, n_samples: int = 1000, budget: int = 50000,
                    seed: int = 7, ctx: ScalarContext = CTX_R,
                    thresholds: Thresholds = Thresholds(),
                    detect_circles: bool = True) -> BasinReport:
    """Monte Carlo basin measure over the uniform (real) or FS (complex) measure."""
    attractors = attracting_points_catalog(f, ctx)
    counts: dict = {}
    for i in range(n_samples):
        rng = stream(seed, i)
        if ctx.is_complex:
            P0 = fs_uniform(rng, 1)[0]
        else:
            P0 = sphere_uniform(rng, 1)[0]
        label, _ = classify_orbit(f, normalize(tuple(P0), ctx), budget,
                                  thresholds, attractors, detect_circles)
        counts[label] = counts.get(label, 0) + 1
    return BasinReport(counts, n_samples, seed, budget, thresholds,
                       f.family, f.params)


def orbit_trace(f: PolyMap, p0: ProjPoint, n: int,
                thresholds: Thresholds = Thresholds()) -> OrbitTrace:
    """Record (|x|^2, |y|^2, |z|^2, |Phi|) for n iterates (unit-norm reps).

    Near-curve iterates run at escalated precision, mirroring classify_orbit.
    """
    th = thresholds
    ctx = p0.context
    hp_ctx = ScalarContext(ctx.field, th.escalate_bits)
    hp_point = None
    P = p0.as_array()
    rows = np.empty((n, 4))
    terminated = None
    count = 0
    for it in range(n):
        absphi = abs(np.sum(P**3))
        rows[it] = (abs(P[0]) ** 2, abs(P[1]) ** 2, abs(P[2]) ** 2, absphi)
        count = it + 1
        if absphi < th.escalate_at and th.escalate_bits > 53:
            if hp_point is None:
                hp_point = normalize(tuple(P), hp_ctx)
            with hp_ctx.active():
                F = f.eval_lift(hp_point)
                nn = hp_ctx.sqrt(sum(hp_ctx.abs2(v) for v in F))
                if float(nn) < f.eps_indet():
                    terminated = "indeterminate"
                    break
                hp_point = ProjPoint(tuple(v / nn for v in F), hp_ctx)
                P = hp_point.as_array()
        else:
            hp_point = None
            Q, bad = eval_batch_normalized(f, P[None, :])
            if bad[0]:
                terminated = "indeterminate"
                break
            P = Q[0]
    idx = np.arange(count)
    return OrbitTrace(idx, rows[:count, 0], rows[:count, 1], rows[:count, 2],
                      rows[:count, 3], terminated)


def near_variety_fraction(f: PolyMap, p0: ProjPoint, n: int,
                          epsilon: float = 1e-3) -> float:
    """Fraction of iterates with min(|x|,|y|,|z|,|Phi|^(1/3)) < epsilon."""
    tr = orbit_trace(f, p0, n)
    m = np.minimum.reduce([np.sqrt(tr.x2), np.sqrt(tr.y2), np.sqrt(tr.z2),
                           tr.absphi ** (1.0 / 3.0)])
    return float(np.mean(m < epsilon))


# ---------------------------------------------------------------------------
# rendering (orthographic hemisphere, PPM output)
# ---------------------------------------------------------------------------

PALETTE = {
    "fermat_curve": (220, 40, 40),
    "line_x0": (240, 160, 40),
    "line_y0": (40, 70, 220),
    "line_z0": (40, 180, 180),
    "point": (120, 120, 120),
    "circle_pair": (235, 235, 235),
    "undecided": (0, 0, 0),
}


@dataclass(frozen=True)
class BasinView:
    rotation: tuple = ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    resolution: int = 96
    budget: int = 2000
    window: int = 50
    seed: int = 0


def render_basin(f: PolyMap, view: BasinView, out_path: str) -> dict:
    """Classify the visible hemisphere pixel grid and write a binary PPM.

    Colors encode the basin label; intensity encodes log of the first
    iterate at which the convergence criterion locked in (fast = bright).
    Runs the vectorized hardware-precision classifier (renders are
    smoke-level diagnostics, not measurements).
    """
    n = view.resolution
    ii = (np.arange(n) + 0.5) / n * 2 - 1
    X, Y = np.meshgrid(ii, -ii)  # image rows top-down
    R2 = X**2 + Y**2
    inside = R2 <= 1.0
    Z = np.sqrt(np.where(inside, 1 - R2, 0.0))
    P = np.stack([X, Y, Z], axis=-1).reshape(-1, 3)
    rot = np.asarray(view.rotation, dtype=float)
    P = P @ rot.T
    # antipodal canonicalization: flip to the representative with positive
    # last nonzero coordinate so +-p classify identically, bit for bit
    sign = np.where(P[:, 2] != 0, np.sign(P[:, 2]),
                    np.where(P[:, 1] != 0, np.sign(P[:, 1]), np.sign(P[:, 0])))
    P = P * sign[:, None]
    labels, first = _classify_grid(f, P, view.budget, view.window)
    labels[~inside.reshape(-1)] = -1
    img = np.zeros((n * n, 3), dtype=np.uint8)
    keys = ["fermat_curve", "line_x0", "line_y0", "line_z0", "point",
            "circle_pair", "undecided"]
    speed = np.clip(1.0 - np.log1p(first) / math.log1p(view.budget), 0.25, 1.0)
    for code, key in enumerate(keys):
        m = labels == code
        if not np.any(m):
            continue
        base = np.array(PALETTE[key], dtype=float)
        img[m] = np.clip(base[None, :] * speed[m, None], 0, 255).astype(np.uint8)
    img = img.reshape(n, n, 3)
    counts = {key: int(np.sum(labels == code)) for code, key in enumerate(keys)}
    try:
        with open(out_path, "wb") as fh:
            fh.write(f"P6\n{n} {n}\n255\n".encode())
            fh.write(img.tobytes())
    except OSError as exc:
        raise IoError(str(exc)) from exc
    return counts


def _classify_grid(f: PolyMap, P0: np.ndarray, budget: int, window: int):
    """Vectorized batch classifier for rendering (hardware precision)."""
    n = len(P0)
    P = P0.astype(float).copy()
    labels = np.full(n, 6, dtype=int)  # undecided
    first = np.full(n, float(budget))
    active = np.ones(n, dtype=bool)
    cc = np.zeros((5, n), dtype=np.int32)  # curve, x, y, z, point
    attractors = attracting_points_catalog(f, CTX_R)
    att = np.array([a.as_array() for a in attractors]) if attractors else None
    for it in range(budget):
        if not np.any(active):
            break
        A = P[active]
        absphi = np.abs(np.sum(A**3, axis=1))
        ax = np.abs(A)
        hits = [absphi < 1e-10, ax[:, 0] < 1e-10, ax[:, 1] < 1e-10,
                ax[:, 2] < 1e-10]
        if att is not None:
            dots = np.abs(A @ att.T.conj())
            hits.append(np.max(dots, axis=1) > 1.0 - 1e-9)
        else:
            hits.append(np.zeros(len(A), dtype=bool))
        idx = np.where(active)[0]
        for code, h in enumerate(hits):
            cc[code, idx] = np.where(h, cc[code, idx] + 1, 0)
            done = idx[cc[code, idx] >= window]
            if len(done):
                labels[done] = code
                first[done] = np.maximum(it - window + 1, 0)
                active[done] = False
        idx = np.where(active)[0]
        if len(idx) == 0:
            break
        Q, bad = eval_batch_normalized(f, P[idx])
        P[idx] = np.where(bad[:, None], P[idx], Q)
        if np.any(bad):
            stuck = idx[bad]
            labels[stuck] = 6
            active[stuck] = False
    return labels, first
