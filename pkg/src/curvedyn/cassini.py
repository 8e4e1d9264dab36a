"""Verification lab for the trapped-attractor family on the nodal quartic.

The distance gauge r(x:y:z) = |Phi_k| / (x^2 + y^2)^2 vanishes exactly on
the quartic and is infinite only at (0:0:1).  At a = 0 one step contracts r
by at least 4|k| away from (0:0:1); for small a the contraction persists on
compact sets, trapping real orbits onto the curve component through the
saddle (0:1:0).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .contexts import CTX_R
from .errors import BadParameter
from .families import cassini_map, cassini_phi
from .projective import PolyMap, batch_normalize, eval_batch_normalized
from .sampling import sphere_uniform, stream


@dataclass(frozen=True)
class CassiniConfig:
    k: float
    a: float

    def __post_init__(self):
        if self.k in (0.0, 1.0):
            raise BadParameter("k must avoid {0, 1}")

    @property
    def in_theorem_regime(self) -> bool:
        return 0 < abs(self.k) < 0.25

    def map(self) -> PolyMap:
        return cassini_map(self.a, self.k)


def _phi_vals(P: np.ndarray, k: float) -> np.ndarray:
    x, y, z = P[..., 0], P[..., 1], P[..., 2]
    x2, y2, z2 = x * x, y * y, z * z
    return x2 * y2 - (x2 + y2) * z2 + k * z2 * z2


def r_ratio_batch(P: np.ndarray, k: float) -> np.ndarray:
    """|Phi_k| / (x^2+y^2)^2 at unit representatives; inf at (0:0:1)."""
    P = batch_normalize(P)
    den = (P[..., 0] ** 2 + P[..., 1] ** 2) ** 2
    num = np.abs(_phi_vals(P, k))
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.inf)
    return out


def r_ratio(p, k: float) -> float:
    arr = p.as_array().real if hasattr(p, "as_array") else np.asarray(p, float)
    return float(r_ratio_batch(arr[None, :], k)[0])


def contraction_check(cfg: CassiniConfig, n_samples: int = 10**5,
                      exclude_radius: float = 0.15, seed: int = 9,
                      r_cap: float | None = None) -> dict:
    """Sampled sup of r(f(p)) / r(p) over the region away from (0:0:1).

    For a = 0 the sup must respect the closed-form bound 4|k|; for small
    nonzero a it should stay below 1 on the compact region (the trapping
    estimate).  Returns the sampled sup and the bound.
    """
    rng = stream(seed, 0)
    f = cfg.map()
    P = sphere_uniform(rng, n_samples)
    pole = np.array([0.0, 0.0, 1.0])
    d = np.arccos(np.minimum(1.0, np.abs(P @ pole)))
    P = P[d > exclude_radius]
    r0 = r_ratio_batch(P, cfg.k)
    if r_cap is not None:
        keep = r0 < r_cap
        P, r0 = P[keep], r0[keep]
    Q, bad = eval_batch_normalized(f, P)
    ok = ~bad & (r0 > 0)
    r1 = r_ratio_batch(Q[ok], cfg.k)
    ratio = r1 / r0[ok]
    return {"k": cfg.k, "a": cfg.a, "sup_ratio": float(np.max(ratio)),
            "bound_4k": 4 * abs(cfg.k), "samples": int(np.sum(ok))}


# ---------------------------------------------------------------------------
# real-locus geometry: sampled components of the quartic
# ---------------------------------------------------------------------------

def outer_component_points(k: float, n: int = 10000) -> np.ndarray:
    """Sampled points of the component through the node (0:1:0), unit norm.

    Chart y = 1: x^2 = z^2 (1 - k z^2) / (1 - z^2), |z| < 1, both branches;
    the nodes (0:1:0) (z = 0) and (1:0:0) (|z| -> 1) are included.  This is
    the singular "outer" circle for 0 < k < 1/4.
    """
    if not 0 < k < 1:
        raise BadParameter("component tracing implemented for 0 < k < 1")
    half = n // 2
    z = np.linspace(-1 + 1e-9, 1 - 1e-9, half)
    g = np.sqrt(z * z * (1 - k * z * z) / (1 - z * z))
    pts = [np.stack([+g, np.ones(half), z], axis=1),
           np.stack([-g, np.ones(half), z], axis=1),
           np.array([[1.0, 0.0, 0.0]])]
    return batch_normalize(np.concatenate(pts, axis=0))


def inner_component_points(k: float, n: int = 4000) -> np.ndarray:
    """Sampled points of the small oval (chart z = 1, |x| <= sqrt(k))."""
    if not 0 < k < 1:
        raise BadParameter("component tracing implemented for 0 < k < 1")
    half = n // 2
    sk = math.sqrt(k)
    x = np.linspace(-sk, sk, half)
    y = np.sqrt(np.maximum(0.0, (k - x * x) / (1 - x * x)))
    pts = [np.stack([x, +y, np.ones(half)], axis=1),
           np.stack([x, -y, np.ones(half)], axis=1)]
    return batch_normalize(np.concatenate(pts, axis=0))


def nearest_component(p: np.ndarray, outer: np.ndarray,
                      inner: np.ndarray) -> str:
    def dist(cloud):
        d1 = np.linalg.norm(cloud - p, axis=1).min()
        d2 = np.linalg.norm(cloud + p, axis=1).min()
        return min(d1, d2)

    return "outer" if dist(outer) <= dist(inner) else "inner"


def trapping_demo(cfg: CassiniConfig, n_orbits: int = 60, budget: int = 4000,
                  seed: int = 10, curve_tol: float = 1e-8) -> dict:
    """Iterate random real starts and report where they end up.

    Orbits are binned into: converged to the singular component through
    (0:1:0); captured by the superattracting point (0:0:1); captured by the
    other attracting fixed point (near (0:1:2) for k = 1/8, a = 1); undecided.
    """
    f = cfg.map()
    outer = outer_component_points(cfg.k)
    inner = inner_component_points(cfg.k)
    other_fp = _other_fixed_point(f)
    pole = np.array([0.0, 0.0, 1.0])
    counts = {"to_curve": 0, "to_origin_fp": 0, "to_other_fp": 0,
              "undecided": 0}
    for i in range(n_orbits):
        rng = stream(seed, i)
        P = sphere_uniform(rng, 1)[0]
        label = "undecided"
        for _ in range(budget):
            Q, bad = eval_batch_normalized(f, P[None, :])
            if bad[0]:
                break
            P = Q[0]
            if abs(abs(P @ pole) - 1) < 1e-12:
                label = "to_origin_fp"
                break
            if other_fp is not None and \
                    abs(abs(P @ other_fp) - 1) < 1e-12:
                label = "to_other_fp"
                break
        if label == "undecided":
            rv = r_ratio_batch(P[None, :], cfg.k)[0]
            if rv < curve_tol:
                comp = nearest_component(P, outer, inner)
                label = "to_curve" if comp == "outer" else "undecided"
        counts[label] += 1
    return {"k": cfg.k, "a": cfg.a, "orbits": counts,
            "n_orbits": n_orbits, "budget": budget}


def _other_fixed_point(f: PolyMap):
    """The non-superattracting attracting fixed point (Newton from (0:1:2))."""
    from .families import _newton_fixed_point
    from .projective import induced_tangent_matrix, normalize

    try:
        sol = _newton_fixed_point(f, normalize((0.0, 1.0, 2.0), CTX_R))
        if sol is None:
            return None
        eig = np.linalg.eigvals(induced_tangent_matrix(f, sol))
        if np.max(np.abs(eig)) < 1.0:
            return sol.as_array()
    except Exception:
        return None
    return None


def quarter_turn_residuals(cfg: CassiniConfig, n: int = 200, seed: int = 11):
    """max residuals of F(-x,-y,z) = F(x,y,z) and F^2(-y,x,z) = F^2(x,y,z)."""
    rng = stream(seed, 1)
    f = cfg.map()
    P = sphere_uniform(rng, n)
    Pm = np.stack([-P[:, 0], -P[:, 1], P[:, 2]], axis=1)
    r1 = np.abs(f.eval_batch(P) - f.eval_batch(Pm)).max()
    Pr = np.stack([-P[:, 1], P[:, 0], P[:, 2]], axis=1)
    F2 = lambda A: f.eval_batch(f.eval_batch(A))
    r2 = np.abs(F2(P) - F2(Pr)).max()
    return float(r1), float(r2)


def cassini_identity_residual(k: float, n: int = 1000, seed: int = 12) -> float:
    """Relative residual of Phi(F_0(p)) = 16 k x^2 y^2 (x^2-y^2)^4 Phi(p)."""
    rng = stream(seed, 2)
    f0 = cassini_map(0.0, k)
    P = rng.normal(size=(n, 3))
    lhs = _phi_vals(f0.eval_batch(P), k)
    x, y = P[:, 0], P[:, 1]
    rhs = 16 * k * x**2 * y**2 * (x**2 - y**2) ** 4 * _phi_vals(P, k)
    scale = np.maximum(1.0, np.abs(lhs))
    return float(np.max(np.abs(lhs - rhs) / scale))


def write_report(report: dict, path: str):
    with open(path, "w") as fh:
        json.dump(report, fh, sort_keys=True, indent=1)
