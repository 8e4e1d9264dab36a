"""Lyapunov profiles across invariant-circle families of the synthetic maps.

For the synthetic rotation family the line z2 = 0 carries the rigid rotation
X -> e^{2 pi i alpha} X, every circle |X| = rho is invariant, and the
transverse multiplier along the line is the explicit polynomial
phi(X) = r(X, 1, 0).  The profile

    Lyap(rho) = average over the circle of log |phi|

is, in the canonical parameter h = -log(rho) / 2pi, convex and piecewise
linear, with slope jumps of 2 pi per zero of phi on the circle.  The disk
variant measures slopes against log(rho) directly, where the slope equals
the number of zeros inside the disk.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .families import ring_transverse_poly
from .projective import PolyMap


@dataclass
class RingProfile:
    h: np.ndarray            # canonical parameter -log(rho)/2pi
    rho: np.ndarray
    lyap: np.ndarray
    stderr: np.ndarray
    convex: bool
    breakpoints: list        # indices of detected slope changes
    slope_jumps: list        # measured jump at each breakpoint (canonical units)
    zero_counts: list        # argument-principle zero count on each break circle


def _circle_average_log(coeffs, rho: float, n_theta: int, shifts=2):
    vals = []
    for s in range(shifts):
        th = (np.arange(n_theta) + 0.5 * s) / n_theta
        X = rho * np.exp(2j * math.pi * th)
        p = np.zeros_like(X)
        for c in reversed(coeffs):
            p = p * X + c
        vals.append(float(np.mean(np.log(np.abs(p)))))
    return float(np.mean(vals)), float(np.std(vals) / math.sqrt(len(vals)))


def zeros_on_circle(coeffs, rho: float, n_theta: int = 4096) -> int:
    """Zero count of the polynomial on |X| = rho by the argument principle."""
    th = np.linspace(0, 1, n_theta, endpoint=False)
    X = rho * np.exp(2j * math.pi * th)
    p = np.zeros_like(X)
    for c in reversed(coeffs):
        p = p * X + c
    ang = np.angle(p)
    inc = np.diff(np.concatenate([ang, ang[:1]]))
    inc = (inc + math.pi) % (2 * math.pi) - math.pi
    return int(round(inc.sum() / (2 * math.pi)))


def zeros_in_disk(coeffs, rho: float, pad: float = 1.0) -> int:
    return zeros_on_circle(coeffs, rho * pad)


def ring_profile(f: PolyMap, rho_grid, n_theta: int = 65536) -> RingProfile:
    """Measure the Lyapunov profile of the synthetic family on a rho grid.

    Grid circles are nudged off the moduli of the transverse-polynomial
    roots (relative 1e-3), so every sampled circle average is an analytic
    integral and the trig rule converges exponentially; the profile corners
    then sit cleanly between grid circles.
    """
    coeffs = ring_transverse_poly(f)
    roots = np.roots(list(reversed(coeffs))) if len(coeffs) > 1 else []
    rho = np.asarray(sorted(rho_grid, reverse=True), float)  # h increasing
    for r in np.abs(roots):
        if r == 0:
            continue
        close = np.abs(np.log(rho / r)) < 1e-3
        rho[close] = rho[close] * np.exp(np.where(rho[close] >= r, 1.5e-3, -1.5e-3))
    lyap = np.empty(len(rho))
    err = np.empty(len(rho))
    for i, r in enumerate(rho):
        lyap[i], err[i] = _circle_average_log(coeffs, float(r), n_theta)
    h = -np.log(rho) / (2 * math.pi)
    # piecewise-linear structure: slopes between nodes, convexity, jumps
    slopes = np.diff(lyap) / np.diff(h)
    d2 = np.diff(slopes)
    convex = bool(np.all(d2 >= -1e-6 * max(1.0, np.abs(slopes).max())))
    jumps = []
    brks = []
    zc = []
    thresh = 0.05 * 2 * math.pi
    floor = 1e-6
    i = 0
    while i < len(d2):
        if d2[i] > thresh:
            # one kink spreads over the cells touching it: absorb every
            # contiguous positive contribution around the big entry
            j = i
            while j + 1 < len(d2) and d2[j + 1] > floor:
                j += 1
            lo_edge = i
            while lo_edge - 1 >= 0 and d2[lo_edge - 1] > floor:
                lo_edge -= 1
            total = float(np.sum(d2[lo_edge:j + 1]))
            i = lo_edge
            mid = (i + j) // 2 + 1
            brks.append(mid)
            jumps.append(total)
            # zeros on the corner circle = winding difference across the kink
            lo = max(i, 0)
            hi = min(j + 1, len(rho) - 1)
            zc.append(zeros_on_circle(coeffs, float(rho[lo]))
                      - zeros_on_circle(coeffs, float(rho[hi])))
            i = j + 1
        else:
            i += 1
    return RingProfile(h, rho, lyap, err, convex, brks, jumps, zc)


def profile_slopes(profile: RingProfile, edge_fraction: float = 0.25):
    """Least-squares slopes of the two end segments of the profile (in h)."""
    n = len(profile.h)
    k = max(2, int(n * edge_fraction))
    lo = np.polyfit(profile.h[:k], profile.lyap[:k], 1)[0]
    hi = np.polyfit(profile.h[-k:], profile.lyap[-k:], 1)[0]
    return float(lo), float(hi)


def disk_profile_slopes(f: PolyMap, r_lo: float, r_hi: float, n: int = 24,
                        n_theta: int = 4096):
    """Slopes of Lyap against log r near both ends of [r_lo, r_hi].

    For the disk (Siegel-type) normalization the slope at radius r equals
    the number of zeros of the transverse polynomial inside |X| < r.
    """
    coeffs = ring_transverse_poly(f)
    rs = np.geomspace(r_lo, r_hi, n)
    vals = np.array([_circle_average_log(coeffs, float(r), n_theta)[0]
                     for r in rs])
    logr = np.log(rs)
    k = max(2, n // 4)
    lo = np.polyfit(logr[:k], vals[:k], 1)[0]
    hi = np.polyfit(logr[-k:], vals[-k:], 1)[0]
    return float(lo), float(hi)


def closed_form_two_term(c0: complex, c1: complex, rho: float) -> float:
    """log max(|c0| rho, |c1|): exact circle average for c0 X + c1."""
    return math.log(max(abs(c0) * rho, abs(c1)))


def ring_contraction_ratio(f: PolyMap, X: complex, u: float = 0.0) -> complex:
    """Transverse multiplier of the ring map at (X : 1 : 0) via the chart u = z2/z1."""
    coeffs = ring_transverse_poly(f)
    p = 0j
    for c in reversed(coeffs):
        p = p * X + c
    return p
