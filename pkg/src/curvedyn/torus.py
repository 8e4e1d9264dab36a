"""Flat torus arithmetic and Weierstrass function evaluation.

Everything here is specialized to the hexagonal (g2 = 0) torus that
uniformizes the smooth cubic x^3 + y^3 + z^3 = 0.  The normalization is
g2 = 0, g3 = 1, for which the lattice is T * (Z + Z e^{i pi/3}) with T the
real period computed once from a Carlson symmetric integral and cached.

Evaluation strategy: reduce the argument to a minimal-norm representative
(9-candidate search after centering the lattice coordinates), then sum the
Laurent series.  Because g2 = 0 only every third coefficient is nonzero, so
the series runs in powers of t^6.  The coefficients are exact rationals from
the classical recursion and are cached once.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

from .errors import PoleAtLattice

G2 = 0
G3 = 1

# enough terms for hardware precision at the covering radius (|t/T| <= 3^-1/2,
# so term k decays like 3^-k and only k = 0 mod 3 contributes)
_KMAX_HW = 36


@lru_cache(maxsize=None)
def laurent_coeffs(kmax: int):
    """Exact Laurent coefficients c_k of wp about 0: wp = t^-2 + sum c_k t^(2k-2)."""
    c = [None, None, Fraction(G2, 20), Fraction(G3, 28)]
    for k in range(4, kmax + 1):
        s = sum(c[m] * c[k - m] for m in range(2, k - 1))
        c.append(Fraction(3, (2 * k + 1) * (k - 3)) * s)
    return tuple(c[2:])  # c_2 .. c_kmax


@lru_cache(maxsize=None)
def real_period(prec_bits: int = 53) -> "mpmath.mpf":
    """Real period T of the g2=0, g3=1 Weierstrass lattice.

    T = 2 * R_F(0, e1-e2, e1-e3) with e_j the roots of 4w^3 - 1.
    """
    with mpmath.workprec(prec_bits + 32):
        e1 = mpmath.mpf(4) ** (mpmath.mpf(-1) / 3)
        w = mpmath.exp(2j * mpmath.pi / 3)
        half = mpmath.elliprf(0, e1 - e1 * w, e1 - e1 * w**2)
        return (2 * half).real


@dataclass(frozen=True)
class Lattice:
    """Period lattice Z*omega1 + Z*omega2 with invariants (g2, g3)."""

    omega1: complex
    omega2: complex
    g2: complex = G2
    g3: complex = G3

    def __post_init__(self):
        if (self.omega2 / self.omega1).imag <= 0:
            raise ValueError("need Im(omega2/omega1) > 0")

    @property
    def min_norm(self) -> float:
        return min(abs(self.omega1), abs(self.omega2), abs(self.omega1 - self.omega2))


@lru_cache(maxsize=None)
def equianharmonic_lattice(prec_bits: int = 53) -> Lattice:
    T = float(real_period(max(prec_bits, 53)))
    return Lattice(complex(T), T * cmath.exp(1j * math.pi / 3))


@dataclass(frozen=True)
class TorusPoint:
    """Point of C/Omega in lattice coordinates u, v in [0, 1)."""

    u: float
    v: float
    lattice: Lattice

    def __post_init__(self):
        object.__setattr__(self, "u", self.u % 1.0)
        object.__setattr__(self, "v", self.v % 1.0)

    @property
    def t(self) -> complex:
        return self.u * self.lattice.omega1 + self.v * self.lattice.omega2

    def reduced_t(self) -> complex:
        return complex(reduce_min_norm(np.array([self.u]), np.array([self.v]),
                                       self.lattice)[0])

    def scaled(self, matrix) -> "TorusPoint":
        """Apply an integer matrix (action of a lattice multiplier) mod 1."""
        (a, b), (c, d) = matrix
        return TorusPoint(a * self.u + b * self.v, c * self.u + d * self.v,
                          self.lattice)


def reduce_min_norm(u: np.ndarray, v: np.ndarray, lat: Lattice) -> np.ndarray:
    """Minimal-norm representatives of u*w1 + v*w2 modulo the lattice."""
    u = u - np.round(u)
    v = v - np.round(v)
    t = u * lat.omega1 + v * lat.omega2
    best = t.copy()
    bn = np.abs(t)
    for i in (-1, 0, 1):
        for j in (-1, 0, 1):
            if i == 0 and j == 0:
                continue
            cand = t - (i * lat.omega1 + j * lat.omega2)
            better = np.abs(cand) < bn
            best = np.where(better, cand, best)
            bn = np.where(better, np.abs(cand), bn)
    return best


def wp_scaled_batch(t: np.ndarray, kmax: int = _KMAX_HW):
    """Pole-free series data: returns (A, B, C) = (t^3 wp, t^3, t^3 wp').

    Dividing A/B and C/B recovers (wp, wp'); keeping the t^3 scaling avoids
    overflow near the lattice and lets t = 0 pass through (B = 0 there).
    """
    cs = laurent_coeffs(kmax)
    t = np.asarray(t, dtype=complex)
    t2 = t * t
    A = t.copy()
    C = np.full_like(t, -2.0)
    p2k = t2 * t2  # t^(2k) starting at k = 2
    for k, ck in zip(range(2, kmax + 1), cs):
        if ck:
            cf = float(ck)
            A = A + cf * p2k * t
            C = C + (2 * k - 2) * cf * p2k
        p2k = p2k * t2
    return A, t * t2, C


def weierstrass(t, lat: Lattice, kmax: int = _KMAX_HW):
    """(wp(t), wp'(t)) for a scalar or TorusPoint argument.

    Raises PoleAtLattice for t within ~1e-12 * |w1| of a lattice point.
    """
    if isinstance(t, TorusPoint):
        tr = t.reduced_t()
    else:
        # express t in lattice coordinates, then reduce
        w1, w2 = lat.omega1, lat.omega2
        det = (w1 * w2.conjugate()).imag
        u = (complex(t) * w2.conjugate()).imag / det
        v = -(complex(t) * w1.conjugate()).imag / det
        tr = complex(reduce_min_norm(np.array([u]), np.array([v]), lat)[0])
    if abs(tr) < 1e-12 * abs(lat.omega1):
        raise PoleAtLattice(f"wp has a pole on the lattice (|t| = {abs(tr):.2e})")
    A, B, C = wp_scaled_batch(np.array([tr]), kmax)
    return complex(A[0] / B[0]), complex(C[0] / B[0])


def wp_duplication(p, pp, g2=G2, g3=G3):
    """wp(2t) from (wp(t), wp'(t)) by the duplication formula (test oracle)."""
    return -2 * p + ((6 * p * p - g2 / 2) / (2 * pp)) ** 2


def multiplier_matrix(mu: complex, tol: float = 1e-9):
    """Integer matrix of multiplication by mu on the hexagonal lattice.

    Solves mu * 1 = a + b*zeta and mu * zeta = c + d*zeta with
    zeta = e^{i pi/3}; valid iff mu * Omega lies inside Omega.
    Returns ((a, b), (c, d)) acting on lattice coordinates (u, v).
    """
    zeta = cmath.exp(1j * math.pi / 3)

    def split(x):
        b = x.imag / zeta.imag
        a = x.real - b * zeta.real
        return a, b

    a, b = split(complex(mu))      # mu * w1 = a w1 + b w2
    c, d = split(complex(mu) * zeta)  # mu * w2 = c w1 + d w2
    err = max(abs(a - round(a)), abs(b - round(b)), abs(c - round(c)),
              abs(d - round(d)))
    if err > tol:
        raise ValueError(f"{mu} does not multiply the hexagonal lattice (err={err:.1e})")
    # action on lattice coordinates: (u, v) |-> (a u + c v, b u + d v)
    return ((round(a), round(c)), (round(b), round(d)))


def _is_probable_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    # deterministic Miller-Rabin witnesses for n < 3.3e24
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def integer_torus_orbit(matrix, n: int, seed_uv, modulus_bits: int = 62):
    """Exact orbit of (u, v) |-> matrix (u, v) mod 1, as float arrays.

    The state is a pair of residues modulo a random large prime q, so the
    orbit u_j = U_j / q is the exact orbit of the exact rational starting
    point under integer arithmetic: no floating-point collapse, O(1) per
    step, and the orbit period (typically of order q) vastly exceeds any
    practical n.  Returns (U, V) float arrays of shape (n,).
    """
    U0, V0 = seed_uv
    q = (int(U0 * 2**52) ^ int(V0 * 2**51)) | (1 << modulus_bits) | 1
    while not _is_probable_prime(q):
        q += 2
    Ui = int((U0 % 1.0) * q) | 1
    Vi = int((V0 % 1.0) * q) | 1
    (a, b), (c, d) = matrix
    out_u = np.empty(n)
    out_v = np.empty(n)
    inv_q = 1.0 / q
    for i in range(n):
        out_u[i] = Ui * inv_q
        out_v[i] = Vi * inv_q
        Ui, Vi = (a * Ui + b * Vi) % q, (c * Ui + d * Vi) % q
    return out_u, out_v
