import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from curvedyn.errors import PoleAtLattice
from curvedyn.torus import (TorusPoint, equianharmonic_lattice,
                            integer_torus_orbit, laurent_coeffs,
                            multiplier_matrix, real_period, reduce_min_norm,
                            weierstrass, wp_duplication, wp_scaled_batch)


def test_laurent_coefficients_exact():
    cs = laurent_coeffs(12)
    assert cs[0] == 0                      # c_2 = g2/20
    assert cs[1] == Fraction(1, 28)        # c_3 = g3/28
    assert cs[4] == Fraction(1, 28) ** 2 * Fraction(3, 13 * 3)  # c_6 = c_3^2/13
    # only every third coefficient nonzero on the hexagonal lattice
    assert cs[2] == 0 and cs[3] == 0 and cs[5] == 0


def test_real_period_against_quadrature():
    T = real_period(80)
    with mpmath.workprec(120):
        e1 = mpmath.mpf(4) ** (mpmath.mpf(-1) / 3)
        val = mpmath.quad(lambda x: 1 / mpmath.sqrt(4 * x**3 - 1),
                          [e1, mpmath.inf])
        assert abs(2 * val - T) < mpmath.mpf(10) ** -20


def test_wp_differential_equation(rng):
    lat = equianharmonic_lattice()
    for _ in range(100):
        t = TorusPoint(rng.random(), rng.random(), lat)
        if abs(t.reduced_t()) < 0.05:
            continue
        p, pp = weierstrass(t, lat)
        resid = abs(pp**2 - (4 * p**3 - 1)) / max(1.0, abs(pp) ** 2)
        assert resid < 1e-10


def test_wp_even_and_periodic(rng):
    lat = equianharmonic_lattice()
    t = TorusPoint(0.23, 0.37, lat)
    mt = TorusPoint(-0.23, -0.37, lat)
    p1, _ = weierstrass(t, lat)
    p2, _ = weierstrass(mt, lat)
    assert abs(p1 - p2) < 1e-12
    shifted = TorusPoint(0.23 + 1.0, 0.37, lat)
    p3, _ = weierstrass(shifted, lat)
    assert abs(p1 - p3) < 1e-12


def test_wp_duplication_formula():
    lat = equianharmonic_lattice()
    t = TorusPoint(0.11, 0.07, lat)
    t2 = TorusPoint(0.22, 0.14, lat)
    p, pp = weierstrass(t, lat)
    p2, _ = weierstrass(t2, lat)
    assert abs(p2 - wp_duplication(p, pp)) < 1e-9


def test_wp_pole_at_lattice():
    lat = equianharmonic_lattice()
    with pytest.raises(PoleAtLattice):
        weierstrass(TorusPoint(0.0, 0.0, lat), lat)


def test_reduction_idempotent_and_bounded(rng):
    lat = equianharmonic_lattice()
    u, v = rng.random(1000), rng.random(1000)
    t = reduce_min_norm(u, v, lat)
    # covering radius of the hexagonal lattice
    assert np.max(np.abs(t)) <= abs(lat.omega1) / math.sqrt(3) + 1e-12
    tp = TorusPoint(0.7, 0.9, lat)
    assert tp.u == pytest.approx(0.7) and tp.v == pytest.approx(0.9)


def test_multiplier_matrices():
    m2 = multiplier_matrix(-2)
    assert m2 == ((-2, 0), (0, -2))
    mu = (-0.5 + 1j * math.sqrt(3) / 2) * 1j * math.sqrt(3)  # gamma * i sqrt3
    m = multiplier_matrix(mu)
    det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
    assert det == 3
    with pytest.raises(ValueError):
        multiplier_matrix(1.5)


def test_multiplier_matrix_action_matches_complex_multiplication(rng):
    lat = equianharmonic_lattice()
    mu = (-0.5 + 1j * math.sqrt(3) / 2) * 1j * math.sqrt(3)
    m = multiplier_matrix(mu)
    for _ in range(20):
        tp = TorusPoint(rng.random(), rng.random(), lat)
        direct = mu * tp.t
        via = tp.scaled(m).t
        # equality modulo the lattice
        diff = direct - via
        w1, w2 = lat.omega1, lat.omega2
        det = (w1 * np.conj(w2)).imag
        a = (diff * np.conj(w2)).imag / det
        b = -(diff * np.conj(w1)).imag / det
        assert abs(a - round(a)) < 1e-9 and abs(b - round(b)) < 1e-9


def test_integer_orbit_matches_exact_rationals():
    m = ((-2, 0), (0, -2))
    u, v = integer_torus_orbit(m, 40, (0.3123, 0.7717))
    # reproduce with exact rational arithmetic from the same starting residues
    q_bits = 62
    q = (int(0.3123 * 2**52) ^ int(0.7717 * 2**51)) | (1 << q_bits) | 1
    while True:
        from curvedyn.torus import _is_probable_prime
        if _is_probable_prime(q):
            break
        q += 2
    U = int(0.3123 * q) | 1
    V = int(0.7717 * q) | 1
    for i in range(40):
        assert abs(u[i] - U / q) < 1e-15
        assert abs(v[i] - V / q) < 1e-15
        U, V = (-2 * U) % q, (-2 * V) % q


def test_integer_orbit_no_collapse():
    # floating doubling collapses to 0 after ~53 iterates; the exact orbit
    # must keep moving
    m = ((-2, 0), (0, -2))
    u, _ = integer_torus_orbit(m, 500, (0.5, 0.25))
    assert np.min(np.abs(u[200:] - 0.5)) > 1e-6 or np.std(u[200:]) > 0.1
