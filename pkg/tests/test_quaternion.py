import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qimag.errors import DomainError
from qimag.quaternion import (I, J, K, ONE, Quaternion, complex_unit_candidate,
                              generalized_unit, rotor_angles, unit_rotor)

finite = st.floats(min_value=-10.0, max_value=10.0,
                   allow_nan=False, allow_infinity=False)
quaternions = st.builds(Quaternion, finite, finite, finite, finite)


def symplectic_product(p: Quaternion, q: Quaternion) -> Quaternion:
    """Independent oracle: multiply through the a + b j decomposition."""
    a, b, c, d = p.a, p.b, q.a, q.b
    return Quaternion.from_symplectic(a * c - b * d.conjugate(),
                                      a * d + b * c.conjugate())


def test_hamilton_table():
    assert (I * J - K).norm() == 0.0
    assert (J * I + K).norm() == 0.0
    assert (J * K - I).norm() == 0.0
    assert (K * I - J).norm() == 0.0
    for unit in (I, J, K):
        assert (unit * unit + ONE).norm() == 0.0


@given(quaternions, quaternions, quaternions)
@settings(max_examples=300, deadline=None)
def test_associativity(a, b, c):
    lhs = (a * b) * c
    rhs = a * (b * c)
    scale = max(a.norm() * b.norm() * c.norm(), 1.0)
    assert (lhs - rhs).norm() <= 8 * np.finfo(float).eps * scale


@given(quaternions, quaternions)
@settings(max_examples=300, deadline=None)
def test_product_matches_symplectic_oracle(p, q):
    scale = max(p.norm() * q.norm(), 1.0)
    assert (p * q - symplectic_product(p, q)).norm() <= 8 * np.finfo(float).eps * scale


@given(quaternions, quaternions)
@settings(max_examples=200, deadline=None)
def test_conjugation_antihomomorphism(p, q):
    scale = max(p.norm() * q.norm(), 1.0)
    assert ((p * q).conjugate()
            - q.conjugate() * p.conjugate()).norm() <= 8 * np.finfo(float).eps * scale


def test_conjugate_values():
    assert ONE.conjugate() == ONE
    assert (I + J).conjugate() == Quaternion(0.0, -1.0, -1.0, 0.0)


@given(quaternions)
@settings(max_examples=300, deadline=None)
def test_norm_from_conjugate(q):
    prod = q * q.conjugate()
    target = Quaternion(q.norm_sq(), 0.0, 0.0, 0.0)
    assert (prod - target).norm() <= 4 * np.finfo(float).eps * max(q.norm_sq(), 1.0)


@given(quaternions)
@settings(max_examples=200, deadline=None)
def test_symplectic_roundtrip_exact(q):
    assert Quaternion.from_symplectic(q.a, q.b) == q


@given(st.complex_numbers(max_magnitude=10.0, allow_nan=False, allow_infinity=False))
@settings(max_examples=300, deadline=None)
def test_j_conjugation_rule(a):
    lhs = J * Quaternion.from_complex(a)
    rhs = Quaternion.from_complex(a.conjugate()) * J
    assert (lhs - rhs).norm() <= 4 * np.finfo(float).eps * max(abs(a), 1.0)


def test_generalized_unit_values():
    assert (generalized_unit(0.0) - J).norm() == 0.0
    assert (generalized_unit(math.pi / 2) - K).norm() <= 1e-16
    with pytest.raises(DomainError):
        generalized_unit(float("inf"))


@given(finite)
@settings(max_examples=500, deadline=None)
def test_generalized_unit_squares_to_minus_one(xi):
    eta = generalized_unit(xi)
    assert (eta * eta + ONE).norm() <= 1e-15
    assert abs(eta.norm() - 1.0) <= 1e-15


def test_complex_candidate_values():
    assert complex_unit_candidate(0.0) == 1j
    assert abs(complex_unit_candidate(math.pi / 2) + 1.0) <= 1e-15
    # direct complex multiplication oracle at a quarter angle
    eta = complex_unit_candidate(math.pi / 4)
    assert abs(eta * eta - (-1j)) <= 1e-15


@given(finite)
@settings(max_examples=300, deadline=None)
def test_complex_candidate_fails_square(theta):
    eta = complex_unit_candidate(theta)
    assert abs(eta * eta.conjugate() - 1.0) <= 1e-14
    if abs(math.sin(theta)) > 1e-3:
        assert abs(eta * eta + 1.0) > 1e-4


def test_unit_rotor_values():
    assert (unit_rotor(0.0, 0.0, 1.23) - ONE).norm() == 0.0
    assert (unit_rotor(math.pi / 2, 0.77, 0.0) - J).norm() <= 1e-16
    with pytest.raises(DomainError):
        unit_rotor(float("nan"), 0.0, 0.0)


@given(finite, finite, finite)
@settings(max_examples=300, deadline=None)
def test_unit_rotor_norm(theta, gamma, omega):
    assert abs(unit_rotor(theta, gamma, omega).norm() - 1.0) <= 4 * np.finfo(float).eps


@given(quaternions)
@settings(max_examples=300, deadline=None)
def test_rotor_angle_recovery(q):
    if q.norm() < 1e-3:
        return
    q = q * (1.0 / q.norm())
    theta, gamma, omega = rotor_angles(q)
    assert 0.0 <= theta <= math.pi / 2 + 1e-12
    assert (unit_rotor(theta, gamma, omega) - q).norm() <= 1e-12


def test_rotor_angle_tie_breaks():
    theta, gamma, omega = rotor_angles(unit_rotor(0.0, 0.9, 0.0))
    assert omega == 0.0 and abs(gamma - 0.9) <= 1e-15
    theta, gamma, omega = rotor_angles(unit_rotor(math.pi / 2, 0.0, -0.4))
    assert gamma == 0.0 and abs(omega + 0.4) <= 1e-15
