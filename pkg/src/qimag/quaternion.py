"""Real quaternion algebra with the conventions used by the dynamics modules.

Convention: right-handed Hamilton table, i*j = k, j*i = -k (and cyclic).
Every quaternion can be written q = a + b*j with complex a = w + x*i and
b = y + z*i; in that split j*a = conj(a)*j, which is the non-commutation
rule the evolution identities rely on.  Quaternions are immutable values,
so they are safe to share across threads.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import DomainError

__all__ = [
    "Quaternion",
    "ONE",
    "I",
    "J",
    "K",
    "generalized_unit",
    "complex_unit_candidate",
    "unit_rotor",
    "rotor_angles",
]


@dataclass(frozen=True)
class Quaternion:
    """Immutable quaternion w + x*i + y*j + z*k."""

    w: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    @classmethod
    def from_symplectic(cls, a: complex, b: complex) -> "Quaternion":
        """Build q = a + b*j from the two complex components."""
        a = complex(a)
        b = complex(b)
        return cls(a.real, a.imag, b.real, b.imag)

    @classmethod
    def from_complex(cls, a: complex) -> "Quaternion":
        return cls.from_symplectic(a, 0.0)

    @property
    def a(self) -> complex:
        """Complex component multiplying 1 in the q = a + b*j split."""
        return complex(self.w, self.x)

    @property
    def b(self) -> complex:
        """Complex component multiplying j in the q = a + b*j split."""
        return complex(self.y, self.z)

    def __add__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self.w + other.w, self.x + other.x,
                          self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Quaternion") -> "Quaternion":
        return Quaternion(self.w - other.w, self.x - other.x,
                          self.y - other.y, self.z - other.z)

    def __neg__(self) -> "Quaternion":
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __mul__(self, other):
        """Hamilton product, or scaling by a real number."""
        if isinstance(other, Quaternion):
            w1, x1, y1, z1 = self.w, self.x, self.y, self.z
            w2, x2, y2, z2 = other.w, other.x, other.y, other.z
            return Quaternion(
                w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
                w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
                w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
                w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
            )
        if isinstance(other, (int, float)):
            return Quaternion(self.w * other, self.x * other,
                              self.y * other, self.z * other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return self * other
        return NotImplemented

    def conjugate(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm_sq(self) -> float:
        return self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z

    def norm(self) -> float:
        return math.sqrt(self.norm_sq())

    def scalar_part(self) -> float:
        return self.w

    def components(self):
        return (self.w, self.x, self.y, self.z)

    def isclose(self, other: "Quaternion", tol: float = 1e-12) -> bool:
        return (self - other).norm() <= tol


ONE = Quaternion(1.0, 0.0, 0.0, 0.0)
I = Quaternion(0.0, 1.0, 0.0, 0.0)
J = Quaternion(0.0, 0.0, 1.0, 0.0)
K = Quaternion(0.0, 0.0, 0.0, 1.0)


def _require_finite(name, *values):
    for v in values:
        if not math.isfinite(v):
            raise DomainError(f"{name} requires finite angles, got {v!r}")


def generalized_unit(xi: float) -> Quaternion:
    """Unit quaternion exp(i*xi)*j = cos(xi)*j + sin(xi)*k.

    Squares to -1 for every real phase xi, which is what qualifies it as a
    replacement imaginary unit; compare complex_unit_candidate.
    """
    _require_finite("generalized_unit", xi)
    return Quaternion(0.0, 0.0, math.cos(xi), math.sin(xi))


def complex_unit_candidate(theta: float) -> complex:
    """The complex candidate exp(i*theta)*i.

    Satisfies eta*conj(eta) = 1 but eta**2 = -exp(2i*theta), so it fails
    eta**2 = -1 unless theta is a multiple of pi.  Returned as a plain
    complex number; it never leaves the complex plane.
    """
    _require_finite("complex_unit_candidate", theta)
    return cmath.exp(1j * theta) * 1j


def unit_rotor(theta: float, gamma: float, omega: float) -> Quaternion:
    """Unit quaternion cos(theta)*e^{i*gamma} + sin(theta)*e^{i*omega}*j.

    This is the evolution factor carried on the right of quaternionic wave
    functions; it has unit norm for any real angles.
    """
    _require_finite("unit_rotor", theta, gamma, omega)
    ct, st = math.cos(theta), math.sin(theta)
    return Quaternion(ct * math.cos(gamma), ct * math.sin(gamma),
                      st * math.cos(omega), st * math.sin(omega))


def rotor_angles(q: Quaternion) -> tuple:
    """Recover (theta, gamma, omega) with unit_rotor(...) == q for unit q.

    Branch: theta in [0, pi/2].  At theta == 0 the j-part vanishes and
    omega is set to 0; at theta == pi/2 the complex part vanishes and
    gamma is set to 0.
    """
    a, b = q.a, q.b
    theta = math.atan2(abs(b), abs(a))
    gamma = cmath.phase(a) if abs(a) > 0.0 else 0.0
    omega = cmath.phase(b) if abs(b) > 0.0 else 0.0
    return theta, gamma, omega
