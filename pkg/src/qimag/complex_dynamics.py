"""Schrodinger dynamics under the complex phase deformation i -> e^{i theta} i.

The evolution law is hbar * psi_t * e^{i theta} * i = H psi, which
rearranges uniquely to psi_t = -(i/hbar) e^{-i theta} (H psi) because
(e^{i theta} i)^{-1} = -i e^{-i theta}.  Alongside the stepper this module
carries the phase-transformation bookkeeping, both continuity budgets with
all their source terms, the (failed) phase-deformed momentum operator, and
the separable solution families.

Continuity budgets default to the analytic time derivative
psi_t = -(i/hbar) e^{-i theta} (H psi) so residuals isolate spatial
discretisation; pass an explicit psi_t to probe evolved data instead.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, PreconditionError, StabilityError
from .grid import ComplexField, Grid1D, grad, laplace, integrate
from .reports import ContinuityReport, budget

__all__ = [
    "DeformedSetup",
    "apply_hamiltonian",
    "stability_bound",
    "step_deformed",
    "evolution_rhs",
    "GaugeResult",
    "gauge_transform",
    "continuity_deformed",
    "continuity_weighted",
    "separable_solution",
    "FixedAngle",
    "RampAngle",
    "LogAngle",
    "time_factor",
    "time_factor_rates",
    "log_angle_coefficient",
    "log_angle_alt_coefficient",
    "separable_residual",
    "deformed_momentum",
    "deformed_momentum_square",
    "CommutatorComparison",
    "position_commutator",
    "expected_decay_rate",
    "log_norm_rate",
]


@dataclass(frozen=True)
class DeformedSetup:
    """Phase angle theta(x, t) with analytic derivatives, plus V, hbar, m.

    theta(x, t) = theta0 + slope * x + rate * t covers every built-in
    scenario; arbitrary angles enter through the *_fn overrides, each
    mapping (x array, t) -> array.
    """

    grid: Grid1D
    V: ComplexField
    hbar: float = 1.0
    m: float = 1.0
    theta0: float = 0.0
    slope: float = 0.0
    rate: float = 0.0
    theta_fn: Optional[Callable] = None
    theta_t_fn: Optional[Callable] = None
    theta_x_fn: Optional[Callable] = None

    def __post_init__(self):
        if not (self.hbar > 0 and self.m > 0):
            raise DomainError("hbar and m must be positive")
        if self.V.grid != self.grid:
            raise PreconditionError("potential lives on a different grid")

    def theta(self, t: float) -> np.ndarray:
        if self.theta_fn is not None:
            return np.asarray(self.theta_fn(self.grid.x, t), dtype=float)
        return self.theta0 + self.slope * self.grid.x + self.rate * t

    def theta_t(self, t: float) -> np.ndarray:
        if self.theta_t_fn is not None:
            return np.asarray(self.theta_t_fn(self.grid.x, t), dtype=float)
        return np.full(self.grid.n, self.rate)

    def theta_x(self, t: float) -> np.ndarray:
        if self.theta_x_fn is not None:
            return np.asarray(self.theta_x_fn(self.grid.x, t), dtype=float)
        return np.full(self.grid.n, self.slope)


def apply_hamiltonian(psi: ComplexField, V: ComplexField,
                      hbar: float = 1.0, m: float = 1.0) -> ComplexField:
    """-(hbar^2 / 2m) laplace(psi) + V psi."""
    if psi.grid != V.grid:
        raise PreconditionError("wave function and potential on different grids")
    kinetic = laplace(psi).values * (-hbar**2 / (2.0 * m))
    return ComplexField(psi.grid, kinetic + V.values * psi.values)


def evolution_rhs(psi: ComplexField, setup: DeformedSetup, t: float) -> ComplexField:
    """psi_t = -(i/hbar) e^{-i theta(x,t)} (H psi)."""
    h_psi = apply_hamiltonian(psi, setup.V, setup.hbar, setup.m)
    phase = np.exp(-1j * setup.theta(t))
    return ComplexField(psi.grid, (-1j / setup.hbar) * phase * h_psi.values)


def stability_bound(grid: Grid1D, hbar: float, m: float) -> float:
    """Largest admissible explicit step for the fourth-order integrator."""
    return 0.5 * (2.0 * m / hbar) * grid.dx**2 / 2.0


def step_deformed(psi: ComplexField, setup: DeformedSetup, t: float,
                  dt: float) -> ComplexField:
    """One classical fourth-order step of the deformed evolution."""
    if dt > stability_bound(psi.grid, setup.hbar, setup.m):
        raise StabilityError(
            f"dt = {dt} exceeds the stability bound "
            f"{stability_bound(psi.grid, setup.hbar, setup.m)}")
    k1 = evolution_rhs(psi, setup, t).values
    k2 = evolution_rhs(ComplexField(psi.grid, psi.values + 0.5 * dt * k1),
                       setup, t + 0.5 * dt).values
    k3 = evolution_rhs(ComplexField(psi.grid, psi.values + 0.5 * dt * k2),
                       setup, t + 0.5 * dt).values
    k4 = evolution_rhs(ComplexField(psi.grid, psi.values + dt * k3),
                       setup, t + dt).values
    return ComplexField(psi.grid, psi.values + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4))


@dataclass(frozen=True)
class GaugeResult:
    """Output of the phase transformation phi = e^{i theta} psi."""

    phi: ComplexField
    vector_potential: np.ndarray       # grad(theta)
    effective_potential: np.ndarray    # V - hbar e^{i theta} theta_t
    residual_deformed: np.ndarray      # deformed equation evaluated on psi
    residual_transformed: np.ndarray   # transformed equation evaluated on phi
    parity_gap: float                  # max |r_transformed - e^{i theta} r_deformed|


def gauge_transform(psi: ComplexField, setup: DeformedSetup, t: float,
                    psi_t: Optional[ComplexField] = None,
                    psi_dx: Optional[np.ndarray] = None,
                    psi_dxx: Optional[np.ndarray] = None) -> GaugeResult:
    """Transform to phi = e^{i theta} psi and audit that nothing was absorbed.

    The transformed equation carries the induced vector potential
    grad(theta) and effective potential V - hbar e^{i theta} theta_t; it is
    satisfied exactly as well (or as badly) as the original, which is the
    point: the phase cannot be gauged away into a stationary state.  With
    analytic psi_dx/psi_dxx supplied the parity gap drops to rounding;
    with grid derivatives it is bounded by the truncation error.
    """
    theta = setup.theta(t)
    theta_t = setup.theta_t(t)
    theta_x = setup.theta_x(t)
    hbar, m = setup.hbar, setup.m
    phase = np.exp(1j * theta)
    psi_v = psi.values
    if psi_t is None:
        psi_t = evolution_rhs(psi, setup, t)
    psi_t_v = psi_t.values

    if psi_dx is None:
        psi_dx = grad(psi).values
        psi_dxx = laplace(psi).values
        analytic = False
    else:
        psi_dx = np.asarray(psi_dx, dtype=complex)
        if psi_dxx is None:
            raise PreconditionError("psi_dxx must accompany psi_dx")
        psi_dxx = np.asarray(psi_dxx, dtype=complex)
        analytic = True

    phi_v = phase * psi_v
    phi = ComplexField(psi.grid, phi_v)
    phi_t = phase * (psi_t_v + 1j * theta_t * psi_v)

    h_psi = -(hbar**2 / (2 * m)) * psi_dxx + setup.V.values * psi_v
    residual_deformed = hbar * psi_t_v * phase * 1j - h_psi

    # momentum under the induced vector potential: pi phi = (p - hbar A) phi
    if analytic:
        phi_dx = phase * (psi_dx + 1j * theta_x * psi_v)
        pi_phi = -1j * hbar * phi_dx - hbar * theta_x * phi_v
        # d/dx of pi phi, using pi phi = e^{i theta} p psi
        p_psi = -1j * hbar * psi_dx
        p_psi_dx = -1j * hbar * psi_dxx
        pi_phi_dx = phase * (1j * theta_x * p_psi + p_psi_dx)
        pi2_phi = -1j * hbar * pi_phi_dx - hbar * theta_x * pi_phi
    else:
        phi_dx = grad(phi).values
        pi_phi = -1j * hbar * phi_dx - hbar * theta_x * phi_v
        pi_phi_dx = grad(ComplexField(psi.grid, pi_phi)).values
        pi2_phi = -1j * hbar * pi_phi_dx - hbar * theta_x * pi_phi

    effective_potential = setup.V.values - hbar * phase * theta_t
    residual_transformed = (hbar * phi_t * phase * 1j
                            - pi2_phi / (2 * m) - effective_potential * phi_v)
    parity_gap = float(np.max(np.abs(residual_transformed - phase * residual_deformed)))
    return GaugeResult(phi, theta_x, effective_potential,
                       residual_deformed, residual_transformed, parity_gap)


def continuity_deformed(psi: ComplexField, setup: DeformedSetup, t: float,
                        psi_t: Optional[ComplexField] = None) -> ContinuityReport:
    """Budget of cos(theta) rho_t + div j = kappa + lambda.

    rho and j keep their familiar definitions; kappa is the source switched
    on by the phase angle, lambda the one switched on by a non-real
    potential.  The total residual is cos(theta) rho_t + div j - kappa -
    lambda and closes to truncation error for consistent (psi, psi_t).
    """
    if psi_t is None:
        psi_t = evolution_rhs(psi, setup, t)
    theta = setup.theta(t)
    hbar, m = setup.hbar, setup.m
    psi_v, psi_t_v = psi.values, psi_t.values
    rho = np.abs(psi_v) ** 2
    rho_t = 2.0 * np.real(np.conj(psi_v) * psi_t_v)
    dpsi = grad(psi).values
    current = (hbar / m) * np.imag(np.conj(psi_v) * dpsi)
    div_current = grad(ComplexField(psi.grid, current.astype(complex))).values.real
    kappa = -2.0 * np.sin(theta) * np.imag(psi_v * np.conj(psi_t_v))
    lam = (2.0 / hbar) * rho * np.imag(setup.V.values)
    terms = {
        "weighted_density_rate": np.cos(theta) * rho_t,
        "div_current": div_current,
        "kappa": kappa,
        "lambda": lam,
        "rho": rho,
        "current": current,
    }
    return budget(terms, {"weighted_density_rate": 1.0, "div_current": 1.0,
                          "kappa": -1.0, "lambda": -1.0})


def continuity_weighted(psi: ComplexField, setup: DeformedSetup, t: float,
                        psi_t: Optional[ComplexField] = None) -> ContinuityReport:
    """Budget of rho_t + div J = beta + gamma with phase-weighted current.

    J carries e^{-i theta} / e^{+i theta} weights on its two halves; beta
    collects the potential source (non-zero even for real V once the angle
    is non-zero), and gamma = J0 - |p psi|^2 sin(theta)/(m hbar) collects
    the gradient-of-angle and kinetic sources.
    """
    if psi_t is None:
        psi_t = evolution_rhs(psi, setup, t)
    theta = setup.theta(t)
    theta_x = setup.theta_x(t)
    hbar, m = setup.hbar, setup.m
    psi_v, psi_t_v = psi.values, psi_t.values
    weight = np.exp(-1j * theta)
    rho = np.abs(psi_v) ** 2
    rho_t = 2.0 * np.real(np.conj(psi_v) * psi_t_v)
    p_psi = -1j * hbar * grad(psi).values
    current = (1.0 / m) * np.real(p_psi * np.conj(psi_v) * weight)
    div_current = grad(ComplexField(psi.grid, current.astype(complex))).values.real
    beta = (2.0 / hbar) * rho * np.imag(setup.V.values * weight)
    p_theta = -1j * hbar * theta_x
    j0 = (1.0 / (m * hbar)) * np.real(p_psi * p_theta * np.conj(psi_v) * weight)
    gamma = j0 - (1.0 / (m * hbar)) * np.abs(p_psi) ** 2 * np.sin(theta)
    terms = {
        "density_rate": rho_t,
        "div_current": div_current,
        "beta": beta,
        "gamma": gamma,
        "J0": j0,
        "rho": rho,
        "current": current,
    }
    return budget(terms, {"density_rate": 1.0, "div_current": 1.0,
                          "beta": -1.0, "gamma": -1.0})


def separable_solution(phi: ComplexField, E: float, theta: float, t: float,
                       hbar: float = 1.0) -> ComplexField:
    """phi * exp[-(i/hbar) E t (cos(theta) - i sin(theta))].

    A spatially constant angle splits into a rotating phase and a real
    amplitude factor e^{-E t sin(theta)/hbar}; theta in (0, pi) decays,
    theta in (pi, 2 pi) grows.
    """
    factor = cmath.exp(-1j * E * t * complex(math.cos(theta), -math.sin(theta)) / hbar)
    return ComplexField(phi.grid, phi.values * factor)


# ---------------------------------------------------------------------------
# Separable time-factor families chi = exp(-i * a(t) * e^{-i theta(t)})


@dataclass(frozen=True)
class FixedAngle:
    """a = E t / hbar with a frozen angle theta0."""

    E: float
    theta0: float = 0.0
    hbar: float = 1.0


@dataclass(frozen=True)
class RampAngle:
    """Constant action coefficient a0, angle growing linearly in t."""

    rate: float
    a0: float = 1.0


@dataclass(frozen=True)
class LogAngle:
    """a = E t / hbar, angle theta0 + sqrt(eps^2 - E^2)/E * ln(t / t0).

    Keeps |da/dt - i (dtheta/dt) a| constant at eps/hbar; requires
    eps >= E so the square root stays real, and t >= t0 > 0.
    """

    E: float
    eps: float
    theta0: float = 0.0
    t0: float = 1.0
    hbar: float = 1.0
    xi: Optional[float] = None

    def __post_init__(self):
        if self.eps < self.E:
            raise DomainError("log-angle family needs eps >= E for a real coefficient")
        if not (self.t0 > 0):
            raise DomainError("log-angle family needs t0 > 0")
        if self.xi is None:
            root = math.sqrt(self.eps**2 - self.E**2)
            object.__setattr__(self, "xi", math.atan2(-root, self.E))


def log_angle_coefficient(family: LogAngle) -> float:
    """sqrt(eps^2 - E^2)/E, the ln(t) coefficient that keeps eps constant."""
    return math.sqrt(family.eps**2 - family.E**2) / family.E


def log_angle_alt_coefficient(family: LogAngle) -> float:
    """(hbar/E) sqrt(1 - (E/eps)^2): a dimensionally inconsistent variant.

    Kept for reference next to log_angle_coefficient; it differs from the
    consistent value by the factor hbar/eps and does not hold the residual
    modulus at eps/hbar.  The audit reports both.
    """
    return (family.hbar / family.E) * math.sqrt(1.0 - (family.E / family.eps) ** 2)


def time_factor_rates(family, t: float):
    """(a, theta, da/dt, dtheta/dt) for a family at time t."""
    if isinstance(family, FixedAngle):
        return family.E * t / family.hbar, family.theta0, family.E / family.hbar, 0.0
    if isinstance(family, RampAngle):
        return family.a0, family.rate * t, 0.0, family.rate
    if isinstance(family, LogAngle):
        if t < family.t0:
            raise DomainError("log-angle family defined for t >= t0")
        coeff = log_angle_coefficient(family)
        a = family.E * t / family.hbar
        theta = family.theta0 + coeff * math.log(t / family.t0)
        return a, theta, family.E / family.hbar, coeff / t
    raise PreconditionError(f"unknown time-factor family {type(family).__name__}")


def time_factor(family, t: float) -> complex:
    """chi(t) = exp(-i a(t) e^{-i theta(t)})."""
    a, theta, _, _ = time_factor_rates(family, t)
    return cmath.exp(-1j * a * cmath.exp(-1j * theta))


def separable_residual(phi: ComplexField, family, V: ComplexField, t: float,
                       hbar: float = 1.0, m: float = 1.0,
                       theta_field=None, theta_x=None, theta_xx=None) -> float:
    """Max-norm residual of the separated equation for psi = chi phi.

    hbar (da/dt - i dtheta/dt a) phi
      = -(hbar^2/2m) [lap phi + (i |grad theta|^2 phi - lap theta phi
        - 2 grad phi . grad theta) a e^{-i theta}
        + |grad theta|^2 a^2 e^{-2 i theta} phi] + V phi.

    The built-in families have grad theta = 0.  For the spatially varying
    branch pass theta_field (pointwise angle values; the family's angle is
    the spatially constant part of the time dependence) together with
    theta_x / theta_xx arrays; no solver exists for that branch, it is
    only evaluated.
    """
    a, theta, a_dot, theta_dot = time_factor_rates(family, t)
    if theta_field is not None:
        theta = np.asarray(theta_field, dtype=float)
    lhs = hbar * (a_dot - 1j * theta_dot * a) * phi.values
    lap_phi = laplace(phi).values
    bracket = lap_phi.astype(complex)
    if theta_x is not None:
        theta_x = np.asarray(theta_x, dtype=float)
        theta_xx = np.zeros_like(theta_x) if theta_xx is None else np.asarray(theta_xx)
        grad_phi = grad(phi).values
        g2 = theta_x**2
        bracket = bracket + (1j * g2 * phi.values - theta_xx * phi.values
                             - 2.0 * grad_phi * theta_x) * a * np.exp(-1j * theta)
        bracket = bracket + g2 * a**2 * np.exp(-2j * theta) * phi.values
    rhs = -(hbar**2 / (2.0 * m)) * bracket + V.values * phi.values
    return float(np.max(np.abs(lhs - rhs)))


def deformed_momentum(psi: ComplexField, theta, hbar: float = 1.0) -> ComplexField:
    """The candidate operator -hbar e^{-i theta} grad applied to psi.

    Note the missing factor of i relative to the canonical momentum: at
    theta = 0 this is -hbar grad, not -i hbar grad.  Squaring it gives
    hbar^2 e^{-2 i theta} lap, which misses the kinetic term of the
    Hamiltonian for general angles; that failure is what disqualifies the
    complex candidate unit.
    """
    return ComplexField(psi.grid, -hbar * np.exp(-1j * np.asarray(theta))
                        * grad(psi).values)


def deformed_momentum_square(psi: ComplexField, theta: float, hbar: float = 1.0):
    """(operator applied twice, closed form hbar^2 e^{-2 i theta} lap psi)."""
    twice = deformed_momentum(deformed_momentum(psi, theta, hbar), theta, hbar)
    closed = ComplexField(psi.grid,
                          hbar**2 * np.exp(-2j * theta) * laplace(psi).values)
    return twice, closed


@dataclass(frozen=True)
class CommutatorComparison:
    operator_rhs: ComplexField
    substitution_rhs: ComplexField
    mismatch: float


def position_commutator(psi: ComplexField, theta: float,
                        hbar: float = 1.0) -> CommutatorComparison:
    """[x, deformed momentum] psi, against the naive substitution value.

    Operator calculus gives hbar e^{-i theta} psi.  Substituting
    i -> e^{i theta} i into [x, p] = i hbar instead suggests
    hbar i e^{i theta} psi, which does not follow from the operator as
    defined; both are returned so callers can quantify the gap rather than
    silently prefer either.  Requires spatially constant theta.
    """
    x = psi.grid.x
    x_psi = ComplexField(psi.grid, x * psi.values)
    operator = ComplexField(
        psi.grid,
        x * deformed_momentum(psi, theta, hbar).values
        - deformed_momentum(x_psi, theta, hbar).values)
    substitution = ComplexField(psi.grid, hbar * 1j * cmath.exp(1j * theta) * psi.values)
    mismatch = float(np.max(np.abs(operator.values - substitution.values)))
    return CommutatorComparison(operator, substitution, mismatch)


def expected_decay_rate(E: float, theta: float, hbar: float = 1.0) -> float:
    """d ln ||psi|| / dt for an eigenstate of energy E at constant angle."""
    return -(E / hbar) * math.sin(theta)


def log_norm_rate(psi: ComplexField, psi_t: ComplexField) -> float:
    """Instantaneous d ln ||psi|| / dt from a consistent (psi, psi_t) pair."""
    num = integrate(np.real(np.conj(psi.values) * psi_t.values), psi.grid)
    den = integrate(np.abs(psi.values) ** 2, psi.grid)
    return num / den
