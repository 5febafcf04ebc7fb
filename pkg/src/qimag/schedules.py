"""Angle schedules parameterising the unit-rotor evolution factor.

A schedule is the triple of real angle functions (theta, gamma, omega) of
(x, t), each carrying analytic time derivative, spatial gradient and
Laplacian.  Positions are 3-vectors so that schedules with mutually
orthogonal wave vectors exist; the sampling grid embeds along axis 0.
Analytic derivatives are part of the schedule on purpose: the identity
residuals checked downstream would otherwise be dominated by finite
difference noise, and finite differences are reserved for the oracle side
of every test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .errors import DomainError, PreconditionError, SingularScheduleError
from .quaternion import Quaternion, I, generalized_unit, unit_rotor

__all__ = [
    "AngleFn",
    "AngleSchedule",
    "ConstantPhases",
    "ForcedPhases",
    "SingularForcing",
    "SpaceLinear",
    "build_schedule",
    "integrate_forced_phases",
    "stationary_rotor",
    "rotor_at",
    "rotor_rate_closed_form",
    "rotor_rate_residual",
    "rotor_generator",
    "rotor_generator_routes",
    "rotor_gradient",
    "rotor_laplacian",
    "rotor_laplace_eigenvalue",
    "rotor_laplace_residual",
    "schedule_derivative_residual",
]

Vec3 = Union[Sequence[float], np.ndarray]

QUARTER_TURN = 0.5 * math.pi
SINGULAR_GUARD = 1e-9  # radians around multiples of pi/2

# Fixed-panel Gauss-Legendre rule used for phase quadratures; panel width
# and order make the quadrature error negligible against every tolerance
# in the test suite while keeping evaluation smooth in the upper limit.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)
_MAX_PANEL = 0.25


def _as_point(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (3,):
        raise DomainError(f"positions are 3-vectors, got shape {x.shape}")
    return x


@dataclass(frozen=True)
class AngleFn:
    """A real angle of (x, t) with its analytic derivatives.

    value/dt/lap map (x, t) -> scalar (broadcast over leading axes of x);
    grad maps (x, t) -> 3-vector with the same broadcasting.
    """

    value: Callable
    dt: Callable
    grad: Callable
    lap: Callable


def _affine_angle(offset: float, rate: float, wavevec: Vec3) -> AngleFn:
    wavevec = np.asarray(wavevec, dtype=float)

    def value(x, t):
        x = _as_point(x)
        return offset + rate * t + x @ wavevec

    def dt(x, t):
        x = _as_point(x)
        return np.broadcast_to(rate, x.shape[:-1]).copy() if x.ndim > 1 else rate

    def grad_fn(x, t):
        x = _as_point(x)
        return np.broadcast_to(wavevec, x.shape).copy()

    def lap(x, t):
        x = _as_point(x)
        return np.zeros(x.shape[:-1]) if x.ndim > 1 else 0.0

    return AngleFn(value, dt, grad_fn, lap)


def _gl_quadrature(fn, t0: float, t1: float) -> float:
    """Integral of fn over [t0, t1] on fixed Gauss-Legendre panels."""
    if t1 == t0:
        return 0.0
    sign = 1.0
    if t1 < t0:
        t0, t1 = t1, t0
        sign = -1.0
    panels = max(1, int(math.ceil((t1 - t0) / _MAX_PANEL)))
    edges = np.linspace(t0, t1, panels + 1)
    total = 0.0
    for left, right in zip(edges[:-1], edges[1:]):
        half = 0.5 * (right - left)
        mid = 0.5 * (right + left)
        total += half * float(np.sum(_GL_WEIGHTS * fn(mid + half * _GL_NODES)))
    return sign * total


def _quadrature_angle(offset: float, rate_fn: Callable, t0: float) -> AngleFn:
    def value(x, t):
        x = _as_point(x)
        v = offset + _gl_quadrature(rate_fn, t0, float(t))
        return np.broadcast_to(v, x.shape[:-1]).copy() if x.ndim > 1 else v

    def dt(x, t):
        x = _as_point(x)
        v = float(np.asarray(rate_fn(float(t))))
        return np.broadcast_to(v, x.shape[:-1]).copy() if x.ndim > 1 else v

    def grad_fn(x, t):
        x = _as_point(x)
        return np.zeros(x.shape)

    def lap(x, t):
        x = _as_point(x)
        return np.zeros(x.shape[:-1]) if x.ndim > 1 else 0.0

    return AngleFn(value, dt, grad_fn, lap)


def _closed_form_angle(offset: float, value_fn: Callable, rate_fn: Callable) -> AngleFn:
    def value(x, t):
        x = _as_point(x)
        v = offset + value_fn(float(t))
        return np.broadcast_to(v, x.shape[:-1]).copy() if x.ndim > 1 else v

    def dt(x, t):
        x = _as_point(x)
        v = rate_fn(float(t))
        return np.broadcast_to(v, x.shape[:-1]).copy() if x.ndim > 1 else v

    def grad_fn(x, t):
        x = _as_point(x)
        return np.zeros(x.shape)

    def lap(x, t):
        x = _as_point(x)
        return np.zeros(x.shape[:-1]) if x.ndim > 1 else 0.0

    return AngleFn(value, dt, grad_fn, lap)


@dataclass(frozen=True)
class AngleSchedule:
    """The (theta, gamma, omega) triple; xi = omega - gamma derives from it."""

    theta: AngleFn
    gamma: AngleFn
    omega: AngleFn

    def angles(self, x, t):
        return (self.theta.value(x, t), self.gamma.value(x, t),
                self.omega.value(x, t))

    def rates(self, x, t):
        return (self.theta.dt(x, t), self.gamma.dt(x, t), self.omega.dt(x, t))

    def xi(self, x, t):
        return self.omega.value(x, t) - self.gamma.value(x, t)

    def xi_grad(self, x, t):
        return self.omega.grad(x, t) - self.gamma.grad(x, t)


# ---------------------------------------------------------------------------
# Built-in schedule families


@dataclass(frozen=True)
class ConstantPhases:
    """theta = E t / hbar with both phase angles frozen."""

    E: float
    gamma0: float = 0.0
    omega0: float = 0.0
    hbar: float = 1.0


@dataclass(frozen=True)
class ForcedPhases:
    """Phase dynamics dgamma/dt = F sin^2(theta), domega/dt = -F cos^2(theta).

    F is a real constant or a callable of t.  This forcing removes the
    j-directed part of the generator product, leaving a pure i drive.
    """

    E: float
    F: Union[float, Callable]
    gamma0: float = 0.0
    omega0: float = 0.0
    t0: float = 0.0
    hbar: float = 1.0


@dataclass(frozen=True)
class SingularForcing:
    """Forcing F = c / (sin(theta) cos(theta)), singular at multiples of pi/2.

    Yields a constant i-component c of the generator on any interval that
    avoids the singular angles; evaluation refuses to cross them.
    """

    E: float
    c: float
    gamma0: float = 0.0
    omega0: float = 0.0
    t0: float = 0.1
    hbar: float = 1.0


@dataclass(frozen=True)
class SpaceLinear:
    """theta = E t/hbar + k.x, gamma = gamma0 + g.x, omega = omega0 + g.x.

    Linear angles are harmonic and have constant gradients; k.g = 0 is
    required so the mixed gradient terms of the rotor Laplacian vanish.
    """

    E: float
    k: Vec3
    g: Vec3
    gamma0: float = 0.0
    omega0: float = 0.0
    hbar: float = 1.0

    def __post_init__(self):
        k = np.asarray(self.k, dtype=float)
        g = np.asarray(self.g, dtype=float)
        if k.shape != (3,) or g.shape != (3,):
            raise PreconditionError("wave vectors k and g must be 3-vectors")
        scale = max(np.linalg.norm(k) * np.linalg.norm(g), 1.0)
        if abs(float(k @ g)) > 1e-12 * scale:
            raise PreconditionError(
                f"space-linear schedule needs k.g = 0, got k.g = {float(k @ g)}")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "g", g)


def _theta_singularity(E: float, hbar: float, t_lo: float, t_hi: float):
    """Multiple of pi/2 reached by theta = E t/hbar on [t_lo, t_hi], if any."""
    th0 = E * t_lo / hbar
    th1 = E * t_hi / hbar
    lo, hi = min(th0, th1), max(th0, th1)
    m = math.ceil((lo - SINGULAR_GUARD) / QUARTER_TURN)
    candidate = m * QUARTER_TURN
    if candidate <= hi + SINGULAR_GUARD:
        return candidate
    return None


def _check_singular_interval(fam: SingularForcing, t_lo: float, t_hi: float):
    bad = _theta_singularity(fam.E, fam.hbar, t_lo, t_hi)
    if bad is not None:
        raise SingularScheduleError(
            "forced phases are singular where theta is a multiple of pi/2; "
            f"the interval [{t_lo}, {t_hi}] reaches theta = {bad}")


def build_schedule(family) -> AngleSchedule:
    """Materialise a family as an AngleSchedule with analytic derivatives."""
    if isinstance(family, ConstantPhases):
        zero = np.zeros(3)
        return AngleSchedule(
            theta=_affine_angle(0.0, family.E / family.hbar, zero),
            gamma=_affine_angle(family.gamma0, 0.0, zero),
            omega=_affine_angle(family.omega0, 0.0, zero),
        )
    if isinstance(family, SpaceLinear):
        return AngleSchedule(
            theta=_affine_angle(0.0, family.E / family.hbar, family.k),
            gamma=_affine_angle(family.gamma0, 0.0, family.g),
            omega=_affine_angle(family.omega0, 0.0, family.g),
        )
    if isinstance(family, ForcedPhases):
        rate = family.E / family.hbar

        def theta_of(t):
            return rate * t

        if callable(family.F):
            f = family.F
            gamma_rate = lambda t: np.asarray(f(t)) * np.sin(theta_of(np.asarray(t))) ** 2
            omega_rate = lambda t: -np.asarray(f(t)) * np.cos(theta_of(np.asarray(t))) ** 2
            gamma_fn = _quadrature_angle(family.gamma0, gamma_rate, family.t0)
            omega_fn = _quadrature_angle(family.omega0, omega_rate, family.t0)
        else:
            f0 = float(family.F)

            # int F sin^2 = F (t/2 - sin 2theta / 4 rate); int F cos^2 likewise
            def gamma_val(t, _t0=family.t0):
                return f0 * (0.5 * (t - _t0)
                             - (math.sin(2 * rate * t) - math.sin(2 * rate * _t0)) / (4 * rate))

            def omega_val(t, _t0=family.t0):
                return -f0 * (0.5 * (t - _t0)
                              + (math.sin(2 * rate * t) - math.sin(2 * rate * _t0)) / (4 * rate))

            gamma_fn = _closed_form_angle(family.gamma0, gamma_val,
                                          lambda t: f0 * math.sin(rate * t) ** 2)
            omega_fn = _closed_form_angle(family.omega0, omega_val,
                                          lambda t: -f0 * math.cos(rate * t) ** 2)
        return AngleSchedule(
            theta=_affine_angle(0.0, rate, np.zeros(3)),
            gamma=gamma_fn,
            omega=omega_fn,
        )
    if isinstance(family, SingularForcing):
        rate = family.E / family.hbar
        c = family.c
        t0 = family.t0

        def gamma_val(t):
            _check_singular_interval(family, t0, t)
            # int c tan = -(c/rate) ln|cos|
            return -(c / rate) * (math.log(abs(math.cos(rate * t)))
                                  - math.log(abs(math.cos(rate * t0))))

        def omega_val(t):
            _check_singular_interval(family, t0, t)
            # int -c cot = -(c/rate) ln|sin|
            return -(c / rate) * (math.log(abs(math.sin(rate * t)))
                                  - math.log(abs(math.sin(rate * t0))))

        def gamma_rate(t):
            _check_singular_interval(family, t, t)
            return c * math.tan(rate * t)

        def omega_rate(t):
            _check_singular_interval(family, t, t)
            return -c / math.tan(rate * t)

        return AngleSchedule(
            theta=_affine_angle(0.0, rate, np.zeros(3)),
            gamma=_closed_form_angle(family.gamma0, gamma_val, gamma_rate),
            omega=_closed_form_angle(family.omega0, omega_val, omega_rate),
        )
    raise PreconditionError(f"unknown schedule family {type(family).__name__}")


def integrate_forced_phases(family, t_grid) -> np.ndarray:
    """Classical fixed-step 4th order integration of the forced phases.

    Returns an array of (gamma, omega) rows, one per entry of the strictly
    increasing t_grid.  Substeps are capped at 1/2000 of the theta period
    so that halving the step moves results by less than 1e-10.  For the
    singular forcing family the integrator refuses to touch or cross an
    angle multiple of pi/2 instead of regularising it.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) < 1:
        raise DomainError("t_grid must be a 1-D sequence of times")
    if np.any(np.diff(t_grid) <= 0):
        raise DomainError("t_grid must be strictly increasing")

    if isinstance(family, ForcedPhases):
        rate = family.E / family.hbar
        f = family.F if callable(family.F) else (lambda t, _f=float(family.F): _f)

        def rhs(t):
            th = rate * t
            ft = float(f(t))
            return np.array([ft * math.sin(th) ** 2, -ft * math.cos(th) ** 2])

        start = (family.gamma0, family.omega0)
        t_start = family.t0
        singular = None
    elif isinstance(family, SingularForcing):
        rate = family.E / family.hbar
        c = family.c

        def rhs(t):
            th = rate * t
            return np.array([c * math.tan(th), -c / math.tan(th)])

        start = (family.gamma0, family.omega0)
        t_start = family.t0
        singular = family
    else:
        raise PreconditionError("phase integration applies to the forced families")

    period = 2.0 * math.pi * family.hbar / abs(family.E)
    h_max = period / 2000.0

    y = np.array(start, dtype=float)
    t_now = t_start
    out = np.empty((len(t_grid), 2))
    for row, t_target in enumerate(t_grid):
        if t_target < t_start:
            raise DomainError("t_grid starts before the family's initial time")
        if singular is not None:
            _check_singular_interval(singular, t_now, t_target)
        span = t_target - t_now
        steps = max(1, int(math.ceil(span / h_max))) if span > 0 else 0
        h = span / steps if steps else 0.0
        for _ in range(steps):
            k1 = rhs(t_now)
            k2 = rhs(t_now + 0.5 * h)
            k3 = rhs(t_now + 0.5 * h)
            k4 = rhs(t_now + h)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t_now += h
        t_now = t_target
        out[row] = y
    return out


def stationary_rotor(E: float, gamma0: float, omega0: float, t: float,
                     hbar: float = 1.0) -> Quaternion:
    """cos(Et/hbar) e^{i gamma0} + sin(Et/hbar) e^{i omega0} j.

    Unit norm for all t and periodic with period 2 pi hbar / E: the
    quaternionic counterpart of a stationary phase factor.
    """
    return unit_rotor(E * t / hbar, gamma0, omega0)


# ---------------------------------------------------------------------------
# Pointwise rotor evaluation and identities

_ORIGIN = np.zeros(3)


def rotor_at(schedule: AngleSchedule, x, t) -> Quaternion:
    th, ga, om = schedule.angles(x, t)
    return unit_rotor(float(th), float(ga), float(om))


def rotor_rate_closed_form(schedule: AngleSchedule, x, t) -> Quaternion:
    """d(rotor)/dt assembled from quaternion products.

    theta_dot * rotor * eta + i (omega_dot sin(theta) e^{i gamma}
    - gamma_dot cos(theta) e^{i omega} j) eta, with eta = e^{i xi} j.
    """
    th, ga, om = (float(v) for v in schedule.angles(x, t))
    th_d, ga_d, om_d = (float(v) for v in schedule.rates(x, t))
    rotor = unit_rotor(th, ga, om)
    eta = generalized_unit(om - ga)
    mixed = Quaternion.from_symplectic(
        om_d * math.sin(th) * complex(math.cos(ga), math.sin(ga)),
        -ga_d * math.cos(th) * complex(math.cos(om), math.sin(om)),
    )
    return th_d * (rotor * eta) + (I * mixed) * eta


def rotor_rate_residual(schedule: AngleSchedule, x, t, h: float) -> float:
    """Quaternion norm of (central difference of rotor in t) minus the closed form."""
    if not (h > 0.0):
        raise DomainError(f"finite-difference step must be positive, got {h}")
    fd = (rotor_at(schedule, x, t + h) - rotor_at(schedule, x, t - h)) * (0.5 / h)
    return (fd - rotor_rate_closed_form(schedule, x, t)).norm()


def _generator_closed_form(schedule: AngleSchedule, x, t) -> Quaternion:
    th, ga, om = (float(v) for v in schedule.angles(x, t))
    th_d, ga_d, om_d = (float(v) for v in schedule.rates(x, t))
    drive = (ga_d - om_d) * math.sin(th) * math.cos(th)
    sym = (ga_d * math.cos(th) ** 2 + om_d * math.sin(th) ** 2)
    phase = complex(math.cos(ga + om), math.sin(ga + om))
    # -theta_dot + i*(drive + sym * e^{i(gamma+omega)} j)
    return Quaternion(-th_d, drive, 0.0, 0.0) + (I * Quaternion.from_symplectic(0.0, sym * phase))


def rotor_generator_routes(schedule: AngleSchedule, x, t):
    """(product route, closed form) for d(rotor)/dt * eta * conj(rotor)."""
    th, ga, om = (float(v) for v in schedule.angles(x, t))
    eta = generalized_unit(om - ga)
    rotor = unit_rotor(th, ga, om)
    via_products = (rotor_rate_closed_form(schedule, x, t) * eta) * rotor.conjugate()
    return via_products, _generator_closed_form(schedule, x, t)


def rotor_generator(schedule: AngleSchedule, x, t) -> Quaternion:
    """d(rotor)/dt * eta * conj(rotor) as a closed-form quaternion.

    The product route and the closed form agree identically; both are
    evaluated and a disagreement beyond rounding is treated as an internal
    error.  The scalar part is -theta_dot, the i part carries the mixed
    phase drive, and the j/k part vanishes exactly under phase forcing.
    """
    via_products, closed = rotor_generator_routes(schedule, x, t)
    scale = 1.0 + closed.norm()
    if (via_products - closed).norm() > 1e-9 * scale:
        raise AssertionError("generator product route disagrees with closed form")
    return closed


def rotor_gradient(schedule: AngleSchedule, x, t):
    """Coefficient 3-vectors (coef_a, coef_b) of the rotor's spatial gradient.

    grad(rotor) = coef_a e^{i gamma} + coef_b e^{i omega} j with
    coef_a = -sin(theta) grad(theta) + i cos(theta) grad(gamma) and
    coef_b = cos(theta) grad(theta) + i sin(theta) grad(omega).
    """
    th = np.asarray(schedule.theta.value(x, t))
    gth = np.asarray(schedule.theta.grad(x, t))
    gga = np.asarray(schedule.gamma.grad(x, t))
    gom = np.asarray(schedule.omega.grad(x, t))
    st, ct = np.sin(th), np.cos(th)
    coef_a = -st[..., None] * gth + 1j * ct[..., None] * gga
    coef_b = ct[..., None] * gth + 1j * st[..., None] * gom
    return coef_a, coef_b


def rotor_laplacian(schedule: AngleSchedule, x, t):
    """Coefficients (coef_a, coef_b) of the rotor's spatial Laplacian.

    laplacian(rotor) = coef_a e^{i gamma} + coef_b e^{i omega} j.
    """
    th = np.asarray(schedule.theta.value(x, t))
    gth = np.asarray(schedule.theta.grad(x, t))
    gga = np.asarray(schedule.gamma.grad(x, t))
    gom = np.asarray(schedule.omega.grad(x, t))
    lth = np.asarray(schedule.theta.lap(x, t))
    lga = np.asarray(schedule.gamma.lap(x, t))
    lom = np.asarray(schedule.omega.lap(x, t))
    st, ct = np.sin(th), np.cos(th)
    gth2 = np.sum(gth * gth, axis=-1)
    gga2 = np.sum(gga * gga, axis=-1)
    gom2 = np.sum(gom * gom, axis=-1)
    th_dot_ga = np.sum(gth * gga, axis=-1)
    th_dot_om = np.sum(gth * gom, axis=-1)
    coef_a = (-(gth2 + gga2) * ct - st * lth
              + 1j * (ct * lga - 2.0 * st * th_dot_ga))
    coef_b = (-(gth2 + gom2) * st + ct * lth
              + 1j * (st * lom + 2.0 * ct * th_dot_om))
    return coef_a, coef_b


def rotor_laplacian_quaternion(schedule: AngleSchedule, x, t) -> Quaternion:
    """Assembled Laplacian of the rotor at a single point."""
    coef_a, coef_b = rotor_laplacian(schedule, x, t)
    th, ga, om = (float(v) for v in schedule.angles(x, t))
    ea = complex(math.cos(ga), math.sin(ga))
    eb = complex(math.cos(om), math.sin(om))
    return Quaternion.from_symplectic(complex(coef_a) * ea, complex(coef_b) * eb)


def rotor_laplace_residual(schedule: AngleSchedule, eigenvalue: float, x, t) -> float:
    """Quaternion norm of laplacian(rotor) + eigenvalue * rotor."""
    lap_q = rotor_laplacian_quaternion(schedule, x, t)
    return (lap_q + eigenvalue * rotor_at(schedule, x, t)).norm()


def rotor_laplace_eigenvalue(family: SpaceLinear, x=_ORIGIN, t: float = 0.0,
                             tol: float = 1e-8) -> float:
    """|k|^2 + |g|^2, the constant with laplacian(rotor) = -const * rotor.

    Valid for space-linear schedules (harmonic angles, orthogonal k and g,
    equal phase gradients); the residual is checked at the given point.
    """
    if not isinstance(family, SpaceLinear):
        raise PreconditionError("eigen reduction applies to space-linear schedules")
    value = float(np.dot(family.k, family.k) + np.dot(family.g, family.g))
    schedule = build_schedule(family)
    res = rotor_laplace_residual(schedule, value, x, t)
    if res > tol:
        raise AssertionError(
            f"rotor Laplacian residual {res} exceeds {tol} for a space-linear schedule")
    return value


def schedule_derivative_residual(schedule: AngleSchedule, x, t,
                                 h_t: float = 1e-5, h_x: float = 1e-4) -> float:
    """Max gap between supplied analytic derivatives and central differences."""
    x = np.asarray(x, dtype=float)
    worst = 0.0
    for fn in (schedule.theta, schedule.gamma, schedule.omega):
        fd_t = (fn.value(x, t + h_t) - fn.value(x, t - h_t)) / (2.0 * h_t)
        worst = max(worst, abs(float(fd_t - fn.dt(x, t))))
        grad_analytic = np.asarray(fn.grad(x, t), dtype=float)
        lap_fd = 0.0
        for axis in range(3):
            step = np.zeros(3)
            step[axis] = h_x
            plus = float(fn.value(x + step, t))
            minus = float(fn.value(x - step, t))
            fd_g = (plus - minus) / (2.0 * h_x)
            worst = max(worst, abs(fd_g - grad_analytic[axis]))
            lap_fd += (plus - 2.0 * float(fn.value(x, t)) + minus) / h_x**2
        worst = max(worst, abs(lap_fd - float(fn.lap(x, t))))
    return worst
