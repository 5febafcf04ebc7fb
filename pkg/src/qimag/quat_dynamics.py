"""Quaternionic Schrodinger dynamics with a right-multiplied unit.

The evolution law is hbar * Psi_t * eta = H Psi with eta = e^{i xi} j a
unit imaginary quaternion; since eta^{-1} = -eta this rearranges to
Psi_t = -(1/hbar) (H Psi) eta.  Operator ordering is fixed repo-wide:
the Hamiltonian and every potential multiply the wave function from the
left, the unit and the evolution rotor multiply from the right.

The probability budget splits as density_rate + div(current) = B + G,
where B is switched on by the j-part (or non-real part) of the scalar
potential and G by spatial variation of the unit's phase.  B is assembled
as (Psi eta Psi^dag U^dag - U Psi eta Psi^dag)/hbar, the orientation that
closes the budget under the evolution law above; the opposite orientation
flips its sign and leaves a gap of twice the source (the audit reports
both).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import PreconditionError, StabilityError
from .grid import ComplexField, Grid1D, QuatField, grad, laplace
from .reports import ContinuityReport, budget
from .schedules import AngleSchedule

__all__ = [
    "QuatPotential",
    "UnitField",
    "embed_grid",
    "apply_hamiltonian",
    "kinetic_by_double_application",
    "generalized_momentum",
    "probability_density",
    "probability_current",
    "current_quaternion",
    "source_potential",
    "source_potential_variants",
    "source_unit_gradient",
    "stability_bound",
    "step_quaternionic",
    "continuity_report",
    "rotor_field",
    "rotor_rate_field",
    "stationary_state",
    "separation_residual",
    "full_pde_residual",
    "position_commutator_residual",
    "rotor_energy_for_level",
]

IMAG_TOL = 1e-8  # relative bound on quaternion-imaginary leakage of real outputs


@dataclass(frozen=True)
class QuatPotential:
    """Vector potential alpha*i + beta*j and scalar potential V + W*j.

    alpha is real pointwise; beta, V, W are complex fields on one grid.
    """

    grid: Grid1D
    alpha: np.ndarray
    beta: np.ndarray
    V: np.ndarray
    W: np.ndarray

    def __post_init__(self):
        alpha = np.asarray(self.alpha, dtype=float)
        beta = np.asarray(self.beta, dtype=np.complex128)
        v = np.asarray(self.V, dtype=np.complex128)
        w = np.asarray(self.W, dtype=np.complex128)
        for name, arr in (("alpha", alpha), ("beta", beta), ("V", v), ("W", w)):
            if arr.shape != (self.grid.n,):
                raise PreconditionError(f"potential component {name} does not match the grid")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "V", v)
        object.__setattr__(self, "W", w)

    @classmethod
    def free(cls, grid: Grid1D) -> "QuatPotential":
        z = np.zeros(grid.n)
        return cls(grid, z, z.astype(complex), z.astype(complex), z.astype(complex))

    @classmethod
    def scalar(cls, grid: Grid1D, V=0.0, W=0.0) -> "QuatPotential":
        z = np.zeros(grid.n)
        return cls(grid, z, z.astype(complex),
                   np.broadcast_to(np.asarray(V, dtype=complex), (grid.n,)).copy(),
                   np.broadcast_to(np.asarray(W, dtype=complex), (grid.n,)).copy())

    @property
    def has_vector(self) -> bool:
        return bool(np.any(self.alpha != 0.0) or np.any(self.beta != 0.0))

    def vector_parts(self):
        """Symplectic components (a, b) of alpha*i + beta*j."""
        return 1j * self.alpha, self.beta


@dataclass(frozen=True)
class UnitField:
    """The generalized unit e^{i xi(x)} j sampled on a grid.

    Carries the analytic gradient of the phase so the unit-gradient source
    never relies on differencing the unit itself.
    """

    grid: Grid1D
    xi: np.ndarray
    xi_grad: np.ndarray

    def __post_init__(self):
        xi = np.broadcast_to(np.asarray(self.xi, dtype=float), (self.grid.n,)).copy()
        gx = np.broadcast_to(np.asarray(self.xi_grad, dtype=float), (self.grid.n,)).copy()
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "xi_grad", gx)

    @classmethod
    def constant(cls, grid: Grid1D, xi: float = 0.0) -> "UnitField":
        return cls(grid, np.full(grid.n, float(xi)), np.zeros(grid.n))

    @classmethod
    def from_schedule(cls, schedule: AngleSchedule, grid: Grid1D, t: float) -> "UnitField":
        pts = embed_grid(grid)
        xi = np.asarray(schedule.xi(pts, t), dtype=float)
        gx = np.asarray(schedule.xi_grad(pts, t), dtype=float)[..., 0]
        return cls(grid, xi, gx)

    @property
    def b(self) -> np.ndarray:
        return np.exp(1j * self.xi)

    def as_quat_field(self) -> QuatField:
        return QuatField(self.grid, np.zeros(self.grid.n, dtype=complex), self.b)


def embed_grid(grid: Grid1D) -> np.ndarray:
    """Grid coordinates as 3-vectors along axis 0 for schedule evaluation."""
    pts = np.zeros((grid.n, 3))
    pts[:, 0] = grid.x
    return pts


def _unit_parts(unit, grid: Grid1D):
    """(a, b) symplectic parts of the unit, validating eta^2 = -1 pointwise."""
    if isinstance(unit, UnitField):
        if unit.grid != grid:
            raise PreconditionError("unit field lives on a different grid")
        return np.zeros(grid.n, dtype=complex), unit.b
    if isinstance(unit, QuatField):
        if unit.grid != grid:
            raise PreconditionError("unit field lives on a different grid")
        scalar = np.max(np.abs(unit.a.real))
        norm_err = np.max(np.abs(unit.norm_sq() - 1.0))
        if scalar > 1e-10 or norm_err > 1e-10:
            raise PreconditionError(
                "unit field must square to -1 pointwise "
                f"(max scalar part {scalar:.3e}, max norm error {norm_err:.3e})")
        return unit.a, unit.b
    raise PreconditionError(f"cannot interpret {type(unit).__name__} as a unit field")


def _as_quat(psi) -> QuatField:
    if isinstance(psi, QuatField):
        return psi
    if isinstance(psi, ComplexField):
        return QuatField.from_complex(psi)
    raise PreconditionError(f"expected a field, got {type(psi).__name__}")


def apply_hamiltonian(psi, pot: QuatPotential, hbar: float = 1.0,
                      m: float = 1.0) -> QuatField:
    """-(hbar^2/2m) (grad - A)^2 Psi + U Psi, all products left of Psi.

    The squared covariant derivative is expanded with the compact Laplacian:
    lap Psi - grad(A Psi) - A grad(Psi) + A (A Psi).
    """
    psi = _as_quat(psi)
    if psi.grid != pot.grid:
        raise PreconditionError("wave function and potential on different grids")
    if pot.has_vector:
        av, bv = pot.vector_parts()
        a_psi = psi.mul_quat_left(av, bv)
        kinetic = (laplace(psi) - grad(a_psi)
                   - grad(psi).mul_quat_left(av, bv) + a_psi.mul_quat_left(av, bv))
    else:
        kinetic = laplace(psi)
    out = kinetic.scale(-hbar**2 / (2.0 * m))
    return out + psi.mul_quat_left(pot.V, pot.W)


def kinetic_by_double_application(psi, pot: QuatPotential) -> QuatField:
    """(grad - A) applied twice literally; oracle for the expanded kinetic term."""
    psi = _as_quat(psi)
    av, bv = pot.vector_parts()
    first = grad(psi) - psi.mul_quat_left(av, bv)
    return grad(first) - first.mul_quat_left(av, bv)


def generalized_momentum(psi, unit, pot: Optional[QuatPotential] = None,
                         hbar: float = 1.0) -> QuatField:
    """-hbar [(grad - A) Psi] eta, with the unit multiplying on the right."""
    psi = _as_quat(psi)
    ua, ub = _unit_parts(unit, psi.grid)
    covariant = grad(psi)
    if pot is not None and pot.has_vector:
        av, bv = pot.vector_parts()
        covariant = covariant - psi.mul_quat_left(av, bv)
    return covariant.mul_quat_right(ua, ub).scale(-hbar)


def probability_density(psi) -> np.ndarray:
    """Psi Psi^dag = |Psi_0|^2 + |Psi_1|^2, real and non-negative."""
    return _as_quat(psi).norm_sq()


def _real_part_checked(q: QuatField, label: str) -> np.ndarray:
    scale = max(float(np.max(np.abs(q.a.real))), 1e-300)
    leak = float(np.max(q.imag_magnitude()))
    if leak > IMAG_TOL * max(scale, 1.0):
        raise AssertionError(
            f"{label} should be real; imaginary magnitude {leak:.3e} vs scale {scale:.3e}")
    return q.a.real.copy()


def current_quaternion(psi, unit, pot: Optional[QuatPotential] = None,
                       hbar: float = 1.0, m: float = 1.0) -> QuatField:
    """(1/2m)[(Pi Psi) Psi^dag + Psi (Pi Psi)^dag] as a raw quaternion field."""
    psi = _as_quat(psi)
    momentum = generalized_momentum(psi, unit, pot, hbar)
    sym = momentum.mul(psi.conj()) + psi.mul(momentum.conj())
    return sym.scale(1.0 / (2.0 * m))


def probability_current(psi, unit, pot: Optional[QuatPotential] = None,
                        hbar: float = 1.0, m: float = 1.0) -> np.ndarray:
    """Real probability current; the quaternion-imaginary parts must vanish."""
    return _real_part_checked(current_quaternion(psi, unit, pot, hbar, m), "current")


def _sandwich(psi: QuatField, ua, ub) -> QuatField:
    """Psi eta Psi^dag."""
    return psi.mul_quat_right(ua, ub).mul(psi.conj())


def source_potential_variants(psi, pot: QuatPotential, unit, hbar: float = 1.0):
    """Both orientations of the scalar-potential source, as quaternion fields.

    Returns (closing, reversed): closing = (T U^dag - U T)/hbar with
    T = Psi eta Psi^dag, the orientation consistent with the evolution law;
    reversed = -closing is the opposite ordering.
    """
    psi = _as_quat(psi)
    ua, ub = _unit_parts(unit, psi.grid)
    t_field = _sandwich(psi, ua, ub)
    # U^dag = conj(V) - W j
    t_udag = t_field.mul_quat_right(np.conj(pot.V), -pot.W)
    u_t = t_field.mul_quat_left(pot.V, pot.W)
    closing = (t_udag - u_t).scale(1.0 / hbar)
    return closing, closing.scale(-1.0)


def source_potential(psi, pot: QuatPotential, unit, hbar: float = 1.0) -> np.ndarray:
    """Scalar-potential source of the probability budget (real field).

    Vanishes identically for a real scalar potential; a j-part or an
    imaginary part of V switches it on.
    """
    closing, _ = source_potential_variants(psi, pot, unit, hbar)
    return _real_part_checked(closing, "potential source")


def source_unit_gradient(psi, unit: UnitField, pot: Optional[QuatPotential] = None,
                         hbar: float = 1.0, m: float = 1.0) -> np.ndarray:
    """Source fed by the spatial gradient of the unit's phase.

    (1/2m hbar) [ (Pi Psi . p xi) Psi^dag + Psi (p xi)^dag (Pi Psi)^dag ]
    with p xi = -i hbar grad(xi), contracted in the written order.
    Vanishes for a constant phase.
    """
    psi = _as_quat(psi)
    if not isinstance(unit, UnitField):
        raise PreconditionError("the unit-gradient source needs a UnitField with xi_grad")
    momentum = generalized_momentum(psi, unit, pot, hbar)
    p_xi = -1j * hbar * unit.xi_grad
    t1 = momentum.mul_complex_right(p_xi).mul(psi.conj())
    t2 = psi.mul_complex_right(np.conj(p_xi)).mul(momentum.conj())
    total = (t1 + t2).scale(1.0 / (2.0 * m * hbar))
    return _real_part_checked(total, "unit-gradient source")


def stability_bound(grid: Grid1D, hbar: float, m: float) -> float:
    return 0.5 * (2.0 * m / hbar) * grid.dx**2 / 2.0


def evolution_rhs(psi, pot: QuatPotential, unit, hbar: float = 1.0,
                  m: float = 1.0) -> QuatField:
    """Psi_t = -(1/hbar) (H Psi) eta."""
    psi = _as_quat(psi)
    ua, ub = _unit_parts(unit, psi.grid)
    h_psi = apply_hamiltonian(psi, pot, hbar, m)
    return h_psi.mul_quat_right(ua, ub).scale(-1.0 / hbar)


def step_quaternionic(psi, pot: QuatPotential, unit, dt: float,
                      hbar: float = 1.0, m: float = 1.0) -> QuatField:
    """One classical fourth-order step; the unit is held fixed across stages."""
    psi = _as_quat(psi)
    if dt > stability_bound(psi.grid, hbar, m):
        raise StabilityError(
            f"dt = {dt} exceeds the stability bound {stability_bound(psi.grid, hbar, m)}")
    k1 = evolution_rhs(psi, pot, unit, hbar, m)
    k2 = evolution_rhs(psi + k1.scale(0.5 * dt), pot, unit, hbar, m)
    k3 = evolution_rhs(psi + k2.scale(0.5 * dt), pot, unit, hbar, m)
    k4 = evolution_rhs(psi + k3.scale(dt), pot, unit, hbar, m)
    return psi + (k1 + k2.scale(2.0) + k3.scale(2.0) + k4).scale(dt / 6.0)


def continuity_report(psi, pot: QuatPotential, unit, hbar: float = 1.0,
                      m: float = 1.0, psi_t: Optional[QuatField] = None) -> ContinuityReport:
    """Budget density_rate + div(current) - B - G, each term separate.

    psi_t defaults to the analytic right-hand side of the evolution law so
    the residual isolates spatial truncation error.
    """
    psi = _as_quat(psi)
    if not isinstance(unit, UnitField):
        raise PreconditionError(
            "the continuity budget needs a UnitField (its phase gradient "
            "feeds the unit-gradient source)")
    if psi_t is None:
        psi_t = evolution_rhs(psi, pot, unit, hbar, m)
    density = probability_density(psi)
    density_rate = 2.0 * psi_t.mul(psi.conj()).scalar_part()
    current = probability_current(psi, unit, pot, hbar, m)
    div_current = grad(ComplexField(psi.grid, current.astype(complex))).values.real
    b_term = source_potential(psi, pot, unit, hbar)
    if np.any(unit.xi_grad != 0.0):
        g_term = source_unit_gradient(psi, unit, pot, hbar, m)
    else:
        g_term = np.zeros(psi.grid.n)
    terms = {
        "density": density,
        "density_rate": density_rate,
        "div_current": div_current,
        "current": current,
        "B": b_term,
        "G": g_term,
    }
    return budget(terms, {"density_rate": 1.0, "div_current": 1.0,
                          "B": -1.0, "G": -1.0})


# ---------------------------------------------------------------------------
# Rotor-factorised states and the separated / space-dependent equations


def rotor_field(schedule: AngleSchedule, grid: Grid1D, t: float):
    """Rotor symplectic components (a, b) at the embedded grid points."""
    pts = embed_grid(grid)
    th = np.asarray(schedule.theta.value(pts, t), dtype=float)
    ga = np.asarray(schedule.gamma.value(pts, t), dtype=float)
    om = np.asarray(schedule.omega.value(pts, t), dtype=float)
    return np.cos(th) * np.exp(1j * ga), np.sin(th) * np.exp(1j * om)


def rotor_rate_field(schedule: AngleSchedule, grid: Grid1D, t: float):
    """Chain-rule time derivative of the rotor components on the grid."""
    pts = embed_grid(grid)
    th = np.asarray(schedule.theta.value(pts, t), dtype=float)
    ga = np.asarray(schedule.gamma.value(pts, t), dtype=float)
    om = np.asarray(schedule.omega.value(pts, t), dtype=float)
    th_d = np.asarray(schedule.theta.dt(pts, t), dtype=float)
    ga_d = np.asarray(schedule.gamma.dt(pts, t), dtype=float)
    om_d = np.asarray(schedule.omega.dt(pts, t), dtype=float)
    a_t = (-th_d * np.sin(th) + 1j * ga_d * np.cos(th)) * np.exp(1j * ga)
    b_t = (th_d * np.cos(th) + 1j * om_d * np.sin(th)) * np.exp(1j * om)
    return a_t, b_t


def stationary_state(phi, E: float, gamma0: float, omega0: float, t: float,
                     hbar: float = 1.0) -> QuatField:
    """Phi * rotor(t) for the constant-phase rotor of energy parameter E."""
    phi = _as_quat(phi)
    th = E * t / hbar
    a = math.cos(th) * complex(math.cos(gamma0), math.sin(gamma0))
    b = math.sin(th) * complex(math.cos(omega0), math.sin(omega0))
    return phi.mul_quat_right(a, b)


def separation_residual(phi, schedule: AngleSchedule, pot: QuatPotential,
                        hbar: float = 1.0, m: float = 1.0,
                        samples: int = 8) -> float:
    """Max-norm residual of H Psi = -hbar theta_dot Psi over one rotor period.

    Needs a space-independent schedule with theta linear in t; the factor
    Phi then carries the whole eigenvalue problem, with eigenvalue
    -hbar * theta_dot (energy parameter E gives eigenvalue -E).
    """
    phi = _as_quat(phi)
    origin = np.zeros(3)
    th_dot = float(schedule.theta.dt(origin, 0.0))
    if th_dot == 0.0:
        period = 1.0
    else:
        period = 2.0 * math.pi / abs(th_dot)
    worst = 0.0
    for k in range(samples):
        t = period * k / samples
        th, ga, om = (float(v) for v in schedule.angles(origin, t))
        a = math.cos(th) * complex(math.cos(ga), math.sin(ga))
        b = math.sin(th) * complex(math.cos(om), math.sin(om))
        psi = phi.mul_quat_right(a, b)
        h_psi = apply_hamiltonian(psi, pot, hbar, m)
        residual = h_psi + psi.scale(hbar * th_dot)
        worst = max(worst, residual.abs_max())
    return worst


def full_pde_residual(phi, schedule: AngleSchedule, V, t: float,
                      hbar: float = 1.0, m: float = 1.0) -> float:
    """Max-norm residual of the rotor-factorised equation with space terms.

    hbar Phi (d rotor/dt) eta + (hbar^2/2m)(lap Phi rotor
      + 2 grad Phi . grad rotor + Phi lap rotor) - V Phi rotor = 0.

    The rotor's spatial derivatives are analytic (full 3-D gradient and
    Laplacian); Phi's are grid stencils along axis 0.  The mixed term uses
    the axis-0 component of the rotor gradient and is always retained.
    """
    phi = _as_quat(phi)
    grid = phi.grid
    pts = embed_grid(grid)
    v_arr = V.values if isinstance(V, ComplexField) else np.asarray(V, dtype=complex)

    from .schedules import rotor_gradient, rotor_laplacian

    a_rot, b_rot = rotor_field(schedule, grid, t)
    a_t, b_t = rotor_rate_field(schedule, grid, t)
    ga = np.asarray(schedule.gamma.value(pts, t), dtype=float)
    om = np.asarray(schedule.omega.value(pts, t), dtype=float)
    coef_a, coef_b = rotor_gradient(schedule, pts, t)
    grad_a0 = coef_a[..., 0] * np.exp(1j * ga)
    grad_b0 = coef_b[..., 0] * np.exp(1j * om)
    lap_a_c, lap_b_c = rotor_laplacian(schedule, pts, t)
    lap_a = lap_a_c * np.exp(1j * ga)
    lap_b = lap_b_c * np.exp(1j * om)
    xi = np.asarray(schedule.xi(pts, t), dtype=float)
    eta_b = np.exp(1j * xi)

    zero = np.zeros(grid.n, dtype=complex)
    rate_term = phi.mul_quat_right(a_t, b_t).mul_quat_right(zero, eta_b).scale(hbar)
    kinetic = (laplace(phi).mul_quat_right(a_rot, b_rot)
               + grad(phi).mul_quat_right(grad_a0, grad_b0).scale(2.0)
               + phi.mul_quat_right(lap_a, lap_b)).scale(hbar**2 / (2.0 * m))
    potential_term = phi.mul_quat_right(a_rot, b_rot).mul_complex_left(v_arr)
    residual = rate_term + kinetic - potential_term
    return residual.abs_max()


def position_commutator_residual(psi, unit, hbar: float = 1.0) -> float:
    """Max norm of (x Pi - Pi x) Psi - hbar Psi eta, which vanishes analytically."""
    psi = _as_quat(psi)
    ua, ub = _unit_parts(unit, psi.grid)
    x = psi.grid.x
    momentum = generalized_momentum(psi, unit, None, hbar)
    x_psi = psi.mul_complex_left(x.astype(complex))
    commutator = momentum.mul_complex_left(x.astype(complex)) \
        - generalized_momentum(x_psi, unit, None, hbar)
    expected = psi.mul_quat_right(ua, ub).scale(hbar)
    return (commutator - expected).abs_max()


def rotor_energy_for_level(mu: float, laplace_eigenvalue: float = 0.0,
                           hbar: float = 1.0, m: float = 1.0) -> float:
    """Rotor energy parameter solving the factorised equation for a level mu.

    For H Phi = mu Phi and a rotor with Laplacian eigenvalue constant
    kappa (lap rotor = -kappa rotor), closure requires
    -hbar theta_dot = mu + hbar^2 kappa / (2m); theta = E t / hbar gives
    E = -(mu + hbar^2 kappa / 2m).
    """
    return -(mu + hbar**2 * laplace_eigenvalue / (2.0 * m))
