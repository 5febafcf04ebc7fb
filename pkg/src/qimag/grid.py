"""Uniform 1-D grid with complex and quaternion-valued fields.

Second-order central stencils throughout.  Periodic grids wrap; Dirichlet
grids see zero ghost values one spacing outside both ends (hard walls at
origin - dx and origin + n*dx), which makes the discrete Laplacian the
standard symmetric tridiagonal matrix whose eigenvectors are sampled box
sines.  Fields are treated as immutable after construction; operators
return new fields.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import DomainError, PreconditionError

PERIODIC = "periodic"
DIRICHLET = "dirichlet"

__all__ = [
    "Grid1D",
    "ComplexField",
    "QuatField",
    "grad",
    "laplace",
    "integrate",
    "box_eigenstates",
    "field_to_csv",
]


@dataclass(frozen=True)
class Grid1D:
    """n equally spaced points x_i = origin + i*dx with a boundary rule."""

    n: int
    dx: float
    origin: float = 0.0
    boundary: str = PERIODIC

    def __post_init__(self):
        if self.n < 8:
            raise DomainError(f"grid needs at least 8 points, got {self.n}")
        if not (self.dx > 0.0 and np.isfinite(self.dx)):
            raise DomainError(f"grid spacing must be positive, got {self.dx}")
        if self.boundary not in (PERIODIC, DIRICHLET):
            raise DomainError(f"unknown boundary rule {self.boundary!r}")

    @property
    def x(self) -> np.ndarray:
        return self.origin + self.dx * np.arange(self.n)

    @property
    def length(self) -> float:
        """Domain length n*dx (periodic period; Dirichlet box is (n+1)*dx wall to wall)."""
        return self.n * self.dx

    @property
    def box_length(self) -> float:
        """Wall-to-wall length of the Dirichlet box."""
        return (self.n + 1) * self.dx


def _shift(values: np.ndarray, grid: Grid1D, offset: int) -> np.ndarray:
    """values[i + offset] with the grid's boundary rule applied."""
    if grid.boundary == PERIODIC:
        return np.roll(values, -offset)
    out = np.zeros_like(values)
    if offset > 0:
        out[:-offset] = values[offset:]
    elif offset < 0:
        out[-offset:] = values[:offset]
    else:
        out[:] = values
    return out


def _grad_array(values: np.ndarray, grid: Grid1D) -> np.ndarray:
    return (_shift(values, grid, 1) - _shift(values, grid, -1)) / (2.0 * grid.dx)


def _laplace_array(values: np.ndarray, grid: Grid1D) -> np.ndarray:
    return (_shift(values, grid, 1) - 2.0 * values + _shift(values, grid, -1)) / grid.dx**2


@dataclass(frozen=True)
class ComplexField:
    """One complex sample per grid point."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.complex128)
        if values.shape != (self.grid.n,):
            raise PreconditionError(
                f"field shape {values.shape} does not match grid n={self.grid.n}")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid: Grid1D, fn) -> "ComplexField":
        return cls(grid, np.asarray(fn(grid.x), dtype=np.complex128))

    @classmethod
    def zeros(cls, grid: Grid1D) -> "ComplexField":
        return cls(grid, np.zeros(grid.n, dtype=np.complex128))

    def __add__(self, other: "ComplexField") -> "ComplexField":
        _check_same_grid(self, other)
        return ComplexField(self.grid, self.values + other.values)

    def __sub__(self, other: "ComplexField") -> "ComplexField":
        _check_same_grid(self, other)
        return ComplexField(self.grid, self.values - other.values)

    def __mul__(self, factor) -> "ComplexField":
        return ComplexField(self.grid, self.values * factor)

    __rmul__ = __mul__

    def conj(self) -> "ComplexField":
        return ComplexField(self.grid, np.conj(self.values))

    def abs_max(self) -> float:
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True)
class QuatField:
    """Quaternion samples stored as the two complex components of a + b*j."""

    grid: Grid1D
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=np.complex128)
        b = np.asarray(self.b, dtype=np.complex128)
        if a.shape != (self.grid.n,) or b.shape != (self.grid.n,):
            raise PreconditionError("quaternion field components must match the grid")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def zeros(cls, grid: Grid1D) -> "QuatField":
        z = np.zeros(grid.n, dtype=np.complex128)
        return cls(grid, z, z.copy())

    @classmethod
    def from_complex(cls, f: ComplexField) -> "QuatField":
        return cls(f.grid, f.values.copy(), np.zeros(f.grid.n, dtype=np.complex128))

    @classmethod
    def from_components(cls, grid: Grid1D, w, x, y, z) -> "QuatField":
        return cls(grid, np.asarray(w) + 1j * np.asarray(x),
                   np.asarray(y) + 1j * np.asarray(z))

    def components(self):
        return self.a.real, self.a.imag, self.b.real, self.b.imag

    def __add__(self, other: "QuatField") -> "QuatField":
        _check_same_grid(self, other)
        return QuatField(self.grid, self.a + other.a, self.b + other.b)

    def __sub__(self, other: "QuatField") -> "QuatField":
        _check_same_grid(self, other)
        return QuatField(self.grid, self.a - other.a, self.b - other.b)

    def scale(self, s: float) -> "QuatField":
        return QuatField(self.grid, self.a * s, self.b * s)

    def mul_complex_left(self, c) -> "QuatField":
        """c * q for complex c (scalar or per-point array)."""
        c = np.asarray(c, dtype=np.complex128)
        return QuatField(self.grid, c * self.a, c * self.b)

    def mul_complex_right(self, c) -> "QuatField":
        """q * c for complex c; the b component picks up conj(c)."""
        c = np.asarray(c, dtype=np.complex128)
        return QuatField(self.grid, self.a * c, self.b * np.conj(c))

    def mul_quat_right(self, c, d) -> "QuatField":
        """q * (c + d*j) pointwise; c, d complex scalars or arrays."""
        c = np.asarray(c, dtype=np.complex128)
        d = np.asarray(d, dtype=np.complex128)
        return QuatField(self.grid,
                         self.a * c - self.b * np.conj(d),
                         self.a * d + self.b * np.conj(c))

    def mul_quat_left(self, c, d) -> "QuatField":
        """(c + d*j) * q pointwise."""
        c = np.asarray(c, dtype=np.complex128)
        d = np.asarray(d, dtype=np.complex128)
        return QuatField(self.grid,
                         c * self.a - d * np.conj(self.b),
                         c * self.b + d * np.conj(self.a))

    def mul(self, other: "QuatField") -> "QuatField":
        _check_same_grid(self, other)
        return self.mul_quat_right(other.a, other.b)

    def conj(self) -> "QuatField":
        return QuatField(self.grid, np.conj(self.a), -self.b)

    def norm_sq(self) -> np.ndarray:
        return (self.a * np.conj(self.a) + self.b * np.conj(self.b)).real

    def scalar_part(self) -> np.ndarray:
        return self.a.real

    def imag_magnitude(self) -> np.ndarray:
        """Pointwise magnitude of the non-scalar (i, j, k) part."""
        return np.sqrt(np.maximum(self.norm_sq() - self.a.real**2, 0.0))

    def abs_max(self) -> float:
        return float(np.sqrt(np.max(self.norm_sq())))


def _check_same_grid(f, g):
    if f.grid != g.grid:
        raise PreconditionError("fields live on different grids")


def grad(f):
    """Second-order central first derivative with the grid's boundary rule."""
    if isinstance(f, ComplexField):
        return ComplexField(f.grid, _grad_array(f.values, f.grid))
    if isinstance(f, QuatField):
        return QuatField(f.grid, _grad_array(f.a, f.grid), _grad_array(f.b, f.grid))
    raise PreconditionError(f"grad expects a field, got {type(f).__name__}")


def laplace(f):
    """Second-order compact second derivative with the grid's boundary rule."""
    if isinstance(f, ComplexField):
        return ComplexField(f.grid, _laplace_array(f.values, f.grid))
    if isinstance(f, QuatField):
        return QuatField(f.grid, _laplace_array(f.a, f.grid), _laplace_array(f.b, f.grid))
    raise PreconditionError(f"laplace expects a field, got {type(f).__name__}")


def integrate(values, grid: Grid1D) -> float:
    """Integral of a real sampled function over the domain.

    dx * sum(values): the plain Riemann sum on periodic grids, and the
    trapezoidal rule over the closed box on Dirichlet grids once the zero
    wall values are included.  np.sum uses pairwise reduction, so the
    result is identical regardless of how callers parallelise around it.
    """
    values = np.asarray(values)
    if values.shape != (grid.n,):
        raise PreconditionError("integrand does not match the grid")
    return float(grid.dx * np.sum(values))


def box_eigenstates(grid: Grid1D, potential=None, hbar: float = 1.0, m: float = 1.0,
                    levels: int = 4):
    """Lowest eigenpairs of -hbar^2/(2m) d2/dx2 + V on a Dirichlet grid.

    Dense symmetric tridiagonal diagonalisation; returns (energies, states)
    with states normalised so integrate(|phi|^2) = 1.  V must be real for
    the symmetric solver.
    """
    if grid.boundary != DIRICHLET:
        raise PreconditionError("box eigenstates need a Dirichlet grid")
    if potential is None:
        v = np.zeros(grid.n)
    else:
        v = np.asarray(potential, dtype=float)
        if v.shape != (grid.n,):
            raise PreconditionError("potential does not match the grid")
    kin = hbar**2 / (2.0 * m * grid.dx**2)
    diag = 2.0 * kin + v
    off = -kin * np.ones(grid.n - 1)
    levels = min(levels, grid.n)
    energies, vectors = eigh_tridiagonal(diag, off, select="i",
                                         select_range=(0, levels - 1))
    states = []
    for idx in range(levels):
        phi = vectors[:, idx].astype(np.complex128)
        nrm = integrate(np.abs(phi) ** 2, grid)
        phi = phi / np.sqrt(nrm)
        if phi[np.argmax(np.abs(phi))].real < 0:
            phi = -phi
        states.append(ComplexField(grid, phi))
    return energies, states


def field_to_csv(f, path) -> None:
    """Snapshot: one row per grid point; x then (re, im) or (w, x, y, z)."""
    xs = f.grid.x
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if isinstance(f, ComplexField):
            fh.write("x,re,im\n")
            for xi, v in zip(xs, f.values):
                fh.write(f"{xi:.17g},{v.real:.17g},{v.imag:.17g}\n")
        elif isinstance(f, QuatField):
            fh.write("x,w,i,j,k\n")
            w, x, y, z = f.components()
            for xi, wi, ii, ji, ki in zip(xs, w, x, y, z):
                fh.write(f"{xi:.17g},{wi:.17g},{ii:.17g},{ji:.17g},{ki:.17g}\n")
        else:
            raise PreconditionError(f"cannot serialise {type(f).__name__}")
