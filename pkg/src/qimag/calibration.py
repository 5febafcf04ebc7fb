"""Seeded band-limited test fields and measured truncation constants.

Random inputs for identity checks are finite Fourier sums so that their
analytic derivatives are known and second-order truncation bounds are
meaningful.  Tolerances of grid identities are stated as
10 * C * dx^2 with C measured on a fixed calibration configuration, never
guessed; the factor 10 absorbs draw-to-draw variation at equal band and
amplitude.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .grid import ComplexField, DIRICHLET, Grid1D, PERIODIC, QuatField

__all__ = [
    "BandLimited",
    "random_band_limited",
    "random_quat_band_limited",
    "laplacian_constant",
    "grid_tolerance",
]

DEFAULT_MODES = 3
SAFETY = 10.0


@dataclass(frozen=True)
class BandLimited:
    """A complex band-limited function sampled on a grid with exact derivatives."""

    grid: Grid1D
    values: np.ndarray
    d1: np.ndarray
    d2: np.ndarray

    @property
    def field(self) -> ComplexField:
        return ComplexField(self.grid, self.values)


def _mode_basis(grid: Grid1D, mode: int):
    """(value, first, second derivative) arrays for one real mode pair."""
    x = grid.x
    if grid.boundary == PERIODIC:
        k = 2.0 * np.pi * mode / grid.length
        return (np.exp(1j * k * x), 1j * k * np.exp(1j * k * x),
                -(k**2) * np.exp(1j * k * x))
    if grid.boundary == DIRICHLET:
        # box modes vanish on the ghost walls at origin - dx and origin + n dx
        k = np.pi * mode / grid.box_length
        s = x - (grid.origin - grid.dx)
        return (np.sin(k * s).astype(complex), (k * np.cos(k * s)).astype(complex),
                (-(k**2) * np.sin(k * s)).astype(complex))
    raise PreconditionError(f"unknown boundary {grid.boundary!r}")


def random_band_limited(grid: Grid1D, rng: np.random.Generator,
                        modes: int = DEFAULT_MODES) -> BandLimited:
    """Seeded random smooth field, normalised to unit max amplitude."""
    values = np.zeros(grid.n, dtype=complex)
    d1 = np.zeros(grid.n, dtype=complex)
    d2 = np.zeros(grid.n, dtype=complex)
    for mode in range(1, modes + 1):
        coeff = (rng.normal() + 1j * rng.normal()) / mode
        base, b1, b2 = _mode_basis(grid, mode)
        values += coeff * base
        d1 += coeff * b1
        d2 += coeff * b2
        if grid.boundary == PERIODIC:
            coeff2 = (rng.normal() + 1j * rng.normal()) / mode
            values += coeff2 * np.conj(base)
            d1 += coeff2 * np.conj(b1)
            d2 += coeff2 * np.conj(b2)
    scale = float(np.max(np.abs(values)))
    if scale == 0.0:
        scale = 1.0
    return BandLimited(grid, values / scale, d1 / scale, d2 / scale)


def random_quat_band_limited(grid: Grid1D, rng: np.random.Generator,
                             modes: int = DEFAULT_MODES) -> QuatField:
    """Seeded random smooth quaternion field (two independent complex parts)."""
    fa = random_band_limited(grid, rng, modes)
    fb = random_band_limited(grid, rng, modes)
    return QuatField(grid, fa.values, fb.values)


def laplacian_constant(grid: Grid1D, modes: int = DEFAULT_MODES) -> float:
    """Measured truncation constant of the compact Laplacian on the top mode.

    Returns C with max |laplace(f) - f''| = C * dx^2 for the highest mode
    of the band at unit amplitude, the worst case of the calibration family.
    """
    from .grid import laplace

    base, _, exact = _mode_basis(grid, modes)
    approx = laplace(ComplexField(grid, base)).values
    return float(np.max(np.abs(approx - exact))) / grid.dx**2


def grid_tolerance(grid: Grid1D, constant: float, safety: float = SAFETY) -> float:
    """Truncation-aware tolerance safety * C * dx^2."""
    return safety * constant * grid.dx**2
