import math

import numpy as np
import pytest

from qimag.grid import ComplexField, Grid1D


def read_timeseries(path):
    """Parse a run CSV: skip '#' comments, return dict of column arrays."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if not ln.startswith("#")]
    header = lines[0].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    return {name: data[:, idx] for idx, name in enumerate(header)}


def fixed_smooth_field(grid: Grid1D) -> ComplexField:
    """Deterministic band-limited field, same function on any resolution."""
    x = grid.x
    if grid.boundary == "periodic":
        k = 2.0 * math.pi / grid.length
        values = (0.8 * np.exp(1j * k * x) + (0.3 - 0.2j) * np.exp(-2j * k * x)
                  + 0.15 * np.exp(3j * k * x))
    else:
        s = x - (grid.origin - grid.dx)
        k = math.pi / grid.box_length
        values = (0.9 * np.sin(k * s) + (0.4 + 0.3j) * np.sin(2 * k * s)
                  + 0.1j * np.sin(3 * k * s))
    return ComplexField(grid, values.astype(complex))


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
