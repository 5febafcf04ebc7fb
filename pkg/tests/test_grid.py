import math

import numpy as np
import pytest

from qimag.errors import DomainError, PreconditionError
from qimag.grid import (ComplexField, DIRICHLET, Grid1D, PERIODIC, QuatField,
                        box_eigenstates, field_to_csv, grad, integrate, laplace)

from conftest import fixed_smooth_field


def periodic_grid(n=256, length=2 * math.pi):
    return Grid1D(n=n, dx=length / n, boundary=PERIODIC)


def box_grid(n=64, box=math.pi):
    return Grid1D(n=n, dx=box / (n + 1), boundary=DIRICHLET)


def test_grid_validation():
    with pytest.raises(DomainError):
        Grid1D(n=4, dx=0.1)
    with pytest.raises(DomainError):
        Grid1D(n=16, dx=-0.1)
    with pytest.raises(DomainError):
        Grid1D(n=16, dx=0.1, boundary="absorbing")


def test_grad_constant_and_linear():
    g = periodic_grid()
    const = ComplexField(g, np.full(g.n, 2.2 + 0.4j))
    assert np.max(np.abs(grad(const).values)) == 0.0
    gd = box_grid()
    linear = ComplexField(gd, (3.0 * gd.x).astype(complex))
    interior = grad(linear).values[1:-1]
    assert np.max(np.abs(interior - 3.0)) <= 1e-12


def test_grad_sine_against_analytic_derivative():
    g = periodic_grid(n=256)
    k = 2.0 * math.pi * 3 / g.length
    f = ComplexField(g, np.sin(k * g.x).astype(complex))
    err = np.max(np.abs(grad(f).values - k * np.cos(k * g.x)))
    assert err <= k**3 * g.dx**2 / 6.0 * 1.1


def test_laplace_values():
    g = periodic_grid(n=256)
    const = ComplexField(g, np.full(g.n, 1.5 + 0j))
    assert np.max(np.abs(laplace(const).values)) == 0.0
    k = 2.0 * math.pi * 3 / g.length
    f = ComplexField(g, np.sin(k * g.x).astype(complex))
    err = np.max(np.abs(laplace(f).values + k**2 * np.sin(k * g.x)))
    assert err <= k**4 * g.dx**2 / 12.0 * 1.1
    gd = box_grid()
    quad = ComplexField(gd, (gd.x**2).astype(complex))
    assert np.max(np.abs(laplace(quad).values[1:-1] - 2.0)) <= 1e-10


def test_laplace_convergence_order():
    errs = []
    for n in (128, 256):
        g = periodic_grid(n=n)
        k = 2.0 * math.pi * 3 / g.length
        f = ComplexField(g, np.sin(k * g.x).astype(complex))
        errs.append(np.max(np.abs(laplace(f).values + k**2 * np.sin(k * g.x))))
    assert 3.5 <= errs[0] / errs[1] <= 4.5


def test_operators_are_linear(rng):
    g = periodic_grid()
    fa = ComplexField(g, rng.normal(size=g.n) + 1j * rng.normal(size=g.n))
    fb = ComplexField(g, rng.normal(size=g.n) + 1j * rng.normal(size=g.n))
    c1, c2 = 1.3 - 0.2j, -0.7 + 2.1j
    combo = ComplexField(g, c1 * fa.values + c2 * fb.values)
    for op in (grad, laplace):
        gap = op(combo).values - c1 * op(fa).values - c2 * op(fb).values
        assert np.max(np.abs(gap)) <= 1e-11


def test_integrate_closed_forms():
    g = periodic_grid(n=200, length=5.0)
    assert integrate(np.ones(g.n), g) == pytest.approx(5.0, abs=1e-13)
    k = 2.0 * math.pi * 4 / g.length
    assert integrate(np.sin(k * g.x) ** 2, g) == pytest.approx(2.5, abs=1e-12)


def test_box_eigenstates_normalised_and_ordered():
    g = box_grid(n=64)
    energies, states = box_eigenstates(g, levels=3)
    assert np.all(np.diff(energies) > 0)
    for phi in states:
        assert integrate(np.abs(phi.values) ** 2, g) == pytest.approx(1.0, abs=1e-12)
    # closed-form discrete spectrum of the tridiagonal operator
    for idx, e in enumerate(energies, start=1):
        k = math.pi * idx / g.box_length
        exact = (1.0 - math.cos(k * g.dx)) / g.dx**2
        assert e == pytest.approx(exact, abs=1e-11)


def test_integration_by_parts_periodic(rng):
    g = periodic_grid()
    fa = fixed_smooth_field(g)
    fb = ComplexField(g, np.roll(fa.values, 7))
    total = integrate((grad(fa).values * fb.values
                       + fa.values * grad(fb).values).real, g)
    assert abs(total) <= 1e-12


def test_grid_mismatch_raises():
    f1 = ComplexField.zeros(periodic_grid(n=64))
    f2 = ComplexField.zeros(periodic_grid(n=128))
    with pytest.raises(PreconditionError):
        f1 + f2


def test_quat_field_roundtrip(rng):
    g = periodic_grid(n=64)
    w, x, y, z = (rng.normal(size=g.n) for _ in range(4))
    f = QuatField.from_components(g, w, x, y, z)
    w2, x2, y2, z2 = f.components()
    assert np.array_equal(w, w2) and np.array_equal(x, x2)
    assert np.array_equal(y, y2) and np.array_equal(z, z2)
    # norm matches the component sum of squares
    assert np.allclose(f.norm_sq(), w**2 + x**2 + y**2 + z**2, atol=1e-14)


def test_quat_field_product_against_scalar_quaternion(rng):
    from qimag.quaternion import Quaternion

    g = periodic_grid(n=16)
    f1 = QuatField.from_components(g, *(rng.normal(size=g.n) for _ in range(4)))
    f2 = QuatField.from_components(g, *(rng.normal(size=g.n) for _ in range(4)))
    prod = f1.mul(f2)
    pw, px, py, pz = prod.components()
    for i in range(g.n):
        q1 = Quaternion(*(c[i] for c in f1.components()))
        q2 = Quaternion(*(c[i] for c in f2.components()))
        expected = q1 * q2
        assert abs(pw[i] - expected.w) <= 1e-12
        assert abs(px[i] - expected.x) <= 1e-12
        assert abs(py[i] - expected.y) <= 1e-12
        assert abs(pz[i] - expected.z) <= 1e-12


def test_field_csv_snapshot(tmp_path):
    g = periodic_grid(n=16)
    f = ComplexField(g, np.arange(16, dtype=complex) * (1 + 2j))
    path = tmp_path / "snap.csv"
    field_to_csv(f, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "x,re,im"
    assert len(lines) == 17
    qf = QuatField.from_complex(f)
    qpath = tmp_path / "qsnap.csv"
    field_to_csv(qf, qpath)
    assert qpath.read_text().splitlines()[0] == "x,w,i,j,k"
