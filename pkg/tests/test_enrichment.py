import numpy as np
import pytest

from sgfem1d.coefficient import constant, piecewise
from sgfem1d.enrichment import (heaviside, heaviside_space, interface_space, modify, patch_interpolant,
                                polynomial_space, power_function, singular_space)
from sgfem1d.mesh import patch, uniform_mesh
from sgfem1d.quadrature import gauss_legendre

MESH = uniform_mesh(10)
H = MESH.h


def test_interpolant_of_shifted_square():
    p = patch(MESH, 3)
    f = polynomial_space(p, 2).functions[1]
    I = patch_interpolant(f, p)
    x = np.linspace(0.3, 0.4, 11)
    assert np.allclose(I.eval(x)[0], H * (x - 0.3), atol=1e-16)


def test_interpolant_reproduces_linears():
    p = patch(MESH, 6)
    f = polynomial_space(p, 1).functions[0]
    x = np.random.default_rng(1).uniform(*p.interval, 50)
    assert np.allclose(patch_interpolant(f, p).eval(x)[0], f.eval(x)[0], atol=1e-16)


def test_interpolant_of_power_at_midpoint():
    p = patch(MESH, 1)
    I = patch_interpolant(power_function(0.75), p)
    assert I.eval(0.05)[0] == pytest.approx((0.0 + 0.1**0.75) / 2, rel=1e-15)


def test_modify_quadratic_space():
    p = patch(MESH, 3)
    mod = modify(polynomial_space(p, 2))
    assert mod.n == 1 and mod.dropped == 1
    assert mod.functions[0].eval(0.35)[0] == pytest.approx(-H * H / 4, rel=1e-14)


def test_polynomial_space():
    p = patch(MESH, 3)
    sp = polynomial_space(p, 2)
    assert sp.n == 2
    phi2 = sp.functions[1]
    assert phi2.eval(0.3)[0] == 0.0
    assert phi2.eval(0.4)[0] == pytest.approx(H * H, rel=1e-14)
    assert phi2.eval(0.4)[1] == pytest.approx(2 * H, rel=1e-14)
    assert polynomial_space(p, 0).n == 0
    with pytest.raises(ValueError):
        polynomial_space(p, -1)


def test_interface_space_constant_coefficient():
    p = patch(MESH, 4)
    f = interface_space(p, constant(1.0)).functions[0]
    x = np.linspace(0.3, 0.5, 9)
    assert np.allclose(f.eval(x)[0], x - 0.3, atol=1e-16)
    assert modify(interface_space(p, constant(2.5))).n == 0


def test_interface_space_kink():
    b = 0.55
    a = piecewise([b], [0.5, 1.0])
    p = patch(MESH, 5)
    f = interface_space(p, a).functions[0]
    assert f.breakpoints == (b,)
    assert f.eval(b - 1e-9)[1] == 2.0 and f.eval(b + 1e-9)[1] == 1.0
    assert f.eval(b - 1e-12)[0] == pytest.approx(f.eval(b)[0], abs=1e-11)
    # closed form of the running integral against 64 Gauss points on [x_4, b]
    t, w = gauss_legendre(64)
    lo = 0.4
    gauss = 0.5 * (b - lo) * np.dot(w, 1.0 / a(0.5 * (b - lo) * t + 0.5 * (b + lo)))
    assert abs(f.eval(b)[0] - gauss) <= 1e-14
    assert f.eval(b)[0] == pytest.approx(2 * (b - lo), rel=1e-15)


def test_interface_space_rejects_smooth_coefficient():
    from sgfem1d.coefficient import CoefficientFn

    smooth = CoefficientFn(func=lambda x: 1 + np.asarray(x), bounds=(1.0, 2.0))
    with pytest.raises(ValueError):
        interface_space(patch(MESH, 2), smooth)


def test_singular_space():
    p = patch(MESH, 0)
    sp = singular_space(p, 0.6)
    f = sp.functions[1]
    assert f.eval(H)[0] == pytest.approx(H**0.6, rel=1e-15)
    assert f.eval(H / 2)[1] == pytest.approx(0.6 * (H / 2) ** -0.4, rel=1e-15)
    assert 0.0 in f.breakpoints
    for bad in (1.0, 0.5, 1.5, 2.0):
        with pytest.raises(ValueError):
            singular_space(p, bad)


def test_heaviside():
    c = 0.537
    f = heaviside(c)
    assert f.eval(c - H / 4)[0] == 1.0 and f.eval(c + H / 4)[0] == -1.0
    assert f.eval(c)[0] == -1.0
    with pytest.raises(ValueError):
        heaviside_space(patch(MESH, 5), 0.5)


def test_heaviside_modified_support():
    c = 0.537  # inside element 6 = [x_5, x_6]
    mod_m = modify(heaviside_space(patch(MESH, 5), c))
    assert mod_m.n == 1 and mod_m.dropped == 1
    phi = mod_m.functions[0]
    assert phi.support == (6,)
    x = np.linspace(0.41, 0.49, 9)  # element 5, to the left of the crack element
    assert np.all(phi.eval(x)[0] == 0.0)
    assert modify(heaviside_space(patch(MESH, 3), c)).n == 0


def _catalog():
    c = 0.537
    a = piecewise([0.55], [0.5, 1.0])
    out = []
    for i in (4, 5, 6):
        out.append(("quadratic", modify(polynomial_space(patch(MESH, i), 2))))
        out.append(("interface", modify(interface_space(patch(MESH, i), a))))
        out.append(("heaviside", modify(heaviside_space(patch(MESH, i), c))))
    for i in (0, 1, 2):
        out.append(("singular", modify(singular_space(patch(MESH, i), 0.75))))
    return out


@pytest.mark.parametrize("name,space", _catalog())
def test_interpolant_kill(name, space):
    for f in space.functions:
        scale = max(abs(f.base.eval(np.array(space.patch.coords))[0]).max(), 1e-300)
        for v in space.patch.coords:
            assert abs(f.eval(v)[0]) <= 1e-14 * max(scale, 1.0)


@pytest.mark.parametrize("builder", [
    lambda p: polynomial_space(p, 2),
    lambda p: interface_space(p, piecewise([0.55], [0.5, 1.0])),
    lambda p: heaviside_space(p, 0.537),
])
def test_shared_restriction(builder):
    left, right = modify(builder(patch(MESH, 5))), modify(builder(patch(MESH, 6)))
    fl, fr = left.functions[-1], right.functions[-1]
    x = 0.5 + H * (np.arange(32) + 0.5) / 32
    vl, vr = fl.eval(x)[0], fr.eval(x)[0]
    assert np.allclose(vl, vr, rtol=1e-13, atol=1e-13 * np.abs(vl).max())


@pytest.mark.parametrize("name,space", _catalog())
def test_derivative_consistency(name, space):
    step = 1e-6 * H
    lo, hi = space.patch.interval
    x = np.linspace(lo, hi, 41)[1:-1]
    for f in space.functions:
        brk = np.array(sorted(set(f.breakpoints) | set(space.patch.coords)))
        xs = x[np.min(np.abs(x[:, None] - brk[None, :]), axis=1) > 1e-3]
        fd = (f.eval(xs + step)[0] - f.eval(xs - step)[0]) / (2 * step)
        d = f.eval(xs)[1]
        assert np.allclose(fd, d, rtol=1e-6, atol=1e-6 * np.abs(d).max())
