import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from flagdyn import base_dynamics as bd
from flagdyn.cocycle_engine import (
    CircleMap,
    CocycleSystem,
    ConstantField,
    FlagBundlePoint,
    SymbolTable,
    WindowMap,
    a_cocycle,
    aplus_batch,
    aplus_cocycle,
    cocycle_product,
    flow_step,
    flow_step_inv,
    gauge_perturb,
    left_singular_frames,
    product_value,
    time_reversed,
)
from flagdyn.errors import InvalidArgument
from flagdyn.flags import Flag, flag_distance
from flagdyn.lie_structure import ThetaSet
from flagdyn.matrix_decomp import polar_aplus

from conftest import BERNOULLI, ROTATION_ANGLE, shift_system

# products of these matrices are exact in binary floating point
DYADIC = np.array([[[2.0, 1.0], [0.0, 0.5]], [[1.0, 0.0], [0.5, 1.0]], [[0.5, 0.25], [0.0, 2.0]]])


def systems():
    rot_field = CircleMap(
        lambda t: np.array([[np.cos(2 * np.pi * t), -np.sin(2 * np.pi * t)], [np.sin(2 * np.pi * t), np.cos(2 * np.pi * t)]])
        @ np.diag([2.0, 0.5]),
        2,
    )
    return {
        "full_shift": (shift_system(DYADIC), bd.ShiftPoint(key=11)),
        "subshift": (CocycleSystem(bd.SubshiftFinite(((1, 1), (1, 0))), SymbolTable(DYADIC[:2])), bd.ShiftPoint(key=3)),
        "periodic": (CocycleSystem(bd.PeriodicOrbit(3), SymbolTable(DYADIC)), 1),
        "rotation": (CocycleSystem(bd.IrrationalRotation(ROTATION_ANGLE), rot_field), 0.37),
    }


def product_of(c, n, x):
    p, s = cocycle_product(c, n, x)
    return p * np.exp(s)


@pytest.mark.parametrize("name", list(systems()))
@given(n=st.integers(0, 24), m=st.integers(0, 24))
def test_multiplicative_cocycle_law(name, n, m):
    c, x = systems()[name]
    lhs = product_of(c, n + m, x)
    rhs = product_of(c, n, c.advance(x, m)) @ product_of(c, m, x)
    assert np.allclose(lhs, rhs, rtol=1e-10, atol=1e-10 * np.abs(lhs).max())


@pytest.mark.parametrize("name", list(systems()))
@given(n=st.integers(1, 24), m=st.integers(1, 24))
def test_negative_times_follow_the_law(name, n, m):
    c, x = systems()[name]
    lhs = product_of(c, -n - m, x)
    rhs = product_of(c, -n, c.advance(x, -m)) @ product_of(c, -m, x)
    assert np.allclose(lhs, rhs, rtol=1e-10, atol=1e-10 * np.abs(lhs).max())
    a, b = product_of(c, -n, x), product_of(c, n, c.advance(x, -n))
    scale = np.linalg.norm(a) * np.linalg.norm(b)
    assert np.abs(a @ b - np.eye(2)).max() <= 1e-13 * scale


def test_dyadic_products_are_exact():
    c = shift_system(DYADIC)
    x = bd.ShiftPoint(key=4)
    lhs = product_value(c, 30, x)
    rhs = product_value(c, 13, c.advance(x, 17)) @ product_value(c, 17, x)
    assert np.array_equal(lhs, rhs)


@given(st.integers(1, 40), st.integers(1, 40), st.integers(0, 10**6))
def test_additive_cocycle_law(n, m, key):
    c = shift_system(BERNOULLI)
    x = bd.ShiftPoint(key=key)
    xi = FlagBundlePoint(x, Flag.random(ThetaSet.empty(2), np.random.default_rng(key)))
    moved = xi
    for _ in range(m):
        moved = flow_step(c, moved)
    lhs = a_cocycle(c, n + m, xi)
    rhs = a_cocycle(c, n, moved) + a_cocycle(c, m, xi)
    assert np.allclose(lhs, rhs, atol=1e-8)


def test_time_reversal_matches_negative_products():
    c = shift_system(BERNOULLI)
    x = bd.ShiftPoint(key=2)
    r = time_reversed(c)
    assert np.allclose(product_value(r, 7, x), product_value(c, -7, x))
    assert time_reversed(r).field is c.field
    xi = FlagBundlePoint(x, Flag.random(ThetaSet.empty(2), np.random.default_rng(0)))
    back = flow_step_inv(c, flow_step(c, xi))
    assert back.x == x and flag_distance(back.b, xi.b) < 1e-12


@given(st.integers(1, 12), st.integers(0, 10**6))
def test_aplus_matches_direct_svd(n, key):
    c = shift_system(BERNOULLI)
    x = bd.ShiftPoint(key=key)
    direct = np.asarray(polar_aplus(product_value(c, n, x)))
    assert np.allclose(np.asarray(aplus_cocycle(c, n, x)), direct, atol=1e-9)


def test_long_products_stay_finite_and_subadditive():
    c = shift_system(BERNOULLI)
    xs = bd.sample(c.base, bd.ProductMeasure(), 8, seed=0)
    full = aplus_batch(c, xs, 400)
    assert np.all(np.isfinite(full))
    first = aplus_batch(c, xs, 200)
    second = aplus_batch(c, xs, 200, start=200)
    # the top singular value is submultiplicative
    assert np.all(full[:, 0] <= first[:, 0] + second[:, 0] + 1e-9)
    assert np.allclose(full.sum(axis=1), 0.0, atol=1e-8)


def test_left_singular_frames_of_a_constant_matrix():
    g = np.array([[2.0, 1.0], [0.0, 0.5]])
    c = CocycleSystem(bd.PeriodicOrbit(1), SymbolTable(g[None]))
    left, logsv, conv = left_singular_frames(c, [0], 60)
    assert conv
    top = left[0][:, 0]
    assert abs(abs(top[0]) - 1.0) < 1e-12


def test_gauge_by_identity_is_trivial_and_window_fields_work():
    c = shift_system(BERNOULLI)
    x = bd.ShiftPoint(key=5)
    same = gauge_perturb(c, ConstantField(np.eye(2)))
    assert np.allclose(same.matrices(x, -3, 10), c.matrices(x, -3, 10))
    w = WindowMap(lambda key: BERNOULLI[key[0]] @ BERNOULLI[key[1]], 0, 1, 2)
    cw = CocycleSystem(c.base, w)
    syms = bd.symbols(c.base, x, 0, 6)
    got = cw.matrices(x, 0, 5)
    for i in range(5):
        assert np.allclose(got[i], BERNOULLI[syms[i]] @ BERNOULLI[syms[i + 1]])


def test_system_validation():
    with pytest.raises(InvalidArgument):
        CocycleSystem(bd.PeriodicOrbit(1), SymbolTable(BERNOULLI[:1] * 2), variant="sl")
    with pytest.raises(InvalidArgument):
        CocycleSystem(bd.PeriodicOrbit(1), SymbolTable(BERNOULLI[:1]), variant="su")
    c = CocycleSystem(bd.PeriodicOrbit(1), SymbolTable(BERNOULLI[:1]), variant="sl")
    assert np.isclose(sum(aplus_cocycle(c, 5, 0).entries), 0.0)
    with pytest.raises(InvalidArgument):
        a_cocycle(c, 3, FlagBundlePoint(0, Flag((1,), np.eye(3))))
