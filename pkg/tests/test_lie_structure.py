import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from flagdyn.errors import InvalidArgument
from flagdyn.lie_structure import (
    ChamberVector,
    ThetaSet,
    WeylElement,
    chamber_project,
    coset_representatives,
    dual_theta,
    fundamental_weight_eval,
    refines,
    simple_root_eval,
    theta_of,
    trace_free,
    weyl_group,
    weyl_subgroup,
)

compositions = st.lists(st.integers(1, 3), min_size=1, max_size=4)
thetas = st.lists(st.booleans(), min_size=1, max_size=5).map(lambda b: ThetaSet(tuple(b)))
perms = st.integers(2, 6).flatmap(lambda d: st.permutations(list(range(d)))).map(lambda p: WeylElement(tuple(p)))


@given(compositions)
def test_blocks_roundtrip(sizes):
    t = ThetaSet.from_blocks(sizes)
    assert t.blocks == tuple(sizes)
    assert ThetaSet.from_dims(t.dims, t.d) == t
    assert t.d == sum(sizes)


@given(thetas)
def test_dual_is_involution_and_reverses_blocks(t):
    assert dual_theta(dual_theta(t)) == t
    assert dual_theta(t).blocks == t.blocks[::-1]
    assert dual_theta(t).dims == tuple(t.d - k for k in reversed(t.dims))


@given(thetas, st.data())
def test_refines_is_a_partial_order(t, data):
    other = ThetaSet(tuple(data.draw(st.lists(st.booleans(), min_size=t.d - 1, max_size=t.d - 1))))
    assert refines(t, t)
    assert refines(ThetaSet.empty(t.d), t)
    assert refines(t, ThetaSet.full(t.d))
    if refines(t, other) and refines(other, t):
        assert t == other


@given(thetas)
def test_weyl_subgroup_order(t):
    ws = weyl_subgroup(t)
    assert len(ws) == math.prod(math.factorial(b) for b in t.blocks)
    assert len({w.perm for w in ws}) == len(ws)


@given(thetas)
def test_coset_count_is_multinomial(t):
    H = np.repeat(np.arange(len(t.blocks), 0, -1, dtype=float), t.blocks)
    cos = coset_representatives(H, t)
    expected = math.factorial(t.d) // math.prod(math.factorial(b) for b in t.blocks)
    assert len(cos) == expected
    for w, v in cos:
        assert np.allclose(np.sort(v), np.sort(H))
        assert np.allclose(v, w.inverse_act(H))
    assert len({tuple(v) for _, v in cos}) == expected


@given(perms, st.data())
def test_weyl_action_is_a_group_action(w, data):
    other = WeylElement(tuple(data.draw(st.permutations(list(range(w.d))))))
    v = np.arange(w.d, dtype=float) * 1.7 - 2.0
    assert np.allclose(w.inverse_act(w.act(v)), v)
    assert np.allclose((w * other).act(v), w.act(other.act(v)))
    assert (w * w.inverse()).is_identity()


def test_weyl_element_string_is_one_based():
    assert str(WeylElement((0, 2, 1))) == "(1 3 2)"
    assert len(weyl_group(4)) == 24
    assert WeylElement.longest(3).perm == (2, 1, 0)


def test_root_and_weight_evaluation():
    H = [3.0, 1.0, -4.0]
    assert simple_root_eval(1, H) == 2.0
    assert simple_root_eval(2, H) == 5.0
    assert fundamental_weight_eval(2, H) == 4.0
    assert fundamental_weight_eval(3, H) == 0.0
    with pytest.raises(InvalidArgument):
        simple_root_eval(3, H)
    with pytest.raises(InvalidArgument):
        fundamental_weight_eval(0, H)


def test_theta_of_merges_close_entries():
    assert theta_of([1.0, 1.0 + 1e-9, -2.0], 1e-6).blocks == (2, 1)
    assert theta_of([1.0, 0.5, -2.0], 1e-6).is_empty()
    with pytest.raises(InvalidArgument):
        theta_of([1.0, 0.0], 0.0)


@given(st.lists(st.floats(-10, 10), min_size=2, max_size=6))
def test_chamber_projection_sorts_and_trace_free_centres(v):
    c = chamber_project(v)
    assert list(c.entries) == sorted(v, reverse=True)
    assert abs(np.sum(trace_free(v))) <= 1e-9 * max(1.0, np.max(np.abs(v)))


def test_chamber_vector_validation():
    with pytest.raises(InvalidArgument):
        ChamberVector((0.0, 1.0))
    with pytest.raises(InvalidArgument):
        ChamberVector((2.0, 1.0), "sl")
    with pytest.raises(InvalidArgument):
        ChamberVector((1.0, float("nan")))
    assert ChamberVector((1.0, -1.0), "sl").d == 2
    with pytest.raises(InvalidArgument):
        ThetaSet.from_dims((2, 1), 4)
