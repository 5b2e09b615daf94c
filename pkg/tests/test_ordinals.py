import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from morass_forcing.errors import RejectedInput
from morass_forcing.ordinals import (OrderMap, compose, critical_point, image, preimage, pullback,
                                     restrict, transport)

f0 = OrderMap(1, 2, (1,))
f1 = OrderMap(2, 4, (2, 3))


def all_maps(src, dst):
    for vals in itertools.combinations(range(dst), src):
        yield OrderMap(src, dst, vals)


@st.composite
def order_maps(draw, max_bound=6):
    dst = draw(st.integers(0, max_bound))
    src = draw(st.integers(0, dst))
    vals = sorted(draw(st.sets(st.integers(0, max(dst - 1, 0)), min_size=src, max_size=src))) if dst else []
    return OrderMap(src, dst, tuple(vals))


@st.composite
def map_and_graph(draw):
    f = draw(order_maps())
    n = f.src_bound
    if n == 0:
        return f, {}
    pts = st.integers(0, n - 1)
    g = draw(st.dictionaries(st.tuples(pts, pts), st.integers(0, 9), max_size=6))
    return f, g


def test_construction_rejects_non_increasing():
    with pytest.raises(RejectedInput):
        OrderMap(2, 4, (2, 1))
    with pytest.raises(RejectedInput):
        OrderMap(2, 3, (1, 3))
    with pytest.raises(RejectedInput):
        OrderMap(2, 4, (1,))


def test_compose_examples():
    idm = OrderMap.identity(4)
    g = OrderMap(1, 4, (1,))
    assert compose(idm, g) == g
    # f1 after f0: 0 -> f0(0) = 1 -> f1(1) = 3
    assert compose(f1, f0) == OrderMap(1, 4, (3,))
    with pytest.raises(RejectedInput):
        compose(f0, f1)


def test_transport_examples():
    p = {(1, 0): 5}
    assert transport(OrderMap.identity(2), p) == p
    assert transport(f1, p) == {(3, 2): 5}
    with pytest.raises(RejectedInput):
        transport(f0, {(2, 0): 1})


def test_pullback_examples():
    p = {(3, 1): 7, (1, 0): 2}
    assert pullback(OrderMap.identity(2, 4), p) == {(1, 0): 2}
    assert pullback(f1, {(3, 1): 7}) == {}
    assert pullback(f1, {(3, 2): 7}) == {(1, 0): 7}


def test_restrict_examples():
    assert restrict(f1, 2) == f1
    assert restrict(f1, 1) == OrderMap(1, 4, (2,))
    with pytest.raises(RejectedInput):
        restrict(f1, 3)


def test_critical_point_examples():
    assert critical_point(OrderMap.identity(4)) is None
    assert critical_point(f0) == 0
    assert critical_point(OrderMap(2, 3, (0, 2))) == 1


def test_image_preimage():
    assert image(f1, [0, 1]) == {2, 3}
    assert preimage(f1, [0, 3]) == {1}
    with pytest.raises(RejectedInput):
        image(f1, [2])


def test_compose_associative_exhaustive():
    bounds = range(5)
    for a, b, c, d in itertools.product(bounds, repeat=4):
        if not a <= b <= c <= d:
            continue
        for h in all_maps(a, b):
            for g in all_maps(b, c):
                for f in all_maps(c, d):
                    assert compose(f, compose(g, h)) == compose(compose(f, g), h)


@given(map_and_graph())
def test_pullback_inverts_transport(fg):
    f, p = fg
    assert pullback(f, transport(f, p)) == p


@given(map_and_graph())
def test_transport_preserves_entry_count(fg):
    f, p = fg
    assert len(transport(f, p)) == len(p)


@given(order_maps(), st.dictionaries(st.tuples(st.integers(0, 6), st.integers(0, 6)),
                                     st.integers(0, 3), max_size=8))
def test_pullback_never_grows(f, p):
    assert len(pullback(f, p)) <= len(p)


@given(order_maps())
def test_restrict_then_compose_with_identity(f):
    assert compose(OrderMap.identity(f.dst_bound), f) == f
    assert compose(f, OrderMap.identity(f.src_bound)) == f
    assert restrict(f, f.src_bound) == f
