import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lipopt.geometry import (
    BoxDomain, as_point, diameter, distance, inradius, make_rng, max_distance_from, uniform_sample,
)

coords = st.floats(-100, 100, allow_nan=False)


@st.composite
def boxes(draw, max_dim=5):
    d = draw(st.integers(1, max_dim))
    lo = np.array(draw(st.lists(coords, min_size=d, max_size=d)))
    w = np.array(draw(st.lists(st.floats(1e-3, 50), min_size=d, max_size=d)))
    return BoxDomain(lo, lo + w)


def test_box_rejects_empty_or_malformed():
    with pytest.raises(ValueError):
        BoxDomain(np.array([0.0]), np.array([0.0]))
    with pytest.raises(ValueError):
        BoxDomain(np.array([0.0, 0.0]), np.array([1.0]))
    with pytest.raises(ValueError):
        BoxDomain(np.array([0.0]), np.array([np.inf]))


def test_box_bounds_are_read_only():
    b = BoxDomain.cube(0, 1, 2)
    with pytest.raises(ValueError):
        b.lower[0] = 5.0


def test_sample_inside_unit_square():
    b = BoxDomain.cube(0, 1, 2)
    x = uniform_sample(b, make_rng(0))
    assert x.shape == (2,) and b.contains(x)


def test_sample_inside_deb_domain():
    b = BoxDomain.cube(-5, 5, 5)
    xs = b.sample(make_rng(1), 1000)
    assert np.all((xs >= -5) & (xs <= 5))


def test_sample_mean_on_unit_interval():
    xs = BoxDomain.cube(0, 1, 1).sample(make_rng(2), 100_000)
    assert abs(xs.mean() - 0.5) < 0.01


def test_one_point_consumes_d_draws():
    b = BoxDomain.cube(0, 1, 3)
    r1, r2 = make_rng(7), make_rng(7)
    b.sample(r1)
    r2.random(3)
    assert r1.random() == r2.random()


def test_same_seed_same_sequence():
    b = BoxDomain.cube(-2, 3, 4)
    a = [b.sample(make_rng(11)) for _ in range(1)] + [b.sample(make_rng(11), 50)]
    c = [b.sample(make_rng(11)) for _ in range(1)] + [b.sample(make_rng(11), 50)]
    for u, v in zip(a, c):
        assert np.array_equal(u, v)


@pytest.mark.parametrize("p,q,want", [
    ((0, 0), (0, 0), 0.0), ((0, 0), (3, 4), 5.0), ((1, 1, 1, 1), (0, 0, 0, 0), 2.0),
])
def test_distance_examples(p, q, want):
    assert distance(p, q) == want


def test_distance_dimension_mismatch():
    with pytest.raises(ValueError):
        distance((0, 0), (0, 0, 0))


@pytest.mark.parametrize("box,want", [
    (BoxDomain.cube(0, 1, 2), math.sqrt(2)),
    (BoxDomain.cube(-5, 5, 4), 20.0),
    (BoxDomain.cube(0, 1, 1), 1.0),
])
def test_diameter_examples(box, want):
    assert diameter(box) == pytest.approx(want, rel=1e-15)


@pytest.mark.parametrize("box,want", [
    (BoxDomain.cube(0, 1, 2), 0.5),
    (BoxDomain(np.array([0.0, 0.0]), np.array([2.0, 4.0])), 1.0),
    (BoxDomain.cube(-5, 5, 5), 5.0),
])
def test_inradius_examples(box, want):
    assert inradius(box) == want


def test_as_point_rejects_bad_input():
    with pytest.raises(ValueError):
        as_point([np.nan, 1.0])
    with pytest.raises(ValueError):
        as_point([[1.0, 2.0]])
    with pytest.raises(ValueError):
        as_point([1.0, 2.0], dim=3)
    assert as_point(3.0).shape == (1,)


def test_max_distance_from_corner():
    b = BoxDomain.cube(0, 1, 2)
    assert max_distance_from(b, [0, 0]) == pytest.approx(math.sqrt(2))
    assert max_distance_from(b, [0.5, 0.5]) == pytest.approx(math.sqrt(2) / 2)


@given(boxes(), st.integers(0, 2**32 - 1))
def test_samples_always_contained(box, seed):
    xs = box.sample(make_rng(seed), 64)
    assert all(box.contains(x) for x in xs)


@given(st.lists(st.floats(-1e3, 1e3), min_size=9, max_size=9))
def test_triangle_inequality(v):
    p, q, r = np.array(v[:3]), np.array(v[3:6]), np.array(v[6:])
    lhs = distance(p, r)
    assert lhs <= (distance(p, q) + distance(q, r)) * (1 + 1e-12) + 1e-300


@given(st.lists(st.floats(-1e3, 1e3), min_size=4, max_size=4))
def test_distance_symmetric_and_zero_on_identity(v):
    p, q = np.array(v[:2]), np.array(v[2:])
    assert distance(p, q) == distance(q, p)
    assert distance(p, p) == 0.0


@given(boxes())
def test_diameter_vs_inradius(box):
    diam, rad = diameter(box), inradius(box)
    assert diam >= 2 * rad * (1 - 1e-12)
    if box.dim == 1:
        assert diam == pytest.approx(2 * rad, rel=1e-12)
    else:
        # the diagonal is at least sqrt(d) times the shortest side, so never tight
        assert diam >= math.sqrt(box.dim) * 2 * rad * (1 - 1e-12)
