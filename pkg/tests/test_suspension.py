import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cartanlab.catalog import EXAMPLE_A, EXAMPLE_B, cat_action, example_action
from cartanlab.lyapunov import kernel_element
from cartanlab.suspension import (
    ConditioningWarning,
    SuspensionSpec,
    act,
    dilation_residual,
    fibre_distance,
    interpolation_matrix,
    reduce,
)


SPEC = SuspensionSpec.from_action(example_action())


@pytest.fixture
def spec():
    return SPEC


def test_reconstructs_generators(spec):
    assert np.max(np.abs(interpolation_matrix(spec, (1, 0)) - EXAMPLE_A.to_numpy())) < 1e-8
    assert np.max(np.abs(interpolation_matrix(spec, (0, 1)) - EXAMPLE_B.to_numpy())) < 1e-8
    assert np.max(np.abs(interpolation_matrix(spec, (2, -1)) - (EXAMPLE_A @ EXAMPLE_A @ EXAMPLE_B.inverse()).to_numpy())) < 1e-7


def test_composition_law(spec):
    rng = np.random.default_rng(11)
    for _ in range(100):
        s, t = rng.uniform(-2, 2, 2), rng.uniform(-2, 2, 2)
        lhs = interpolation_matrix(spec, s + t)
        rhs = interpolation_matrix(spec, s) @ interpolation_matrix(spec, t)
        assert np.max(np.abs(lhs - rhs)) < 1e-9 * max(1.0, np.max(np.abs(lhs)))


def test_dilation_on_grid_and_kernels(spec):
    rng = np.random.default_rng(5)
    grid = [np.array([a, b]) for a in np.linspace(-1, 1, 10) for b in np.linspace(-1, 1, 10)]
    kernels = [kernel_element(f) for f in spec.base.family.functionals]
    worst = 0.0
    for j in range(3):
        for s in grid + kernels:
            p = reduce(spec, rng.uniform(0, 1, 2), rng.uniform(0, 1, 3))
            for v in (-1.0, 0.3, 1.0):
                worst = max(worst, dilation_residual(spec, s, p, j, v))
    assert worst < 1e-9


def test_kernel_direction_is_isometric(spec):
    # along ker(lambda^j) the j-th direction is moved without stretching
    for j, f in enumerate(spec.base.family.functionals):
        s = 0.7 * kernel_element(f)
        assert abs(spec.exponent_values(s)[j]) < 1e-12
        p = reduce(spec, (0.2, 0.4), (0.1, 0.2, 0.3))
        q = reduce(spec, p.t, p.x + 0.01 * spec.direction(j))
        d0 = fibre_distance(spec, p, q)
        d1 = fibre_distance(spec, act(spec, s, p), act(spec, s, q))
        assert abs(d1 - d0) < 1e-9


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.floats(-3, 3), min_size=2, max_size=2),
    st.lists(st.floats(-3, 3), min_size=3, max_size=3),
)
def test_reduce_is_idempotent_and_lands_in_unit_square(t, x):
    spec = SPEC
    p = reduce(spec, t, x)
    assert np.all((0 <= p.t) & (p.t < 1))
    q = reduce(spec, p.t, p.x)
    assert fibre_distance(spec, p, q) < 1e-9


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=2, max_size=2), st.lists(st.floats(-1, 1), min_size=2, max_size=2))
def test_action_is_a_group_action(s, u):
    spec = SPEC
    p = reduce(spec, (0.3, 0.6), (0.2, 0.5, 0.1))
    two = act(spec, u, act(spec, s, p))
    one = act(spec, np.add(s, u), p)
    assert fibre_distance(spec, two, one) < 1e-8


def test_integer_translation_acts_by_the_generator(spec):
    p = reduce(spec, (0.25, 0.5), (0.3, 0.1, 0.7))
    q = act(spec, (1, 0), p)
    # the lattice depends on t mod Z^2 only, so (1, 0) moves x by M^(1,0) = A in place
    expected = reduce(spec, p.t, interpolation_matrix(spec, (1, 0)) @ p.x)
    assert np.allclose(q.t, p.t)
    assert fibre_distance(spec, q, expected) < 1e-9


def test_conditioning_warning(spec):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        interpolation_matrix(spec, (1, 1))
        act(spec, (10, 0), reduce(spec, (0, 0), (0, 0, 0)))
    assert any(issubclass(w.category, ConditioningWarning) for w in caught)


def test_requires_rank_two_on_three_torus():
    with pytest.raises(ValueError):
        SuspensionSpec.from_action(cat_action())


def test_dilation_rejects_large_v(spec):
    with pytest.raises(ValueError):
        dilation_residual(spec, (0.1, 0.1), reduce(spec, (0, 0), (0, 0, 0)), 0, 2.0)
