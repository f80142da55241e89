import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sparsesampling.errors import DimensionError, ParameterError, ZeroResidual
from sparsesampling.lp_space import (
    DiscreteMeasure,
    LpExponent,
    PointSet,
    SampledFunction,
    linf_norm,
    lp_norm,
    mixed_measure_norm,
    norming_functional_apply,
    norming_kernel,
    torus_grid,
    weighted_lp_norm,
)

from conftest import random_complex, uniform_measure

P_VALUES = [1.0, 1.5, 2.0, 3.0, 4.0]


def func(values, measure=None):
    values = np.asarray(values, dtype=complex)
    return SampledFunction(values, measure or uniform_measure(len(values)))


def test_constant_function_norm():
    assert lp_norm(func([1, 1, 1, 1]), 2) == pytest.approx(1.0)


def test_two_point_norm():
    assert lp_norm(func([3, 4]), 2) == pytest.approx(math.sqrt(12.5), rel=1e-12)


@pytest.mark.parametrize("p", P_VALUES)
def test_unimodular_function_has_norm_one(p):
    grid = DiscreteMeasure.grid(1, 37)
    f = SampledFunction(np.exp(1j * grid.support.points[:, 0]), grid)
    assert lp_norm(f, p) == pytest.approx(1.0, rel=1e-12)


def test_length_mismatch_is_dimension_error():
    with pytest.raises(DimensionError):
        SampledFunction(np.ones(3), uniform_measure(4))
    with pytest.raises(DimensionError):
        weighted_lp_norm(np.ones(3), np.ones(4) / 4, 2.0)


def test_point_set_rejects_out_of_range():
    with pytest.raises(ParameterError):
        PointSet(np.array([[2 * np.pi]]))
    with pytest.raises(ParameterError):
        PointSet(np.array([[-0.1]]))


def test_measure_weights_must_sum_to_one():
    pts = PointSet(np.array([[0.0], [1.0]]))
    with pytest.raises(ParameterError):
        DiscreteMeasure(pts, np.array([0.5, 0.6]))


def test_exponent_derived_quantities():
    assert LpExponent(3).p_star == 2.0 and LpExponent(3).q_star == 2.0
    assert LpExponent(1.5).q_star == pytest.approx(3.0)
    assert math.isinf(LpExponent(1).q_star)
    with pytest.raises(ParameterError):
        LpExponent(0.5)


def test_p4_two_point_functional():
    # F_f(g) = 8.5^(-3/4) (g1 + 8 g2) / 2 for f = (1, 2)
    m = uniform_measure(2)
    f = func([1, 2], m)
    g = func([0.3 - 1j, 2j], m)
    expected = 8.5 ** -0.75 * (g.values[0] + 8 * g.values[1]) / 2
    assert norming_functional_apply(f, g, 4) == pytest.approx(expected, rel=1e-12)
    assert norming_functional_apply(f, f, 4).real == pytest.approx(8.5**0.25, rel=1e-12)


def test_p2_functional_is_normalized_inner_product(rng):
    m = uniform_measure(6)
    f, g = func(random_complex(rng, 6), m), func(random_complex(rng, 6), m)
    inner = np.sum(m.weights * g.values * np.conj(f.values))
    assert norming_functional_apply(f, g, 2) == pytest.approx(inner / lp_norm(f, 2), rel=1e-12)


def test_zero_function_has_no_functional():
    m = uniform_measure(3)
    with pytest.raises(ZeroResidual):
        norming_functional_apply(func([0, 0, 0], m), func([1, 1, 1], m), 3)


def test_p1_subgradient_is_zero_at_zeros():
    h = norming_kernel(np.array([0, 2j, -1]), np.ones(3) / 3, 1.0)
    assert h[0] == 0
    assert np.allclose(np.abs(h[1:]), 1 / 3)


@pytest.mark.parametrize("p", P_VALUES)
def test_peak_and_dual_bound(rng, p):
    for trial in range(50):
        m = uniform_measure(9, seed=trial)
        f, g = func(random_complex(rng, 9), m), func(random_complex(rng, 9), m)
        nf = lp_norm(f, p)
        assert abs(norming_functional_apply(f, f, p) - nf) <= 1e-10 * nf
        assert abs(norming_functional_apply(f, g, p)) <= (1 + 1e-10) * lp_norm(g, p)


def test_mixed_measure_examples():
    grid = DiscreteMeasure.grid(1, 8)
    pts = uniform_measure(5)
    one = mixed_measure_norm(SampledFunction(np.ones(8), grid), SampledFunction(np.ones(5), pts), 3)
    assert one == pytest.approx(1.0)
    c, p = 2.5, 3.0
    half = mixed_measure_norm(SampledFunction(np.zeros(8), grid), SampledFunction(np.full(5, c), pts), p)
    assert half == pytest.approx(c * 2 ** (-1 / p))


def test_mixed_measure_matches_concatenated_measure(rng):
    grid = DiscreteMeasure.grid(1, 16)
    pts = uniform_measure(7)
    mixed = DiscreteMeasure.mixed(grid, pts)
    vals = random_complex(rng, 16 + 7)
    direct = lp_norm(SampledFunction(vals, mixed), 3)
    split = mixed_measure_norm(SampledFunction(vals[:16], grid), SampledFunction(vals[16:], pts), 3)
    assert direct == pytest.approx(split, rel=1e-12)
    assert mixed.split == 16 and mixed.kind == "mixed"


def test_linf_norm():
    assert linf_norm(func([1, -3j, 2])) == 3.0


def test_torus_grid_layout():
    g = torus_grid(2, 4)
    assert g.count == 16 and g.dim == 2
    assert np.all(g.points < 2 * np.pi)


vectors = st.lists(st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False),
                   min_size=1, max_size=12)


@settings(max_examples=60, deadline=None)
@given(vectors, st.sampled_from(P_VALUES), st.complex_numbers(max_magnitude=1e3, allow_nan=False,
                                                               allow_infinity=False))
def test_homogeneity(values, p, alpha):
    f = func(values)
    assert lp_norm(f * alpha, p) == pytest.approx(abs(alpha) * lp_norm(f, p), rel=1e-12, abs=1e-300)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12).flatmap(lambda n: st.tuples(
    st.lists(st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False), min_size=n, max_size=n),
    st.lists(st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False), min_size=n, max_size=n))),
    st.sampled_from(P_VALUES))
def test_triangle_inequality(pair, p):
    a, b = pair
    m = uniform_measure(len(a))
    f, g = func(a, m), func(b, m)
    assert lp_norm(f + g, p) <= lp_norm(f, p) + lp_norm(g, p) + 1e-12 * (1 + lp_norm(f, p) + lp_norm(g, p))


@settings(max_examples=60, deadline=None)
@given(vectors, st.sampled_from(P_VALUES), st.sampled_from(P_VALUES))
def test_monotone_in_p(values, p1, p2):
    p1, p2 = sorted((p1, p2))
    f = func(values)
    assert lp_norm(f, p1) <= lp_norm(f, p2) * (1 + 1e-12) + 1e-12
