import math

import numpy as np
import pytest

from sparsesampling.dictionaries import (
    CoefficientVector,
    SampledSystem,
    TabulatedSystem,
    TrigSystem,
    a_beta_block_norms,
    block_of,
    block_size,
    continuous_context,
    continuous_l2_norm,
    continuous_lp_norm,
    evaluate,
    system_size,
    trig_grid_values,
    trig_moments,
)
from sparsesampling.errors import ParameterError
from sparsesampling.lp_space import DiscreteMeasure, PointSet, lp_norm

from conftest import random_complex, uniform_measure


@pytest.mark.parametrize("dim,J", [(1, 0), (1, 4), (2, 2), (3, 1)])
def test_trig_system_size_and_blocks(dim, J):
    S = TrigSystem(dim, J)
    assert S.size == (2 ** (J + 1) - 1) ** dim == system_size(dim, J)
    assert len({tuple(k) for k in S.frequencies}) == S.size
    assert np.all(np.abs(S.frequencies).max(axis=1) < 2**J)
    slices = S.block_slices()
    assert sum(len(s) for s in slices) == S.size
    for j, idx in enumerate(slices):
        assert len(idx) == block_size(dim, j)
        assert all(block_of(S.frequencies[i]) == j for i in idx)


def test_canonical_order_is_block_then_lexicographic():
    S = TrigSystem(1, 3)
    assert [k[0] for k in S.frequencies[:7]] == [0, -1, 1, -3, -2, 2, 3]
    assert list(S.blocks) == sorted(S.blocks)


def test_block_of_matches_definition():
    assert block_of(0) == 0
    assert block_of(1) == block_of(-1) == 1
    assert block_of(2) == block_of(3) == 2
    assert block_of((4, -7)) == 3 and block_of((8, 0)) == 4


def test_evaluate_unit_circle_values():
    S = TrigSystem(1, 2)
    pts = PointSet(np.array([0.0, np.pi / 2, np.pi]))
    f = evaluate(S, CoefficientVector({(1,): 1}), pts)
    assert np.allclose(f.values, [1, 1j, -1])
    const = evaluate(S, CoefficientVector({(0,): 1}), pts)
    assert np.allclose(const.values, 1)


def test_evaluate_is_linear(rng):
    S = TrigSystem(2, 2)
    pts = PointSet(rng.uniform(0, 2 * np.pi, size=(20, 2)))
    a = S.from_dense(random_complex(rng, S.size))
    b = S.from_dense(random_complex(rng, S.size))
    lhs = evaluate(S, a + b, pts).values
    assert np.allclose(lhs, evaluate(S, a, pts).values + evaluate(S, b, pts).values)


def test_unknown_index_raises():
    S = TrigSystem(1, 2)
    with pytest.raises(IndexError):
        evaluate(S, CoefficientVector({(9,): 1}), PointSet(np.array([0.1])))
    with pytest.raises(IndexError):
        S.index_of((1, 1))


def test_coefficient_vector_drops_zeros_and_roundtrips():
    c = CoefficientVector({(1,): 2 + 1j, (2,): 0, (-3,): -1j})
    assert len(c) == 2 and c.get((2,)) == 0
    assert CoefficientVector.from_json(c.to_json()) == c
    assert (c - c) == CoefficientVector()


def test_continuous_l2_examples():
    S = TrigSystem(1, 3)
    assert continuous_l2_norm(S, CoefficientVector({(0,): 3})) == 3
    assert continuous_l2_norm(S, CoefficientVector({(1,): 3, (-2,): 4})) == pytest.approx(5)


def test_continuous_lp_examples():
    S = TrigSystem(1, 2)
    two_cos = CoefficientVector({(1,): 1, (-1,): 1})
    assert continuous_lp_norm(S, two_cos, 2) == pytest.approx(math.sqrt(2))
    # (1/2pi) int (2 cos x)^4 dx = 16 * 3/8 = 6
    assert continuous_lp_norm(S, two_cos, 4) == pytest.approx(6**0.25, rel=1e-12)
    for p in (1, 1.5, 3):
        assert continuous_lp_norm(S, CoefficientVector({(3,): 1}), p) == pytest.approx(1.0)


def test_parseval_matches_quadrature(rng):
    S = TrigSystem(2, 2)
    grid = S.quadrature_measure()
    ctx = SampledSystem(S, grid)
    for _ in range(100):
        dense = np.zeros(S.size, complex)
        idx = rng.choice(S.size, size=5, replace=False)
        dense[idx] = random_complex(rng, 5)
        c = S.from_dense(dense)
        assert lp_norm(ctx.function(dense), 2) == pytest.approx(continuous_l2_norm(S, c), rel=1e-10)


def test_trig_grid_values_match_direct_evaluation(rng):
    S = TrigSystem(2, 2)
    c = S.from_dense(random_complex(rng, S.size))
    grid = DiscreteMeasure.grid(2, 16)
    direct = evaluate(S, c, grid.support).values
    assert np.allclose(trig_grid_values(c, 2, 16), direct)


def test_gram_toeplitz_path_matches_direct(rng):
    S = TrigSystem(1, 3)
    meas = uniform_measure(40, seed=3)
    M = S.sample_matrix(meas.support)
    direct = M.conj().T @ (meas.weights[:, None] * M)
    assert np.allclose(S.gram(meas), direct, atol=1e-13)
    y = random_complex(rng, 40)
    assert np.allclose(S.adjoint(meas, y), M.conj().T @ (meas.weights * y))


def test_trig_moments_long_recurrence():
    x = np.array([0.3, 2.9, 6.1])
    w = np.ones(3) / 3
    mom = trig_moments(x, w, 300)
    t = np.arange(301)
    assert np.allclose(mom, (w[None, :] * np.exp(1j * t[:, None] * x[None, :])).sum(axis=1), atol=1e-12)


def test_a_beta_block_norms_examples():
    S = TrigSystem(1, 3)
    single = a_beta_block_norms(CoefficientVector({(5,): 0.5j}), 0.5, S)
    assert np.allclose(single, [0, 0, 0, 0.5])
    two = CoefficientVector({(4,): 1, (-6,): 1j})
    assert a_beta_block_norms(two, 1.0, S)[3] == pytest.approx(2)
    assert a_beta_block_norms(two, 0.5, S)[3] == pytest.approx(4)
    with pytest.raises(ParameterError):
        a_beta_block_norms(two, 1.5)


def test_a1_below_a_beta_blockwise(rng):
    c = TrigSystem(1, 4).from_dense(random_complex(rng, 31))
    for beta in (0.3, 0.5, 0.9):
        assert np.all(a_beta_block_norms(c, 1.0) <= a_beta_block_norms(c, beta) * (1 + 1e-12))


def test_tabulated_system_roundtrip(tmp_path, rng):
    vals = random_complex(rng, 12).reshape(3, 4)
    vals /= np.abs(vals).max()
    T = TabulatedSystem(vals, bound=1.0, R1=0.5, R2=2.0, K=1.0)
    for name in ("sys.json", "sys.csv"):
        T.save(tmp_path / name)
        back = TabulatedSystem.load(tmp_path / name)
        assert np.allclose(back.values, vals) and back.bound == 1.0 and back.R2 == 2.0
    ctx = continuous_context(T)
    assert ctx.matrix.shape == (4, 3)
    with pytest.raises(ParameterError):
        TabulatedSystem(vals * 10, bound=1.0)
    with pytest.raises(ParameterError):
        TabulatedSystem(vals, R1=2.0, R2=1.0)


def test_tabulated_system_only_samples_reference_grid(rng):
    T = TabulatedSystem(np.ones((2, 4)))
    with pytest.raises(IndexError):
        T.sample_matrix(PointSet(np.array([0.123])))
