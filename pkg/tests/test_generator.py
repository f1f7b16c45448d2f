import numpy as np
import pytest
from scipy import stats

from wrtree.generator import (AttachmentTable, RandomSource, attachment_prob, generate,
                              generate_batch)
from wrtree.montecarlo import chi_square_shapes, shape_law
from wrtree.weights import WeightSequence, WeightTableExhausted, parse_family


def reference_parents(seq, n, u):
    # plain binary search; x == S(i) goes to node i + 1
    S = seq.prefix_sums(n - 1)
    out = np.zeros((u.shape[0], n + 1), dtype=np.int64)
    if n >= 2:
        out[:, 2] = 1
    for j in range(3, n + 1):
        x = u[:, j - 3] * S[j - 2]
        out[:, j] = np.minimum(np.searchsorted(S[: j - 1], x, side="right"), j - 2) + 1
    return out


@pytest.mark.parametrize("spec", ["uniform", "hoppe:2", "hoppe:0.01", "thetak:3,2", "power:1",
                                  "power:-2", "power:3", "wrt:100,0.001,7"])
def test_bucket_lookup_equals_binary_search(spec):
    seq = parse_family(spec)
    n = 300
    u = np.random.default_rng(4).random((200, n - 2))
    assert np.array_equal(AttachmentTable(seq, n).sample(u), reference_parents(seq, n, u))


def test_boundary_ties_go_right():
    seq = WeightSequence.uniform()
    n = 9  # node 9 sees S(8) = 8
    u = np.zeros((1, n - 2))
    u[0, -1] = 0.5  # x = 4 = S(4)
    out = AttachmentTable(seq, n).sample(u)
    assert out[0, 9] == 5
    assert np.all(out[0, 3:9] == 1)


def test_determinism_and_streams():
    seq = WeightSequence.hoppe(2)
    a = generate(seq, 1000, RandomSource(7))
    assert a == generate(seq, 1000, RandomSource(7))
    assert a != generate(seq, 1000, RandomSource(7, 1))
    assert a != generate(seq, 1000, RandomSource(8))


def test_batch_equals_consecutive_calls():
    seq = WeightSequence.power(-1)
    batch = generate_batch(seq, 50, 5, np.random.default_rng(3))
    g = np.random.default_rng(3)
    for row in batch:
        assert np.array_equal(generate(seq, 50, g).parent, row)


def test_small_n():
    seq = WeightSequence.uniform()
    assert generate(seq, 1, RandomSource(1)).n == 1
    assert generate(seq, 2, RandomSource(1)).parents() == (1,)
    assert generate(parse_family("hoppe:2"), 3, RandomSource(1)).parent_of(3) in (1, 2)


def test_attachment_prob():
    assert attachment_prob(WeightSequence.uniform(), 1, 4) == pytest.approx(1 / 3)
    assert attachment_prob(WeightSequence.hoppe(2), 1, 4) == 0.5
    assert attachment_prob(WeightSequence.theta_k(3, 2), 5, 6) == pytest.approx(1 / 9)
    assert attachment_prob(WeightSequence.power(1), 2, 2 + 1) == pytest.approx(2 / 3)
    with pytest.raises(ValueError):
        attachment_prob(WeightSequence.uniform(), 3, 3)


@pytest.mark.parametrize("spec,p_root", [("uniform", 1 / 2), ("hoppe:2", 2 / 3), ("hoppe:0.5", 1 / 3)])
def test_third_node_root_probability(spec, p_root):
    parents = generate_batch(parse_family(spec), 3, 200_000, RandomSource(11))
    k = int(np.sum(parents[:, 3] == 1))
    assert stats.binomtest(k, parents.shape[0], p_root).pvalue > 1e-4


@pytest.mark.parametrize("spec", ["uniform", "hoppe:0.5", "thetak:3,2", "power:-2", "wrt:2,3,0.5"])
def test_shape_law(spec):
    seq = parse_family(spec)
    parents = generate_batch(seq, 5, 200_000, RandomSource(5))
    _, p = chi_square_shapes(parents, shape_law(seq, 5))
    assert p > 1e-4


def test_exhausted_table():
    seq = WeightSequence.custom([1.0] * 50)
    generate(seq, 51, RandomSource(3))
    with pytest.raises(WeightTableExhausted, match="index 51"):
        generate(seq, 100, RandomSource(3))


def test_bad_inputs():
    with pytest.raises(ValueError):
        generate(WeightSequence.uniform(), 0, RandomSource(1))
    with pytest.raises(TypeError):
        generate(WeightSequence.uniform(), 5, 42)


def test_large_tree_is_valid():
    t = generate(WeightSequence.power(1), 100_000, RandomSource(2))
    j = np.arange(2, t.n + 1)
    assert np.all((t.parent[2:] >= 1) & (t.parent[2:] < j))
