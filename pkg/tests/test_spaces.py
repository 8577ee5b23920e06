import numpy as np
import pytest

from heavytail.spaces import (
    ChainOp,
    DenseOp,
    DiagonalOp,
    DimensionError,
    DomainError,
    EmbeddingOp,
    ScalarOp,
    ShiftPowerOp,
    identity_op,
    lp_norm,
    max_norm,
    op_norm_bound,
    op_power,
    restricted_norm_bound,
    weighted_l1_norm,
)

RNG = np.random.default_rng(1901)


def test_norm_examples():
    assert max_norm(2).norm([3.0, -4.0]) == 4.0
    assert weighted_l1_norm([1.0, 0.5]).norm([2.0, 2.0]) == 3.0
    assert lp_norm(3, 2).norm([0.0, 0.0, 0.0]) == 0.0


def test_norm_dimension_mismatch():
    with pytest.raises(DimensionError):
        max_norm(2).norm([1.0, 2.0, 3.0])


def test_project_sphere_examples():
    np.testing.assert_allclose(max_norm(2).unit([0.0, -2.0]), [0.0, -1.0])
    np.testing.assert_allclose(max_norm(2).unit([1.0, 1.0]), [1.0, 1.0])
    np.testing.assert_allclose(
        weighted_l1_norm([1.0, 0.5]).unit([2.0, 2.0]), [2 / 3, 2 / 3]
    )
    with pytest.raises(DomainError):
        max_norm(2).unit([0.0, 0.0])


def test_project_sphere_recovers_direction():
    # unit theta scaled by r > 0 projects back to theta
    for space in (max_norm(4), lp_norm(4, 2), weighted_l1_norm([1, 0.5, 2, 0.25])):
        x = RNG.standard_normal((100, 4))
        theta = space.unit(x)
        r = RNG.uniform(0.1, 50.0, size=(100, 1))
        np.testing.assert_allclose(space.unit(r * theta), theta, rtol=0, atol=1e-12)


@pytest.mark.parametrize(
    "space",
    [max_norm(5), lp_norm(5, 1), lp_norm(5, 2), lp_norm(5, 3.5),
     weighted_l1_norm([1.0, 0.2, 3.0, 0.5, 1.5])],
    ids=["max", "l1", "l2", "l3.5", "wl1"],
)
def test_norm_axioms_random(space):
    rng = np.random.default_rng(77)
    u = rng.standard_normal((1000, 5)) * 10
    v = rng.standard_normal((1000, 5)) * 10
    c = rng.standard_normal(1000) * 5
    assert np.all(space.norm(u + v) <= space.norm(u) + space.norm(v) + 1e-12)
    np.testing.assert_allclose(
        space.norm(c[:, None] * u), np.abs(c) * space.norm(u), rtol=1e-12
    )
    assert np.all(space.norm(u[np.abs(u).sum(axis=1) > 0]) > 0)


def test_apply_examples():
    np.testing.assert_allclose(ScalarOp(2.0, 2).apply([1.0, -1.0]), [2.0, -2.0])
    np.testing.assert_allclose(EmbeddingOp(1, 3).apply([5.0]), [0.0, 5.0, 0.0])
    np.testing.assert_allclose(
        ShiftPowerOp(1, 3).apply([1.0, 2.0, 3.0]), [0.0, 1.0, 2.0]
    )
    np.testing.assert_allclose(
        ShiftPowerOp(4, 3).apply([1.0, 2.0, 3.0]), [0.0, 0.0, 0.0]
    )


def _random_ops(rng, dim):
    return [
        ScalarOp(rng.normal(), dim),
        DiagonalOp(rng.normal(size=dim)),
        DenseOp(rng.normal(size=(dim, dim))),
        ShiftPowerOp(2, dim),
        ChainOp([DiagonalOp(rng.normal(size=dim)), ShiftPowerOp(1, dim)]),
    ]


def test_apply_is_linear():
    rng = np.random.default_rng(5)
    for op in _random_ops(rng, 4):
        u = rng.standard_normal((50, 4))
        v = rng.standard_normal((50, 4))
        a, b = 1.7, -0.3
        lhs = op.apply(a * u + b * v)
        rhs = a * op.apply(u) + b * op.apply(v)
        np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12)


def test_apply_matches_matrix():
    rng = np.random.default_rng(6)
    for op in _random_ops(rng, 4):
        x = rng.standard_normal((20, 4))
        np.testing.assert_allclose(op.apply(x), x @ op.as_matrix().T, atol=1e-12)


def test_op_power_structure():
    assert isinstance(op_power(ScalarOp(0.5, 3), 4), ScalarOp)
    assert op_power(ScalarOp(0.5, 3), 4).a == 0.5**4
    assert op_power(ShiftPowerOp(1, 5), 3).m == 3
    np.testing.assert_allclose(op_power(ScalarOp(2.0, 2), 0).as_matrix(), np.eye(2))


def test_op_norm_bound_examples():
    b = op_norm_bound(DiagonalOp([2.0, 3.0]), max_norm(2), max_norm(2))
    assert b.value == 3.0 and b.exact
    b = op_norm_bound(ScalarOp(-2.5, 3), lp_norm(3, 2), lp_norm(3, 2))
    assert b.value == 2.5 and b.exact
    # max -> max dense: max absolute row sum
    b = op_norm_bound(DenseOp([[1.0, -2.0], [0.5, 0.5]]), max_norm(2), max_norm(2))
    assert b.value == 3.0 and b.exact


def test_restricted_norm_bound_examples():
    w = [0.8**n for n in range(6)]
    w[0] = 1.0
    space = weighted_l1_norm(w)
    # shift^m restricted to the first coordinate has norm w_m
    b = restricted_norm_bound(ShiftPowerOp(2, 6), {0}, space, space)
    assert b.exact and np.isclose(b.value, w[2])
    full = restricted_norm_bound(ShiftPowerOp(2, 6), range(6), space, space)
    assert full.value == op_norm_bound(ShiftPowerOp(2, 6), space, space).value
    zero = restricted_norm_bound(DenseOp(np.zeros((6, 6))), {1, 3}, space, space)
    assert zero.value == 0.0 and zero.exact
    with pytest.raises(DomainError):
        restricted_norm_bound(ShiftPowerOp(1, 6), set(), space, space)


def test_restricted_bound_never_exceeds_full():
    rng = np.random.default_rng(8)
    spaces = [max_norm(5), lp_norm(5, 2), weighted_l1_norm([1, 0.3, 2, 0.7, 1.1])]
    for dom in spaces:
        for cod in spaces:
            op = DenseOp(rng.normal(size=(5, 5)))
            full = op_norm_bound(op, dom, cod)
            sub = restricted_norm_bound(op, {0, 2}, dom, cod)
            assert sub.value <= full.value + 1e-12


def test_bounds_dominate_sphere_samples():
    rng = np.random.default_rng(9)
    spaces = [max_norm(4), lp_norm(4, 2), lp_norm(4, 3), weighted_l1_norm([1, 0.5, 2, 0.1])]
    ops = _random_ops(np.random.default_rng(10), 4) + [identity_op(4)]
    for dom in spaces:
        for cod in spaces:
            for op in ops:
                bound = op_norm_bound(op, dom, cod)
                g = rng.standard_normal((10_000, 4))
                theta = dom.unit(g)
                values = cod.norm(op.apply(theta))
                assert np.all(values <= bound.value + 1e-9), (dom.kind, cod.kind, op)


def test_embedding_bound_is_codomain_unit_norm():
    w = [1.0, 0.5, 0.25]
    space = weighted_l1_norm(w)
    for n in range(3):
        b = op_norm_bound(EmbeddingOp(n, 3), weighted_l1_norm((1.0,)), space)
        assert b.exact and np.isclose(b.value, w[n])


def test_weighted_l1_requires_normalized_leading_weight():
    with pytest.raises(DomainError):
        weighted_l1_norm([2.0, 1.0])
    with pytest.raises(DomainError):
        weighted_l1_norm([1.0, -0.5])
