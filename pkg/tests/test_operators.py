import math

import numpy as np
import pytest

from src.dyadic import CubeId, DyadicSystem
from src.operators import (
    apply_S,
    apply_T,
    apply_T_localized,
    apply_T_star,
    apply_T_star_localized,
    dual_pairing,
    dual_pairing_leafwise,
    linearization_partition,
    linearized_sup,
    maximal_function,
    norm_Lp,
    norm_Lp_lr,
    normalize_pointwise,
    pointwise_lr,
    sequence_from_coefficients,
    sequence_function,
)

LEFT, RIGHT = CubeId(1, (0,)), CubeId(1, (1,))


def test_apply_T_examples(line1):
    f = line1.leaf_function([2.0, 4.0])
    np.testing.assert_allclose(apply_T(line1, f, np.ones(3)), [3.0, 2.0, 4.0], rtol=1e-12)
    assert not np.any(apply_T(line1, f, np.zeros(3)))
    np.testing.assert_allclose(apply_T(line1, line1.constant(1.0), np.ones(3)), np.ones(3))


def test_apply_T_localized_examples(line1):
    f = line1.leaf_function([2.0, 4.0])
    lam = np.ones(3)
    np.testing.assert_array_equal(apply_T_localized(line1, f, lam, line1.root), apply_T(line1, f, lam))
    np.testing.assert_allclose(apply_T_localized(line1, f, lam, LEFT), [0.0, 2.0, 0.0], rtol=1e-12)
    only_right = apply_T_localized(line1, f, lam, RIGHT)
    assert only_right[0] == 0.0 and only_right[1] == 0.0


def test_apply_T_star_examples(line1):
    ones = line1.constant(1.0)
    a = line1.coefficients([1.0, 0.0, 3.0])
    np.testing.assert_allclose(apply_T_star(line1, a, np.ones(3), ones), [1.0, 4.0], rtol=1e-12)
    np.testing.assert_allclose(apply_T_star_localized(line1, a, np.ones(3), ones, LEFT), [0.0, 0.0])
    np.testing.assert_allclose(
        apply_T_star_localized(line1, a, np.ones(3), ones, line1.root),
        apply_T_star(line1, a, np.ones(3), ones),
    )
    trivial = DyadicSystem(1, 0)
    assert apply_T_star(trivial, [1.0], [1.0], trivial.constant(1.0))[0] == pytest.approx(1.0)


def test_apply_T_star_sequence_matches_coefficients(line1):
    rng = np.random.default_rng(3)
    a = rng.uniform(size=line1.n_cubes)
    w = rng.lognormal(size=line1.n_leaves)
    lam = rng.uniform(size=line1.n_cubes)
    np.testing.assert_allclose(
        apply_T_star(line1, sequence_from_coefficients(line1, a), lam, w),
        apply_T_star(line1, a, lam, w),
        rtol=1e-12,
    )


def test_apply_S_examples(line1):
    f = line1.leaf_function([2.0, 4.0])
    np.testing.assert_allclose(apply_S(line1, f, np.ones(3)), [5.0, 7.0], rtol=1e-12)
    system = DyadicSystem(2, 3)
    np.testing.assert_allclose(apply_S(system, system.constant(1.0), np.ones(system.n_cubes)), 4.0)


def test_pointwise_lr_examples(line1):
    out = np.array([3.0, 2.0, 4.0])
    assert pointwise_lr(line1, out, RIGHT, math.inf) == 4.0
    assert pointwise_lr(line1, out, LEFT, 1) == 5.0
    assert pointwise_lr(line1, np.zeros(3), LEFT, 3.0) == 0.0


def test_norm_examples(line1, unit_instance):
    system = unit_instance.system
    out = apply_T(system, unit_instance.sigma, unit_instance.lam)
    assert norm_Lp_lr(system, out, unit_instance.omega, 2, 2) == pytest.approx(math.sqrt(3), rel=1e-12)
    assert norm_Lp_lr(line1, np.array([3.0, 2.0, 4.0]), line1.constant(1.0), 2, math.inf) == pytest.approx(
        math.sqrt(12.5), rel=1e-12
    )
    assert norm_Lp_lr(line1, np.zeros(3), line1.constant(1.0), 2, 2) == 0.0
    assert norm_Lp(line1, [2.0, 4.0], line1.constant(1.0), 2) == pytest.approx(math.sqrt(10), rel=1e-12)
    assert norm_Lp(line1, line1.constant(1.0), line1.constant(1.0), 3.7) == pytest.approx(1.0)


def test_dual_pairing_examples(line1):
    ones = line1.constant(1.0)
    f = line1.leaf_function([2.0, 4.0])
    assert dual_pairing(line1, f, np.ones(3), ones, ones, np.ones(3)) == pytest.approx(6.0, rel=1e-12)
    assert dual_pairing(line1, f, np.zeros(3), ones, ones, np.ones(3)) == 0.0
    trivial = DyadicSystem(1, 0)
    one = trivial.constant(1.0)
    assert dual_pairing(trivial, one, [1.0], one, one, [1.0]) == pytest.approx(1.0)


@pytest.mark.parametrize("seed", range(10))
def test_adjointness_and_leafwise_pairing(seed):
    rng = np.random.default_rng(seed)
    system = DyadicSystem(2, 2)
    f = rng.lognormal(size=system.n_leaves)
    sigma = rng.lognormal(size=system.n_leaves)
    omega = rng.lognormal(size=system.n_leaves)
    lam = rng.uniform(size=system.n_cubes)
    a = rng.uniform(size=system.n_cubes)
    pairing = dual_pairing(system, f, a, sigma, omega, lam)
    assert dual_pairing_leafwise(system, f, a, sigma, omega, lam) == pytest.approx(pairing, rel=1e-12)
    adjoint_side = float((f * apply_T_star(system, a, lam, omega) * sigma * system.leaf_volume).sum())
    assert adjoint_side == pytest.approx(pairing, rel=1e-12)


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("r", [1.0, 2.0, 4.0, math.inf])
def test_holder_consistency(seed, r):
    rng = np.random.default_rng(seed)
    system = DyadicSystem(1, 3)
    p = 3.0
    f = rng.lognormal(size=system.n_leaves)
    sigma = rng.lognormal(size=system.n_leaves)
    omega = rng.lognormal(size=system.n_leaves)
    lam = rng.uniform(size=system.n_cubes)
    a = rng.uniform(size=system.n_cubes)
    r_prime = 1.0 if math.isinf(r) else (math.inf if r == 1 else r / (r - 1))
    lhs = dual_pairing(system, f, a, sigma, omega, lam)
    out = apply_T(system, f * sigma, lam)
    rhs = norm_Lp_lr(system, out, omega, p, r) * norm_Lp_lr(system, a, omega, p / (p - 1), r_prime)
    assert lhs <= rhs * (1 + 1e-9)


@pytest.mark.parametrize("seed", range(100))
def test_r1_identity_is_bit_exact(seed):
    rng = np.random.default_rng(seed)
    system = DyadicSystem(1 + seed % 2, 2)
    f = rng.lognormal(size=system.n_leaves)
    sigma = rng.lognormal(size=system.n_leaves)
    omega = rng.lognormal(size=system.n_leaves)
    lam = rng.uniform(size=system.n_cubes)
    fs = f * sigma
    assert norm_Lp_lr(system, apply_T(system, fs, lam), omega, 2.5, 1) == norm_Lp(
        system, apply_S(system, fs, lam), omega, 2.5
    )


def test_positivity_and_localization_monotonicity():
    rng = np.random.default_rng(7)
    system = DyadicSystem(1, 3)
    lam = rng.uniform(size=system.n_cubes)
    f = rng.uniform(size=system.n_leaves)
    bigger = f + rng.uniform(size=system.n_leaves)
    assert np.all(apply_T(system, f, lam) <= apply_T(system, bigger, lam))
    inner, outer = system.position(CubeId(2, (1,))), system.position(CubeId(1, (0,)))
    assert np.all(apply_T_localized(system, f, lam, inner) <= apply_T_localized(system, f, lam, outer))


def test_maximal_function_examples(line1):
    ones = line1.constant(1.0)
    np.testing.assert_allclose(maximal_function(line1, [2.0, 4.0], ones), [3.0, 4.0], rtol=1e-12)
    np.testing.assert_allclose(maximal_function(line1, line1.constant(5.0), ones), [5.0, 5.0])
    concentrated = line1.leaf_function([0.0, 1.0])
    # su Q0 e sulla foglia destra la media pesata vale f(destra)
    assert maximal_function(line1, [2.0, 4.0], concentrated)[1] == pytest.approx(4.0)


def test_linearization_examples(line1):
    f = line1.constant(1.0)
    partition = linearization_partition(line1, f, np.array([1.0, 2.0, 0.0]))
    assert partition.sets == (frozenset({1}), frozenset({0}), frozenset())
    assert all(not s for s in linearization_partition(line1, f, np.zeros(3)).sets)
    unit = linearization_partition(line1, f, np.ones(3))
    assert unit.sets[0] == frozenset({0, 1}) and not unit.sets[1] and not unit.sets[2]


@pytest.mark.parametrize("seed", range(100))
def test_linearization_partition_and_identity(seed):
    rng = np.random.default_rng(seed)
    system = DyadicSystem(1 + seed % 2, 2)
    lam = rng.uniform(size=system.n_cubes)
    lam[rng.random(system.n_cubes) < 0.3] = 0.0
    f = rng.lognormal(size=system.n_leaves)
    f[rng.random(system.n_leaves) < 0.3] = 0.0
    partition = linearization_partition(system, f, lam)
    sup = pointwise_lr_all_inf(system, f, lam)
    assert partition.is_disjoint()
    assert partition.covered() == frozenset(np.flatnonzero(sup > 0).tolist())
    linear = linearized_sup(system, f, lam, partition)
    positive = sup > 0
    np.testing.assert_allclose(linear[positive], sup[positive], rtol=1e-12)


def pointwise_lr_all_inf(system, f, lam):
    out = apply_T(system, f, lam)
    return np.array([pointwise_lr(system, out, int(pos), math.inf) for pos in system.leaf_positions])


def test_normalize_pointwise_examples(line1):
    g = sequence_from_coefficients(line1, [3.0, 4.0, 0.0])
    normalized = normalize_pointwise(line1, g, 2.0)
    assert normalized[0, 0] == pytest.approx(0.6)
    assert normalized[1, 0] == pytest.approx(0.8)
    assert normalized[0, 1] == pytest.approx(1.0)
    assert not np.any(normalize_pointwise(line1, np.zeros((3, 2)), 2.0))
    trivial = DyadicSystem(1, 0)
    assert normalize_pointwise(trivial, np.array([[5.0]]), 3.0)[0, 0] == pytest.approx(1.0)


def test_sequence_function_forces_support(line1):
    g = sequence_function(line1, np.ones((3, 2)))
    assert g[1, 1] == 0.0 and g[2, 0] == 0.0 and g[0, 1] == 1.0
