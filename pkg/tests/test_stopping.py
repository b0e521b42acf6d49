import math

import numpy as np
import pytest

from src.dyadic import CubeId, DyadicSystem
from src.inequalities import verify_carleson
from src.instance_generator import generate_instance, generate_sweep_instance, random_test_pair
from src.stopping import (
    NotAMemberError,
    build_f_stopping,
    build_fG,
    build_g_stopping,
    build_gF,
    derive_index_sets,
    g_leaf_norms,
    residual_masses,
    verify_properties_a,
    verify_properties_b,
    verify_replacement,
)

LEAF4 = CubeId(2, (3,))


@pytest.fixture
def line2():
    return DyadicSystem(1, 2)


def test_f_stopping_trivial_cases(line2):
    ones = line2.constant(1.0)
    assert build_f_stopping(line2, line2.constant(3.0), ones).members == (0,)
    assert build_f_stopping(line2, line2.constant(0.0), ones).members == (0,)


def test_f_stopping_hand_example(line2):
    ones = line2.constant(1.0)
    fam = build_f_stopping(line2, [1.0, 1.0, 1.0, 9.0], ones)
    leaf4 = line2.position(LEAF4)
    assert fam.members == (0, leaf4)
    assert fam.children[0] == (leaf4,)
    assert fam.residual[0] == frozenset({0, 1, 2})
    assert fam.residual[leaf4] == frozenset({3})
    assert fam.generation == {0: 0, leaf4: 1}
    assert fam.parent_map[leaf4] == leaf4
    assert fam.parent_map[line2.position(CubeId(1, (1,)))] == 0

    report = verify_properties_a(fam, [1.0, 1.0, 1.0, 9.0], ones)
    assert report.holds
    a3 = report.by_name()["a3_residual_mass"]
    assert residual_masses(fam, ones)[0] == pytest.approx(0.75)
    assert a3.holds


def test_g_stopping_hand_example(line2):
    a = np.zeros(line2.n_cubes)
    leaf4 = line2.position(LEAF4)
    a[0], a[leaf4] = 1.0, 9.0
    fam = build_g_stopping(line2, a, line2.constant(1.0), 1.0)
    assert fam.children[0] == (leaf4,)
    assert verify_properties_b(fam, a, line2.constant(1.0), 1.0).holds


def test_g_stopping_trivial_cases(line2):
    ones = line2.constant(1.0)
    assert build_g_stopping(line2, np.zeros(line2.n_cubes), ones, 2.0).members == (0,)
    single = DyadicSystem(2, 0)
    assert build_g_stopping(single, [7.0], single.constant(1.0), 3.0).members == (0,)
    report = verify_properties_b(build_g_stopping(line2, np.zeros(line2.n_cubes), ones, 2.0), np.zeros(7), ones, 2.0)
    assert report.holds


def test_g_stopping_on_null_cube(line1):
    omega = [1.0, 0.0]
    a = [0.0, 0.0, 1.0]
    fam = build_g_stopping(line1, a, omega, 2.0)
    # la media ω sulla radice è nulla: il cubo ω-nullo viene comunque fermato
    assert fam.members == (0, 2)
    report = verify_properties_b(fam, a, omega, 2.0)
    assert report.holds, [c for c in report.checks if not c.holds]
    assert report.by_name()["b4_chain_control"].lhs == 0.0


@pytest.mark.parametrize("seed", range(300))
def test_g_properties_with_sparse_weights_and_peaked_g(seed):
    inst = generate_instance(seed, 1, 4, 2.0, 2.0, "random", "sparse")
    _, a = random_test_pair(inst, seed)
    a = a**6
    fam = build_g_stopping(inst.system, a, inst.omega, 2.0)
    report = verify_properties_b(fam, a, inst.omega, 2.0)
    assert report.holds, [c for c in report.checks if not c.holds]


def test_trivial_family_properties(line2):
    ones = line2.constant(1.0)
    fam = build_f_stopping(line2, ones, ones)
    assert verify_properties_a(fam, ones, ones).holds
    bounded = np.full(line2.n_cubes, 0.1)
    fam_g = build_g_stopping(line2, bounded, ones, 2.0)
    assert fam_g.members == (0,)
    assert verify_properties_b(fam_g, bounded, ones, 2.0).by_name()["b4_chain_control"].holds


def test_index_sets_trivial(line2):
    ones = line2.constant(1.0)
    fam_f = build_f_stopping(line2, ones, ones)
    fam_g = build_g_stopping(line2, np.zeros(line2.n_cubes), ones, 2.0)
    sets = derive_index_sets(fam_f, fam_g)
    assert sets.ch_star_G == {0: ()}
    assert sets.ch_star_F == {0: ()}
    assert sets.I[0] == tuple(range(line2.n_cubes))
    np.testing.assert_array_equal(build_gF(line2, np.arange(7.0), fam_f, fam_g, 0), np.arange(7.0))
    np.testing.assert_array_equal(build_fG(line2, [1.0, 2.0, 3.0, 4.0], ones, fam_f, fam_g, 0), [1.0, 2.0, 3.0, 4.0])


def test_index_sets_definition_chase(line2):
    ones = line2.constant(1.0)
    fam_f = build_f_stopping(line2, [1.0, 1.0, 1.0, 9.0], ones)
    fam_g = build_g_stopping(line2, np.zeros(line2.n_cubes), ones, 2.0)
    sets = derive_index_sets(fam_f, fam_g)
    assert sets.ch_star_F[0] == (line2.position(LEAF4),)


def test_not_a_member(line2):
    ones = line2.constant(1.0)
    fam_f = build_f_stopping(line2, ones, ones)
    fam_g = build_g_stopping(line2, np.zeros(line2.n_cubes), ones, 2.0)
    with pytest.raises(NotAMemberError):
        build_fG(line2, ones, ones, fam_f, fam_g, 3)
    with pytest.raises(NotAMemberError):
        build_gF(line2, np.zeros(7), fam_f, fam_g, 3)


def test_fG_of_constant_function():
    rng = np.random.default_rng(11)
    system = DyadicSystem(1, 3)
    sigma = rng.lognormal(size=system.n_leaves)
    f = rng.lognormal(size=system.n_leaves) ** 3
    a = rng.uniform(size=system.n_cubes) ** 4
    omega = rng.lognormal(size=system.n_leaves)
    fam_f = build_f_stopping(system, f, sigma)
    fam_g = build_g_stopping(system, a, omega, 2.0)
    ones = system.constant(1.0)
    for member in fam_g.members:
        values = build_fG(system, ones, sigma, fam_f, fam_g, member)
        assert np.all(values <= 1.0 + 1e-12)
        np.testing.assert_allclose(values[sorted(fam_g.residual[member])], 1.0)


def test_family_serialization(line2):
    fam = build_f_stopping(line2, [1.0, 1.0, 1.0, 9.0], line2.constant(1.0))
    data = fam.to_dict()
    assert [m["cube"] for m in data["members"]] == ["0:0", "2:3"]
    assert data["members"][0]["residual_mask"] == [1, 1, 1, 0]
    assert data["members"][0]["children"] == ["2:3"]
    assert data["members"][1]["generation"] == 1


def brute_force_index_sets(system, fam_f, fam_g):
    between = lambda fam, inner, outer: any(
        system.contains(outer, m) and system.contains(m, inner) for m in fam.members
    )
    ch_star_G = {g: tuple(c for c in fam_g.children[g] if between(fam_f, c, g)) for g in fam_g.members}
    ch_star_F = {f: tuple(c for c in fam_f.children[f] if between(fam_g, c, f)) for f in fam_f.members}
    index = {}
    for f in fam_f.members:
        index[f] = tuple(
            q
            for q in range(system.n_cubes)
            if fam_f.parent_map[q] == f and system.contains(f, int(fam_g.parent_map[q]))
        )
    return ch_star_G, ch_star_F, index


@pytest.mark.parametrize("seed", range(30))
def test_index_sets_against_brute_force(seed):
    inst = generate_sweep_instance(seed)
    f, a = random_test_pair(inst, seed)
    system = inst.system
    fam_f = build_f_stopping(system, f, inst.sigma)
    fam_g = build_g_stopping(system, a, inst.omega, inst.exponents.r_prime)
    sets = derive_index_sets(fam_f, fam_g)
    ch_star_G, ch_star_F, index = brute_force_index_sets(system, fam_f, fam_g)
    assert sets.ch_star_G == ch_star_G
    assert sets.ch_star_F == ch_star_F
    assert sets.I == index
    for (member, child), cubes in sets.I_pair.items():
        assert child in fam_f.children[member]
        for q in cubes:
            assert q in sets.I[member] and q != child and system.contains(q, child)
    for g, children in sets.ch_star_G.items():
        assert set(children) <= set(fam_g.children[g])


@pytest.mark.parametrize("seed", range(500))
def test_stopping_properties_on_sweep(seed):
    inst = generate_sweep_instance(seed)
    f, a = random_test_pair(inst, seed)
    system, r_prime = inst.system, inst.exponents.r_prime
    fam_f = build_f_stopping(system, f, inst.sigma)
    fam_g = build_g_stopping(system, a, inst.omega, r_prime)

    report_a = verify_properties_a(fam_f, f, inst.sigma)
    report_b = verify_properties_b(fam_g, a, inst.omega, r_prime)
    assert report_a.holds, [c for c in report_a.checks if not c.holds]
    assert report_b.holds, [c for c in report_b.checks if not c.holds]

    # i residui soddisfano le ipotesi dell'immersione di Carleson
    assert verify_carleson(system, fam_f.members, fam_f.residual, f, inst.sigma, inst.p).holds
    g_norms = g_leaf_norms(system, a, r_prime)
    assert verify_carleson(
        system, fam_g.members, fam_g.residual, g_norms, inst.omega, inst.exponents.p_prime
    ).holds

    f_by_member = {g: build_fG(system, f, inst.sigma, fam_f, fam_g, g) for g in fam_g.members}
    assert verify_replacement(system, f, inst.sigma, fam_f, fam_g, f_by_member).holds


def test_replacement_holds_for_unit_function(line2):
    ones = line2.constant(1.0)
    fam_f = build_f_stopping(line2, ones, ones)
    fam_g = build_g_stopping(line2, np.zeros(7), ones, 2.0)
    f_by_member = {0: build_fG(line2, ones, ones, fam_f, fam_g, 0)}
    check = verify_replacement(line2, ones, ones, fam_f, fam_g, f_by_member)
    assert check.holds and math.isclose(check.lhs, check.rhs)
