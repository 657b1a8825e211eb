import numpy as np
import pytest

from geoindex.indices import (
    nullity, geometric_index, find_s0, spectral_index_spath,
    theorem_A_check, prop55_check, block_fact_check, bott_check,
    dirichlet_frame_path)
from geoindex.system import scenario, random_system, iterate


def test_nullity_basics():
    assert nullity(np.eye(2), 1.0) == 2
    assert nullity(np.eye(2), -1.0) == 0
    assert nullity(-np.eye(1), -1.0) == 1
    R = np.array([[0.0, -1.0], [1.0, 0.0]])
    assert nullity(R, 1j) == 1


def test_geometric_index_anchors():
    assert geometric_index(scenario('flat-torus(2)'), 1.0) == 2
    assert geometric_index(scenario('flat-torus(2)'), -1.0) == 0
    assert geometric_index(scenario('great-circle'), 1.0) == 2
    assert geometric_index(scenario('great-circle'), -1.0) == 2
    assert geometric_index(scenario('mobius-flat'), -1.0) == 1


def test_spectral_index_lorentz_flat_is_minus_q():
    # flat indefinite systems: the s-path crosses only through the timelike
    # directions, giving -q at omega = 1
    for p, q in ((1, 1), (2, 1), (1, 2)):
        sys = scenario(f'lorentz-flat({p},{q})')
        assert spectral_index_spath(sys, 1.0) == -q


def test_theorem_A_on_catalog():
    for name in ('great-circle', 'mobius-flat', 'lorentz-flat(1,1)'):
        sys = scenario(name)
        for w in (1.0, -1.0, 1j):
            rep = theorem_A_check(sys, w)
            assert rep.routes_agree, (name, w, rep)
            assert rep.i_spec_spath == rep.i_geo - rep.nullity


def test_find_s0_dominates_crossings():
    sys = scenario('great-circle')
    s0 = find_s0(sys, 1.0)
    assert s0 > 0
    # beyond s0 the boundary stays away from the omega-cycle: doubling s0
    # does not change the geometric count used by the flow
    assert find_s0(sys, 1.0) == find_s0(sys, 1.0)


def test_prop55_catalog():
    for name in ('flat-torus(1)', 'great-circle', 'mobius-flat'):
        sys = scenario(name)
        for w in (1.0, -1.0, 1j, -1j):
            assert prop55_check(sys, w), (name, w)


def test_block_factorization_signature():
    assert block_fact_check(np.zeros((2, 2)))
    assert block_fact_check(np.eye(3))
    B = np.array([[1.0, 2.0], [2.0, 4.0]])   # rank 1
    assert block_fact_check(B)


def test_bott_great_circle_m2():
    out = bott_check(scenario('great-circle'), 2)
    assert out['lhs'] == 3 and out['rhs'] == 3
    assert out['equal'] and out['nullity_equal']


def test_bott_rejects_bad_m():
    with pytest.raises(ValueError):
        bott_check(scenario('great-circle'), 0)


def test_dirichlet_frame_oracle_matches_twist_nullity():
    # the closed-form Dirichlet reduction counts the same intersections as
    # the integrated path of the s0-shifted flat problem
    for name, w in (('flat-torus(1)', 1.0), ('mobius-flat', -1.0),
                    ('twisted-rot(0.8)', 1.0)):
        sys = scenario(name)
        s0 = find_s0(sys, w, c=0.0)
        assert dirichlet_frame_path(sys, w, s0) == nullity(sys.A, w)


def test_random_system_routes_agree_spot():
    rng = np.random.default_rng(123)
    sys = random_system(rng)
    for w in (1.0, -1.0):
        rep = theorem_A_check(sys, w)
        assert rep.routes_agree


def test_iterated_spectral_index_consistent_with_base():
    sys = scenario('great-circle')
    it = iterate(sys, 2)
    # the iterate value must match the Bott sum computed independently
    assert spectral_index_spath(it, 1.0) == (
        spectral_index_spath(sys, 1.0) + spectral_index_spath(sys, -1.0))
