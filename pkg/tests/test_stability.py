import numpy as np
import pytest
from scipy.linalg import expm

from geoindex.symplectic import standard_J, diamond, krein_type
from geoindex.system import scenario, random_system
from geoindex.stability import (
    ClusteredSpectrumError, poincare_map, classify_stability,
    splitting_numbers, geodesic_splitting_check, instability_criterion,
    index_hyperbolic_check, strong_stability_check, theorem_F_check,
    perturbation_lemma_check)


def rot(th):
    return np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])


def test_poincare_map_closed_forms():
    # flat torus: unit shear; mobius: minus shear; great circle: identity
    P = poincare_map(scenario('flat-torus(1)'))
    assert np.allclose(P, [[1.0, 0.0], [1.0, 1.0]], atol=1e-8)
    P = poincare_map(scenario('mobius-flat'))
    assert np.allclose(P, [[-1.0, 0.0], [-1.0, -1.0]], atol=1e-8)
    P = poincare_map(scenario('great-circle'))
    assert np.allclose(P, np.eye(2), atol=1e-8)


def test_classify_stability_verdicts():
    rep = classify_stability(np.eye(2))
    assert rep.linearly_stable and rep.on_circle and rep.semisimple
    rep = classify_stability(np.array([[1.0, 0.0], [1.0, 1.0]]))
    assert not rep.linearly_stable and rep.on_circle and not rep.semisimple
    rep = classify_stability(np.diag([2.0, 0.5]))
    assert not rep.on_circle and not rep.linearly_stable
    rep = classify_stability(rot(0.7))
    assert rep.linearly_stable
    assert any(abs(k.lam - np.exp(0.7j)) < 1e-8 for k in rep.krein)


def test_splitting_numbers_normal_forms():
    assert splitting_numbers(np.eye(2), 1.0) == (1, 1)
    assert splitting_numbers(np.eye(2), 1j) == (0, 0)
    assert splitting_numbers(np.array([[1.0, 0.0], [1.0, 1.0]]), 1.0) == (0, 0)
    assert splitting_numbers(np.array([[1.0, 1.0], [0.0, 1.0]]), 1.0) == (1, 1)
    assert splitting_numbers(np.diag([2.0, 0.5]), 1.0) == (0, 0)


def test_splitting_matches_krein_type_elliptic():
    # at a Krein-definite eigenvalue the splitting numbers are the type
    for th in (0.4, np.pi / 3, 2.0):
        w = np.exp(1j * th)
        kt = krein_type(rot(th), w)
        assert splitting_numbers(rot(th), w) == (kt.p, kt.q)


def test_splitting_diamond_additive_generic():
    rng = np.random.default_rng(3)
    for _ in range(4):
        S1 = rng.normal(size=(2, 2))
        S2 = rng.normal(size=(4, 4))
        M1 = expm(standard_J(1) @ (S1 + S1.T) * 0.5)
        M2 = expm(standard_J(2) @ (S2 + S2.T) * 0.5)
        w = complex(np.exp(1j * rng.uniform(0, 2 * np.pi)))
        s1 = splitting_numbers(M1, w)
        s2 = splitting_numbers(M2, w)
        s12 = splitting_numbers(diamond(M1, M2), w)
        assert s12 == (s1[0] + s2[0], s1[1] + s2[1])


def test_splitting_path_independence():
    # a second connecting path: the polar path composed with a full loop,
    # whose contributions cancel between the two one-sided limits
    from geoindex.stability import _polar_path
    M = rot(0.9)
    w = np.exp(0.9j)
    pol = _polar_path(M)
    J = standard_J(1)

    def looped(t):
        return expm(2 * np.pi * t * J) @ pol(t)

    assert splitting_numbers(M, w) == splitting_numbers(M, w, path=looped)


def test_geodesic_splitting_agreement():
    assert geodesic_splitting_check(scenario('great-circle'), 1.0)['ok']
    assert geodesic_splitting_check(scenario('mobius-flat'), -1.0)['ok']


def test_parity_criterion():
    assert instability_criterion(scenario('flat-torus(1)'), 0) \
        == 'unstable_by_parity'
    assert instability_criterion(scenario('great-circle'), 1) == 'silent'
    assert instability_criterion(scenario('mobius-flat'), 0) == 'silent'


def test_theorem_D_contrapositive_on_catalog():
    # never simultaneously linearly stable and parity-unstable
    from geoindex.indices import spectral_index_spath
    for name in ('flat-torus(1)', 'flat-torus(2)', 'great-circle',
                 'mobius-flat', 'twisted-rot(0.8)', 'hyperbolic-flat'):
        sys = scenario(name)
        rep = classify_stability(poincare_map(sys))
        verdict = instability_criterion(sys, spectral_index_spath(sys, 1.0))
        assert not (rep.linearly_stable and verdict == 'unstable_by_parity'), name


def test_strong_stability():
    assert strong_stability_check(rot(0.7))
    assert not strong_stability_check(np.eye(2))          # 1 in spectrum
    assert not strong_stability_check(np.diag([2.0, 0.5]))
    # Krein-indefinite pair at the same angle: stable but not strongly
    M = diamond(rot(0.7), rot(-0.7))
    assert classify_stability(M).linearly_stable
    assert not strong_stability_check(M)


def test_index_hyperbolic_routes():
    assert index_hyperbolic_check(scenario('flat-torus(2)'))['is_index_hyperbolic']
    assert index_hyperbolic_check(scenario('hyperbolic-flat'))['is_index_hyperbolic']
    assert not index_hyperbolic_check(scenario('great-circle'))['is_index_hyperbolic']


def test_theorem_F_anchors():
    out = theorem_F_check(scenario('flat-torus(1)'))
    assert out['applies'] and out['not_strongly_stable']
    out = theorem_F_check(scenario('hyperbolic-flat'))
    assert out['applies'] and out['not_strongly_stable']
    out = theorem_F_check(scenario('great-circle'))
    assert not out['applies']
    assert out['iterate_morse_indices'] == [2 * m - 1 for m in range(1, 7)]


def test_perturbation_lemma():
    assert perturbation_lemma_check(rot(0.7))
    with pytest.raises(ValueError):
        perturbation_lemma_check(np.diag([2.0, 0.5]))
