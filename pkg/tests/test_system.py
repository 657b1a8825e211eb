import json

import numpy as np
import pytest

from geoindex.system import (
    SignatureMatrix, MorseSturmSystem, ConstantCurvature, FourierCurvature,
    scenario, SCENARIO_NAMES, random_system, iterate, validate, twist_lift,
    closed_form_phi, system_to_dict, system_from_dict)


def test_signature_matrix():
    g = SignatureMatrix(2, 1)
    assert g.n == 3
    assert np.allclose(g.matrix, np.diag([1.0, 1.0, -1.0]))
    with pytest.raises(ValueError):
        SignatureMatrix(-1, 2)


def test_catalog_names_all_load():
    for name in SCENARIO_NAMES:
        concrete = name.replace('(n)', '(2)').replace('(p,q)', '(1,1)') \
                       .replace('(theta)', '(0.8)')
        s = scenario(concrete)
        assert validate(s) == []
    with pytest.raises(KeyError):
        scenario('no-such-thing')


def test_twist_lift_symplectic():
    from geoindex.symplectic import is_symplectic
    rng = np.random.default_rng(0)
    for _ in range(5):
        s = random_system(rng)
        assert is_symplectic(twist_lift(s.A))


def test_validate_catches_bad_twist():
    s = scenario('flat-torus(2)')
    bad = MorseSturmSystem(n=2, g=s.g, T=1.0, A=2 * np.eye(2),
                           Rhat=ConstantCurvature(np.zeros((2, 2))))
    assert any('orthogonal' in msg or 'det' in msg for msg in validate(bad))


def test_random_system_reproducible_and_valid():
    a = random_system(np.random.default_rng(42))
    b = random_system(np.random.default_rng(42))
    assert a.label == b.label
    assert np.allclose(a.A, b.A)
    assert validate(a) == []


def test_iterate_curvature_periodic_conjugation():
    # Rhat^(m)(t + kT) = (A^-k)^T Rhat(t) A^-k on the iterate
    rng = np.random.default_rng(7)
    s = random_system(rng)
    it = iterate(s, 3)
    assert it.T == pytest.approx(3 * s.T)
    for t in (0.1 * s.T, 0.6 * s.T):
        want = s.A.T @ s.Rhat(t) @ s.A
        assert np.allclose(it.Rhat(t + s.T), want, atol=1e-10)
    assert np.allclose(it.A, np.linalg.matrix_power(s.A, 3))


def test_closed_form_phi_boundary_and_group_property():
    g = SignatureMatrix(1, 1)
    Phi0 = closed_form_phi(g, 0.7, 0.3, 0.0)
    assert np.allclose(Phi0, np.eye(4))
    from geoindex.symplectic import is_symplectic
    assert is_symplectic(closed_form_phi(g, 0.7, 0.3, 1.3))


def test_serialization_roundtrip():
    rng = np.random.default_rng(5)
    s = random_system(rng)
    d = system_to_dict(s)
    text = json.dumps(d)
    s2 = system_from_dict(json.loads(text))
    assert s2.n == s.n and s2.T == pytest.approx(s.T)
    assert np.allclose(s2.A, s.A)
    for t in (0.0, 0.4 * s.T, s.T):
        assert np.allclose(s2.Rhat(t), s.Rhat(t))


def test_orientation_sign():
    assert scenario('flat-torus(1)').orientation == 1
    assert scenario('mobius-flat').orientation == -1
