import numpy as np
import pytest

from geoindex.fem import (NotApplicableError, assemble, omega_morse_index,
                          morse_index_theorem_check)
from geoindex.system import scenario, random_system, iterate


def test_rejects_indefinite_signature():
    with pytest.raises(NotApplicableError):
        omega_morse_index(scenario('lorentz-flat(1,1)'), 1.0)


def test_rejects_bad_mesh_and_omega():
    sys = scenario('flat-torus(1)')
    with pytest.raises(ValueError):
        assemble(sys, 1.0, 4)
    with pytest.raises(ValueError):
        assemble(sys, 2.0, 32)


def test_flat_torus_kernel():
    out = omega_morse_index(scenario('flat-torus(2)'), 1.0)
    assert out['index'] == 0
    assert out['nullity_est'] == 2


def test_great_circle_indices():
    sys = scenario('great-circle')
    assert omega_morse_index(sys, 1.0)['index'] == 1
    assert omega_morse_index(sys, -1.0)['index'] == 2


def test_great_circle_iterates():
    sys = scenario('great-circle')
    for m in (2, 3):
        out = omega_morse_index(iterate(sys, m), 1.0)
        assert out['index'] == 2 * m - 1


def test_complex_twist_hermitian():
    sys = scenario('twisted-rot(0.8)')
    form = assemble(sys, 1j, 32)
    H = form.H
    assert np.linalg.norm(H - H.conj().T) < 1e-10


def test_morse_index_theorem_bridge():
    for name, w in (('great-circle', 1.0), ('great-circle', -1.0),
                    ('flat-torus(2)', 1.0), ('twisted-rot(0.8)', 1j)):
        out = morse_index_theorem_check(scenario(name), w)
        assert out['ok'], (name, w, out)


def test_random_riemannian_bridge():
    rng = np.random.default_rng(5)
    for _ in range(3):
        sys = random_system(rng, riemannian=True)
        for w in (1.0, -1.0):
            out = morse_index_theorem_check(sys, w)
            assert out['ok'], (sys.label, w, out)
