"""Acceptance criteria: every item is an exact integer identity or a hard
tolerance, with the runtime budgets asserted where one is stated."""
import json
import subprocess
import sys
import time

import numpy as np
import pytest
from scipy.linalg import expm

from geoindex.symplectic import standard_J, diamond
from geoindex.system import (SignatureMatrix, MorseSturmSystem,
                             ConstantCurvature, scenario, random_system,
                             iterate, closed_form_phi)
from geoindex.integrator import integrate_fundamental
from geoindex.indices import (theorem_A_check, prop55_check, bott_check,
                              spectral_index_spath)
from geoindex.fem import omega_morse_index
from geoindex.stability import (classify_stability, poincare_map,
                                instability_criterion, splitting_numbers,
                                geodesic_splitting_check, theorem_F_check,
                                _polar_path)
from geoindex.cli import (clm_property_suite, lemma54_sweep,
                          splitting_additivity_suite)

CATALOG = ('flat-torus(2)', 'great-circle', 'mobius-flat',
           'lorentz-flat(1,1)', 'twisted-rot(1.5707963267948966)')
OMEGA4 = (1.0, -1.0, 1j, np.exp(2j * np.pi / 3))


def test_criterion_01_closed_form_agreement():
    start = time.monotonic()
    sigs = [(1, 0), (0, 1), (2, 0), (1, 1), (2, 1), (1, 2), (3, 0)]
    pairs = [(-1.0, 0.0), (0.7, 0.3), (-0.4, 1.1)]
    checked = 0
    for p, q in sigs:
        for c, s in pairs:
            if checked == 20:
                break
            g = SignatureMatrix(p, q)
            n = p + q
            sysm = MorseSturmSystem(n=n, g=g, T=1.3, A=np.eye(n),
                                    Rhat=ConstantCurvature(c * np.eye(n)))
            sol = integrate_fundamental(sysm, 1.0, s)
            want = closed_form_phi(g, c, s, 1.3)
            assert np.linalg.norm(sol.samples[-1] - want) < 1e-8, (p, q, c, s)
            checked += 1
    assert checked == 20
    assert time.monotonic() - start < 5.0


def test_criterion_02_theorem_A_integer_identity():
    start = time.monotonic()
    systems = [scenario(name) for name in CATALOG]
    rng = np.random.default_rng(20250825)
    systems += [random_system(rng) for _ in range(50)]
    for sysm in systems:
        for w in OMEGA4:
            rep = theorem_A_check(sysm, w)
            assert rep.i_spec_spath == rep.i_geo - rep.nullity, \
                (sysm.label, w, rep)
    assert time.monotonic() - start < 120.0


def test_criterion_03_fem_anchor_values():
    start = time.monotonic()
    for n in (1, 2, 3):
        out = omega_morse_index(scenario(f'flat-torus({n})'), 1.0, n0=256)
        assert out['index'] == 0 and out['nullity_est'] == n
    gc = scenario('great-circle')
    assert omega_morse_index(gc, 1.0, n0=256)['index'] == 1
    assert omega_morse_index(gc, -1.0, n0=256)['index'] == 2
    for m in (2, 3, 4):
        out = omega_morse_index(iterate(gc, m), 1.0, n0=256)
        assert out['index'] == 2 * m - 1, (m, out)
    assert time.monotonic() - start < 30.0


def test_criterion_04_corollary_B_spectral_equals_morse():
    for name in ('flat-torus(1)', 'flat-torus(2)', 'great-circle',
                 'mobius-flat', 'twisted-rot(0.8)', 'hyperbolic-flat'):
        sysm = scenario(name)
        fem = omega_morse_index(sysm, 1.0)
        assert spectral_index_spath(sysm, 1.0) == fem['index'], (name, fem)


def test_criterion_05_bott_iteration_formula():
    names = ('flat-torus(1)', 'flat-torus(2)', 'great-circle', 'mobius-flat',
             'lorentz-flat(1,1)', 'twisted-rot(1.5707963267948966)',
             'hyperbolic-flat')
    for name in names:
        sysm = scenario(name)
        for m in range(1, 7):
            out = bott_check(sysm, m)
            assert out['equal'], (name, m, out)
            assert out['nullity_equal'], (name, m, out)
    rng = np.random.default_rng(777)
    for i in range(20):
        sysm = random_system(rng)
        for m in (2, 3, 4):
            out = bott_check(sysm, m)
            assert out['equal'], (i, sysm.label, m, out)
            assert out['nullity_equal'], (i, sysm.label, m, out)


def test_criterion_06_prop_55_kernel_count():
    for name in CATALOG + ('hyperbolic-flat',):
        sysm = scenario(name)
        for w in (1.0, -1.0, 1j, -1j):
            assert prop55_check(sysm, w), (name, w)


def test_criterion_07_lemma_54_sweep():
    out = lemma54_sweep(np.random.default_rng(54), trials=200, k_max=4)
    assert out['ok'], out


def test_criterion_08_theorem_D_contrapositive():
    rng = np.random.default_rng(8)
    systems = [scenario(n) for n in CATALOG + ('hyperbolic-flat',
                                               'flat-torus(1)')]
    systems += [random_system(rng) for _ in range(10)]
    for sysm in systems:
        rep = classify_stability(poincare_map(sysm))
        verdict = instability_criterion(sysm, spectral_index_spath(sysm, 1.0))
        assert not (rep.linearly_stable and verdict == 'unstable_by_parity'), \
            sysm.label
    # the parity anchor must actually fire somewhere
    anchor = scenario('flat-torus(1)')
    assert spectral_index_spath(anchor, 1.0) == 0
    assert anchor.orientation == 1
    assert instability_criterion(anchor, 0) == 'unstable_by_parity'


def test_criterion_09_clm_axioms_sweep():
    start = time.monotonic()
    out = clm_property_suite(np.random.default_rng(9), n_paths=100)
    assert out['ok'], out['failures']
    assert time.monotonic() - start < 60.0


def test_criterion_10_splitting_numbers():
    # vanishing away from the spectrum
    assert splitting_numbers(np.diag([2.0, 0.5]), 1.0) == (0, 0)
    R = np.array([[np.cos(0.7), -np.sin(0.7)], [np.sin(0.7), np.cos(0.7)]])
    assert splitting_numbers(R, np.exp(0.3j)) == (0, 0)
    # diamond additivity on random pairs
    out = splitting_additivity_suite(np.random.default_rng(10), pairs=20)
    assert out['ok'], out
    # independence of the connecting path: polar versus loop-composed polar
    J = standard_J(1)
    for M, w in ((R, np.exp(0.7j)), (np.diag([2.0, 0.5]), 1.0)):
        pol = _polar_path(M)

        def looped(t, pol=pol):
            return expm(2 * np.pi * t * J) @ pol(t)

        assert splitting_numbers(M, w) == splitting_numbers(M, w, path=looped)
    # geodesic-level values match the Poincare-map values
    assert geodesic_splitting_check(scenario('great-circle'), 1.0)['ok']
    assert geodesic_splitting_check(scenario('mobius-flat'), -1.0)['ok']


def test_criterion_11_theorem_F():
    for name in ('flat-torus(1)', 'flat-torus(2)', 'hyperbolic-flat'):
        out = theorem_F_check(scenario(name), max_m=6)
        assert out['applies'], (name, out)
        assert out['iterate_morse_indices'] == [0] * 6
        assert out['not_strongly_stable'], name


def test_criterion_12_deterministic_reports():
    args = [sys.executable, '-m', 'geoindex', 'analyze',
            '--scenario', 'twisted-rot(0.8)',
            '--analyses', 'indices,stability', '--omegas', 'roots:3',
            '--seed', '5']
    a = subprocess.run(args, capture_output=True)
    b = subprocess.run(args, capture_output=True)
    assert a.returncode == 0 and b.returncode == 0
    assert a.stdout == b.stdout
    json.loads(a.stdout)
