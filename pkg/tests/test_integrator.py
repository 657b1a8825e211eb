import numpy as np
import pytest

from geoindex.integrator import (
    IntegratorConfig, AccuracyError, integrate_fundamental, evaluate,
    endpoint_family)
from geoindex.system import (
    SignatureMatrix, scenario, random_system, iterate, twist_lift,
    closed_form_phi)


def test_matches_closed_form_constant_curvature():
    # lorentz signature, Rhat = c G-multiple handled by the decoupled formula
    for (p, q), c, s in (((1, 0), -1.0, 0.0), ((1, 1), 0.7, 0.3),
                         ((2, 1), -0.4, 1.1)):
        from geoindex.system import MorseSturmSystem, ConstantCurvature
        g = SignatureMatrix(p, q)
        n = p + q
        sys = MorseSturmSystem(n=n, g=g, T=1.3, A=np.eye(n),
                               Rhat=ConstantCurvature(c * np.eye(n)))
        sol = integrate_fundamental(sys, 1.0, s)
        want = closed_form_phi(g, c, s, 1.3)
        assert np.linalg.norm(sol.samples[-1] - want) < 1e-8


def test_symplecticity_defect_monitored():
    sys = scenario('great-circle')
    sol = integrate_fundamental(sys, 1.0, 0.0)
    assert sol.defect < 1e-9


def test_evaluate_interpolates_consistently():
    rng = np.random.default_rng(0)
    sys = random_system(rng)
    sol = integrate_fundamental(sys, 1.0, 0.2)
    # off-grid values agree with a fresh fine integration
    fine = integrate_fundamental(sys, 1.0, 0.2,
                                 IntegratorConfig(n0=4 * (len(sol.grid) - 1)))
    for frac in (0.237, 0.551, 0.9113):
        t = frac * sys.T
        assert np.linalg.norm(evaluate(sol, t) - evaluate(fine, t)) < 1e-7
    with pytest.raises(ValueError):
        evaluate(sol, 2 * sys.T)


def test_endpoint_family_matches_single_integrations():
    rng = np.random.default_rng(1)
    sys = random_system(rng)
    svals = np.array([0.0, 0.5, 2.0])
    ends = endpoint_family(sys, 1.0, svals)
    for s, end in zip(svals, ends):
        sol = integrate_fundamental(sys, 1.0, float(s))
        scale = max(1.0, np.abs(end).max())
        assert np.linalg.norm(end - sol.samples[-1]) / scale < 1e-7


def test_endpoint_family_budget_error():
    sys = scenario('great-circle')
    with pytest.raises(AccuracyError):
        endpoint_family(sys, 1.0, [0.0], rtol=1e-16, n0=8, max_steps=16)


def test_iterated_monodromy_factorizes():
    # A_d^m Psi_m(mT) = (A_d Psi(T))^m exactly up to integrator accuracy
    rng = np.random.default_rng(2)
    for _ in range(3):
        sys = random_system(rng)
        base = integrate_fundamental(sys, 1.0, 0.0)
        P = twist_lift(sys.A) @ base.samples[-1]
        for m in (2, 3):
            it = iterate(sys, m)
            sol = integrate_fundamental(it, 1.0, 0.0)
            Pm = twist_lift(it.A) @ sol.samples[-1]
            want = np.linalg.matrix_power(P, m)
            scale = max(1.0, np.abs(want).max())
            assert np.linalg.norm(Pm - want) / scale < 1e-7
