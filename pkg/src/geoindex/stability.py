"""Stability analysis of the linearized Poincare map.

Floquet spectrum, semisimplicity, linear stability, Krein types, splitting
numbers via the limit definition, index hyperbolicity, the strong-stability
test and the parity instability certificate.  The parity criterion is
one-sided: it can certify instability, never stability.
"""
import warnings

import numpy as np
from dataclasses import dataclass, field
from fractions import Fraction

from scipy.linalg import expm, logm, sqrtm

from .symplectic import (standard_J, is_symplectic, krein_type, KreinType,
                         SpectralError)
from .system import twist_lift
from .maslov import LagrangianPath, graph_path, clm_index
from .indices import fundamental_solution

__all__ = ['ClusteredSpectrumError', 'StabilityReport', 'poincare_map',
           'classify_stability', 'splitting_numbers',
           'geodesic_splitting_check', 'instability_criterion',
           'index_hyperbolic_check', 'strong_stability_check',
           'theorem_F_check', 'perturbation_lemma_check']


class ClusteredSpectrumError(RuntimeError):
    pass


@dataclass(frozen=True)
class StabilityReport:
    P: np.ndarray
    eigenvalues: tuple          # ((lambda, algebraic, geometric), ...)
    on_circle: bool
    semisimple: bool
    linearly_stable: bool
    marginal: bool
    krein: tuple = ()
    orientation: int = 0


def poincare_map(sys):
    """P(T) = A_d Psi_{1,0}(T)."""
    sol = fundamental_solution(sys, 1.0, 0.0)
    return twist_lift(sys.A) @ sol.samples[-1]


def _cluster(eigs, tol):
    """Greedy clustering of close eigenvalues; returns (center, count) pairs."""
    remaining = list(eigs)
    out = []
    while remaining:
        lam = remaining.pop(0)
        group = [lam]
        rest = []
        for mu in remaining:
            (group if abs(mu - lam) <= tol else rest).append(mu)
        remaining = rest
        out.append((complex(np.mean(group)), len(group)))
    return out


def classify_stability(P, tol=None):
    """Linear stability per spectrum on the unit circle plus semisimplicity.

    Geometric multiplicities come from a rank test at threshold tol; when a
    singular value falls within a decade of the threshold the verdict is
    flagged marginal instead of silently classified.
    """
    P = np.asarray(P, dtype=float)
    scale = max(1.0, np.linalg.norm(P, 2))
    if tol is None:
        tol = 1e-8 * scale
    eigs = np.linalg.eigvals(P)
    clusters = _cluster(eigs, tol)
    dim = P.shape[0]
    marginal = False
    info = []
    for lam, alg in clusters:
        sv = np.linalg.svd(P - lam * np.eye(dim), compute_uv=False)
        geo = int(np.sum(sv < tol))
        geo = max(geo, 1)
        near = np.sum((sv >= tol) & (sv < 10 * tol))
        if near:
            marginal = True
        info.append((lam, alg, geo))
    on_circle = bool(np.all(np.abs(np.abs(eigs) - 1) <= tol))
    semisimple = all(alg == geo for _, alg, geo in info)
    kreins = []
    for lam, alg, geo in info:
        if abs(abs(lam) - 1) <= tol and lam.imag >= -tol:
            try:
                kreins.append(krein_type(P, lam / abs(lam)))
            except SpectralError:
                marginal = True
    return StabilityReport(P=P, eigenvalues=tuple(info),
                           on_circle=on_circle, semisimple=semisimple,
                           linearly_stable=bool(on_circle and semisimple),
                           marginal=marginal, krein=tuple(kreins))


def _polar_path(M):
    """Symplectic path from I to M: polar interpolation U^t S^t.

    The polar factors of a symplectic matrix are symplectic, so every
    interpolant stays in the group; the path is canonical enough to serve
    as the reference connecting path of the limit definition.
    """
    M = np.asarray(M, dtype=float)
    S = np.real(sqrtm(M.T @ M))
    U = M @ np.linalg.inv(S)
    with warnings.catch_warnings():
        # scipy warns at ~1e-13 reconstruction error; checked below anyway
        warnings.simplefilter('ignore', RuntimeWarning)
        lS = np.real(logm(S))
    if np.linalg.norm(expm(lS) - S) > 1e-8 * max(1.0, np.linalg.norm(S)):
        raise ClusteredSpectrumError("stretch factor log failed")
    # the orthogonal symplectic factor is a unitary in disguise; its log is
    # taken there, where the principal branch always exists, and mapped
    # back (the plain real matrix log fails at rotation angle pi)
    n = M.shape[0] // 2
    u = U[:n, :n] + 1j * U[n:, :n]
    lu = logm(u)
    lU = np.block([[lu.real, -lu.imag], [lu.imag, lu.real]])
    err = np.linalg.norm(expm(lU) - U)
    if err > 1e-8 * max(1.0, np.linalg.norm(U)):
        raise ClusteredSpectrumError(f"polar path log failed (defect {err:.3e})")
    return lambda t: expm(t * lU) @ expm(t * lS)


def _iota_path(gamma, omega, two_n, npts=601):
    """iota_omega of a symplectic matrix path via the graph pair."""
    grid = np.linspace(0.0, 1.0, npts)
    L0 = np.vstack([np.eye(two_n), omega * np.eye(two_n)])
    return clm_index(L0, graph_path(gamma, grid, two_n))


def _unit_angles(M, tol):
    eigs = np.linalg.eigvals(M)
    unit = eigs[np.abs(np.abs(eigs) - 1) <= tol]
    return np.angle(unit / np.abs(unit))


def splitting_numbers(M, omega, theta0=1e-3, path=None):
    """S_M^{\\pm}(omega) by the limit definition along a connecting path.

    The index jump of theta -> iota_{omega e^{i theta}} across theta = 0 is
    evaluated at +-theta0 and certified by agreement at theta0 / 2; theta0
    shrinks below half the angular gap to the nearest other unit eigenvalue.
    The default connecting path is the polar interpolation from I to M; any
    callable t -> symplectic matrix with the same endpoints gives the same
    numbers.
    """
    M = np.asarray(M, dtype=float)
    if not is_symplectic(M):
        raise ValueError("splitting numbers need a symplectic matrix")
    omega = complex(omega)
    omega /= abs(omega)
    two_n = M.shape[0]
    scale = max(1.0, np.linalg.norm(M, 2))
    angles = _unit_angles(M, 1e-8 * scale)
    w_ang = float(np.angle(omega))
    gaps = [abs((a - w_ang + np.pi) % (2 * np.pi) - np.pi) for a in angles]
    gaps = [g for g in gaps if g > 1e-8]
    if gaps:
        theta0 = min(theta0, 0.5 * min(gaps))
    if theta0 < 1e-7:
        raise ClusteredSpectrumError(
            "unit eigenvalues too close to omega to separate")
    gamma = path if path is not None else _polar_path(M)
    base = _iota_path(gamma, omega, two_n)
    # every connecting path starts at I, whose graph crosses the reference
    # exactly when omega = 1; the perturbed angles lose that left-endpoint
    # crossing, so the raw index difference sits n below the splitting
    # number there
    shift = two_n // 2 if abs(omega - 1) < 1e-12 else 0
    out = []
    for th in (theta0, theta0 / 2):
        sp = _iota_path(gamma, omega * np.exp(1j * th), two_n) - base + shift
        sm = _iota_path(gamma, omega * np.exp(-1j * th), two_n) - base + shift
        out.append((sp, sm))
    if out[0] != out[1]:
        raise ClusteredSpectrumError(
            f"splitting numbers did not stabilize: {out}")
    return out[0]


def geodesic_splitting_check(sys, omega, theta0=0.05):
    """Variational splitting numbers against the matrix-route values.

    The geodesic splitting numbers are the jumps of the FEM omega-Morse
    index across the given omega; they must match the splitting numbers of
    the Poincare map.  The omega-Morse index is constant between eigenvalue
    angles of the Poincare map, so the probe angle only needs to stay
    within the adjacent angular gaps; a generous default keeps the shifted
    near-zero modes clear of the FEM kernel band.
    """
    from .fem import omega_morse_index, _require_riemannian
    _require_riemannian(sys)
    omega = complex(omega)
    omega /= abs(omega)
    P = poincare_map(sys)
    scale = max(1.0, np.linalg.norm(P, 2))
    angles = _unit_angles(P, 1e-8 * scale)
    w_ang = float(np.angle(omega))
    gaps = [abs((a - w_ang + np.pi) % (2 * np.pi) - np.pi) for a in angles]
    gaps = [g for g in gaps if g > 1e-8]
    if gaps:
        theta0 = min(theta0, 0.5 * min(gaps))
    if theta0 < 1e-3:
        raise ClusteredSpectrumError(
            "angular gap too small for the FEM probe to resolve")
    mat = splitting_numbers(P, omega)
    # probe angles shift kernel modes to eigenvalues of size ~theta0 / N,
    # which only clear the FEM zero band on finer meshes
    n0 = 256
    base = omega_morse_index(sys, omega, n0=n0)['index']
    fem = []
    for th in (theta0, theta0 / 2):
        sp = omega_morse_index(sys, omega * np.exp(1j * th),
                               n0=n0)['index'] - base
        sm = omega_morse_index(sys, omega * np.exp(-1j * th),
                               n0=n0)['index'] - base
        fem.append((sp, sm))
    if fem[0] != fem[1]:
        raise ClusteredSpectrumError(
            f"FEM splitting jump did not stabilize: {fem}")
    return {'fem': fem[0], 'matrix': mat, 'ok': fem[0] == mat}


def instability_criterion(sys, i_spec):
    """Parity certificate: 'unstable_by_parity' or 'silent'.

    Oriented systems are unstable when i_spec + n is odd, nonoriented ones
    when it is even.  Sufficient only: silence never claims stability.
    """
    parity = (i_spec + sys.n) % 2
    if sys.orientation == 1 and parity == 1:
        return 'unstable_by_parity'
    if sys.orientation == -1 and parity == 0:
        return 'unstable_by_parity'
    return 'silent'


def _rational_angle(theta, max_den):
    """Fraction theta / 2 pi if it has denominator <= max_den, else None."""
    x = (theta / (2 * np.pi)) % 1.0
    fr = Fraction(x).limit_denominator(max_den)
    if abs(x - float(fr)) < 1e-9:
        return fr
    return None


def index_hyperbolic_check(sys, max_m=6):
    """Two routes to index hyperbolicity.

    Variational route: all iterate Morse indices up to max_m vanish (needs
    G = I).  Spectral route: at every unit eigenvalue the splitting numbers
    vanish when the angle is rational with denominator <= max_m and agree
    with each other otherwise.  Rationality beyond max_m is undecidable
    numerically; the cutoff is reported.
    """
    from .system import iterate
    evidence = {'max_m': max_m}
    if sys.g.q == 0:
        from .fem import omega_morse_index
        idx = [omega_morse_index(iterate(sys, m), 1.0)['index']
               for m in range(1, max_m + 1)]
        evidence['iterate_morse_indices'] = idx
        if all(v == 0 for v in idx):
            evidence['route'] = 'variational'
            return {'is_index_hyperbolic': True, 'evidence': evidence}
    P = poincare_map(sys)
    scale = max(1.0, np.linalg.norm(P, 2))
    angles = _unit_angles(P, 1e-8 * scale)
    verdicts = []
    ok = True
    for th in sorted(set(np.round(angles, 10))):
        w = np.exp(1j * th)
        sp, sm = splitting_numbers(P, w)
        fr = _rational_angle(th, max_m)
        if fr is not None:
            good = (sp == 0 and sm == 0)
        else:
            good = (sp == sm)
        verdicts.append({'omega': complex(w), 'splitting': (sp, sm),
                         'angle_rational': None if fr is None else str(fr),
                         'ok': good})
        ok = ok and good
    evidence['route'] = 'spectral'
    evidence['unit_eigenvalues'] = verdicts
    return {'is_index_hyperbolic': ok, 'evidence': evidence}


def strong_stability_check(P):
    """Ekeland test: stable, Krein-definite spectrum, and +-1 not present."""
    rep = classify_stability(P)
    if not rep.linearly_stable:
        return False
    tol = 1e-8 * max(1.0, np.linalg.norm(rep.P, 2))
    eigs = np.linalg.eigvals(rep.P)
    if np.any(np.abs(eigs - 1) <= tol) or np.any(np.abs(eigs + 1) <= tol):
        return False
    return all(k.definite for k in rep.krein)


def theorem_F_check(sys, max_m=6):
    """Vanishing iterate Morse indices force failure of strong stability."""
    from .system import iterate
    from .fem import omega_morse_index
    idx = [omega_morse_index(iterate(sys, m), 1.0)['index']
           for m in range(1, max_m + 1)]
    applies = all(v == 0 for v in idx)
    out = {'applies': applies, 'iterate_morse_indices': idx}
    if applies:
        out['not_strongly_stable'] = not strong_stability_check(
            poincare_map(sys))
    return out


def perturbation_lemma_check(T, deltas=(1e-3, 5e-4)):
    """Rotating a stable map off its unit eigenvalues lands in Sp^+.

    For the two smallest deltas, det(e^{+-delta J} T - I) must be positive,
    the sign cut defining the positive component of the regular part.
    """
    T = np.asarray(T, dtype=float)
    if not classify_stability(T).linearly_stable:
        raise ValueError("perturbation lemma applies to stable maps only")
    J = standard_J(T.shape[0] // 2)
    I = np.eye(T.shape[0])
    for d in sorted(deltas)[:2]:
        for sgn in (1.0, -1.0):
            if np.linalg.det(expm(sgn * d * J) @ T - I) <= 0:
                return False
    return True
