"""Galerkin oracle for omega-Morse indices of Riemannian systems.

Continuous piecewise-linear elements on a uniform mesh discretize the index
form int <u', v'> + <Rhat u, v> dt on the twisted loop space
E_omega = {u | u(0) = omega A u(T)}.  Only G = I is admissible; indefinite
signatures have infinite Morse index and fall outside the oracle's scope.
The discrete index is mesh-exact once N clears a curvature-dependent
threshold, so stability of the integer under two mesh doublings serves as
the convergence certificate.
"""
import numpy as np
from dataclasses import dataclass

from .integrator import AccuracyError
from .indices import geometric_index, nullity

__all__ = ['NotApplicableError', 'DiscretizedForm', 'assemble',
           'omega_morse_index', 'morse_index_theorem_check']


class NotApplicableError(ValueError):
    pass


@dataclass(frozen=True)
class DiscretizedForm:
    N: int
    H: np.ndarray            # Hermitian (nN) x (nN), node 0 eliminated
    omega: complex
    quad_order: int = 3


# 3-point Gauss-Legendre rule on [0, 1], exact through degree 5
_GAUSS_X = np.array([0.5 - np.sqrt(0.15), 0.5, 0.5 + np.sqrt(0.15)])
_GAUSS_W = np.array([5.0, 8.0, 5.0]) / 18.0


def _require_riemannian(sys):
    if sys.g.q != 0:
        raise NotApplicableError(
            "FEM oracle needs G = I; the index form is unbounded below "
            f"for signature ({sys.g.p}, {sys.g.q})")


def assemble(sys, omega, N):
    """Matrix of the index form on the constrained P1 space.

    The mesh is uniform with N intervals; the twist constraint eliminates
    node 0 by the substitution u_0 = omega A u_N, which folds the first
    element's couplings onto the last node block.  The derivative term is
    integrated exactly, the curvature term by 3-point Gauss per element.
    """
    _require_riemannian(sys)
    if N < 8:
        raise ValueError("need N >= 8 mesh intervals")
    omega = complex(omega)
    if abs(abs(omega) - 1) > 1e-12:
        raise ValueError("omega must have modulus 1")
    n = sys.n
    h = sys.T / N
    A = np.asarray(sys.A, dtype=float)

    # per-element 2x2-block matrices: stiffness is mesh-exact, the
    # curvature block uses the Gauss points of every element at once
    ts = (np.arange(N)[:, None] + _GAUSS_X[None, :]) * h     # (N, 3)
    R = sys.Rhat(ts.ravel()).reshape(N, 3, n, n)
    phi = np.stack([1.0 - _GAUSS_X, _GAUSS_X])               # (2, 3)
    wgt = h * _GAUSS_W
    curv = np.einsum('g,ag,bg,egij->eabij', wgt, phi, phi, R)
    I_n = np.eye(n)
    stiff = np.empty((2, 2, n, n))
    stiff[0, 0] = stiff[1, 1] = I_n / h
    stiff[0, 1] = stiff[1, 0] = -I_n / h
    elem = curv + stiff[None]                                # (N, 2, 2, n, n)

    real_twist = abs(omega.imag) < 1e-15
    dtype = float if real_twist else complex
    wA = omega.real * A if real_twist else omega * A
    H = np.zeros((N, N, n, n), dtype=dtype)
    # interior elements couple free nodes e and e+1 directly; element 0
    # sees node 0 = omega A u_N, so its couplings land on the last block
    for e in range(1, N):
        i, j = e - 1, e
        H[i, i] += elem[e, 0, 0]
        H[i, j] += elem[e, 0, 1]
        H[j, i] += elem[e, 1, 0]
        H[j, j] += elem[e, 1, 1]
    last = N - 1
    H[last, last] += wA.conj().T @ elem[0, 0, 0] @ wA
    H[last, 0] += wA.conj().T @ elem[0, 0, 1]
    H[0, last] += elem[0, 1, 0] @ wA
    H[0, 0] += elem[0, 1, 1]

    H = H.transpose(0, 2, 1, 3).reshape(N * n, N * n)
    H = 0.5 * (H + H.conj().T)
    return DiscretizedForm(N=N, H=H, omega=omega)


def _count(sys, omega, N):
    form = assemble(sys, omega, N)
    ev = np.linalg.eigvalsh(form.H)
    z = 10.0 * (1.0 + sys.Rhat.sup_norm(sys.T)) / N ** 2
    idx = int(np.sum(ev < -z))
    nul = int(np.sum(np.abs(ev) <= z))
    return idx, nul


def omega_morse_index(sys, omega, n0=32, n_max=4096):
    """Negative-eigenvalue count of the discretized form, mesh-certified.

    The zero band |ev| <= 10 (1 + sup||Rhat||) / N^2 separates the discrete
    kernel (which converges at rate N^-2) from true negative eigenvalues
    (bounded away at rate N^-1).  N doubles until index and nullity repeat
    across two consecutive doublings.
    """
    _require_riemannian(sys)
    history = []
    N = n0
    while N <= n_max:
        history.append(_count(sys, omega, N))
        if len(history) >= 3 and history[-1] == history[-2] == history[-3]:
            idx, nul = history[-1]
            return {'index': idx, 'nullity_est': nul, 'N_used': N}
        N *= 2
    raise AccuracyError(
        f"FEM index did not stabilize by N = {n_max} (history {history})")


def morse_index_theorem_check(sys, omega):
    """Morse index theorem: FEM index + twist nullity = graph-pair index.

    The variational count ties to the Maslov-type count through
    i_Mor(conj(omega)) + dim ker(A - omega I) = i_geo(omega).
    """
    omega = complex(omega)
    fem = omega_morse_index(sys, np.conj(omega))
    nu = nullity(sys.A, omega)
    clm = geometric_index(sys, omega)
    return {'fem_index': fem['index'], 'twist_nullity': nu,
            'clm_index': clm, 'fem_nullity': fem['nullity_est'],
            'ok': fem['index'] + nu == clm}
