"""Fundamental solution Psi_{c,s}(t) of dz/dt = J D_{c,s}(t) z by RK4.

Fixed-step classical Runge-Kutta on the matrix equation, grid doubled until
both the monitored symplecticity defect and the endpoint Richardson
difference fall below the configured bound.  Symplecticity is monitored,
never enforced.
"""
import numpy as np
from dataclasses import dataclass

from .symplectic import standard_J
from .system import hamiltonian_coefficient

__all__ = ['IntegratorConfig', 'FundamentalSolution', 'AccuracyError',
           'integrate_fundamental', 'evaluate', 'endpoint_family']


class AccuracyError(RuntimeError):
    def __init__(self, msg, defect=None):
        super().__init__(msg)
        self.defect = defect


@dataclass(frozen=True)
class IntegratorConfig:
    n0: int = 64
    defect_bound: float = None   # default: 1e-10 * max(1, sup||D|| * T)
    max_steps: int = 2 ** 20


@dataclass(frozen=True)
class FundamentalSolution:
    grid: np.ndarray
    samples: np.ndarray          # (N+1, 2n, 2n)
    defect: float
    params: tuple                # (c, s)
    sys: object

    @property
    def T(self):
        return float(self.grid[-1])

    def __call__(self, t):
        return evaluate(self, t)


def _k_tables(sys, c, s, N):
    """J D_{c,s} evaluated at the 2N+1 half-grid points."""
    n = sys.n
    T = sys.T
    th = np.linspace(0.0, T, 2 * N + 1)
    R = sys.Rhat(th)                      # (2N+1, n, n)
    D = np.zeros((2 * N + 1, 2 * n, 2 * n))
    D[:, :n, :n] = sys.G
    D[:, n:, n:] = -c * R - s * sys.G
    J = standard_J(n)
    return th, J @ D


def _rk4_path(K, T, N):
    """Integrate with the precomputed coefficient table; returns all samples."""
    dim = K.shape[-1]
    h = T / N
    out = np.empty((N + 1, dim, dim))
    psi = np.eye(dim)
    out[0] = psi
    for i in range(N):
        K0, Km, K1 = K[2 * i], K[2 * i + 1], K[2 * i + 2]
        k1 = K0 @ psi
        k2 = Km @ (psi + 0.5 * h * k1)
        k3 = Km @ (psi + 0.5 * h * k2)
        k4 = K1 @ (psi + h * k3)
        psi = psi + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        out[i + 1] = psi
    return out


def _sup_D(sys, c, s):
    ts = np.linspace(0.0, sys.T, 65)
    return max(np.linalg.norm(hamiltonian_coefficient(sys, c, s, t), 2)
               for t in ts)


def _path_defect(samples, J):
    """Relative symplecticity defect: Psi* J Psi - J scales like ||Psi||^2."""
    r = np.einsum('kji,jl,klm->kim', samples, J, samples) - J
    norms = np.sqrt((r ** 2).sum(axis=(1, 2)))
    mags = np.maximum(1.0, np.abs(samples).max(axis=(1, 2))) ** 2
    return float((norms / mags).max())


def integrate_fundamental(sys, c, s, config=None):
    cfg = config or IntegratorConfig()
    delta = cfg.defect_bound
    if delta is None:
        delta = 1e-10 * max(1.0, _sup_D(sys, c, s) * sys.T)
    J = standard_J(sys.n)
    N = cfg.n0
    prev_end = None
    best = None
    while N <= cfg.max_steps:
        _, K = _k_tables(sys, c, s, N)
        samples = _rk4_path(K, sys.T, N)
        defect = _path_defect(samples, J)
        end_scale = max(1.0, float(np.abs(samples[-1]).max()))
        end_diff = np.inf if prev_end is None \
            else float(np.linalg.norm(samples[-1] - prev_end)) / end_scale
        best = FundamentalSolution(grid=np.linspace(0.0, sys.T, N + 1),
                                   samples=samples, defect=defect,
                                   params=(c, s), sys=sys)
        if defect <= delta and end_diff <= delta:
            return best
        prev_end = samples[-1]
        N *= 2
    raise AccuracyError(
        f"refinement budget exhausted at {cfg.max_steps} steps "
        f"(defect {best.defect:.3e}, bound {delta:.3e})", defect=best.defect)


def evaluate(sol, t):
    """Psi(t) by one RK4 sub-step from the last grid point <= t."""
    T = sol.T
    if t < -1e-12 or t > T * (1 + 1e-12):
        raise ValueError(f"t={t} outside [0, {T}]")
    t = float(np.clip(t, 0.0, T))
    grid = sol.grid
    i = int(np.searchsorted(grid, t, side='right') - 1)
    i = min(max(i, 0), len(grid) - 2)
    h = t - grid[i]
    if h <= 1e-15 * max(1.0, T):
        return sol.samples[i]
    if abs(grid[i + 1] - t) <= 1e-15 * max(1.0, T):
        return sol.samples[i + 1]
    sys, (c, s) = sol.sys, sol.params

    def K(tt):
        return standard_J(sys.n) @ hamiltonian_coefficient(sys, c, s, tt)

    psi = sol.samples[i]
    K0, Km, K1 = K(grid[i]), K(grid[i] + h / 2), K(grid[i] + h)
    k1 = K0 @ psi
    k2 = Km @ (psi + 0.5 * h * k1)
    k3 = Km @ (psi + 0.5 * h * k2)
    k4 = K1 @ (psi + h * k3)
    return psi + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def endpoint_family(sys, c, s_values, rtol=1e-9, n0=128, max_steps=2 ** 14,
                    fixed_n=None, return_n=False):
    """Psi_{c,s}(T) for a whole array of s values, integrated in one batch.

    The s-dependence of the coefficient is linear (J D_{c,s} = J D_{c,0}
    - s J E with E = blockdiag(0, G)), so one coefficient table serves every
    s.  Returns an array of shape (len(s), 2n, 2n).
    """
    s_values = np.atleast_1d(np.asarray(s_values, dtype=float))
    n = sys.n
    E = np.zeros((2 * n, 2 * n))
    E[n:, n:] = -sys.G
    J = standard_J(n)
    JE = J @ E
    N = fixed_n if fixed_n is not None else n0
    prev = None
    while N <= max(max_steps, fixed_n or 0):
        _, K0tab = _k_tables(sys, c, 0.0, N)
        h = sys.T / N
        psi = np.broadcast_to(np.eye(2 * n), (len(s_values), 2 * n, 2 * n)).copy()
        sJE = s_values[:, None, None] * JE
        for i in range(N):
            Ka = K0tab[2 * i] + sJE
            Kb = K0tab[2 * i + 1] + sJE
            Kc = K0tab[2 * i + 2] + sJE
            k1 = Ka @ psi
            k2 = Kb @ (psi + 0.5 * h * k1)
            k3 = Kb @ (psi + 0.5 * h * k2)
            k4 = Kc @ (psi + h * k3)
            psi = psi + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if fixed_n is not None:
            return (psi, N) if return_n else psi
        if prev is not None:
            diff = np.abs(psi - prev).max(axis=(1, 2))
            mags = np.maximum(1.0, np.abs(psi).max(axis=(1, 2)))
            if bool(np.all(diff <= rtol * mags)):
                return (psi, N) if return_n else psi
        prev = psi
        N *= 2
    raise AccuracyError("endpoint family did not converge "
                        f"within {max_steps} steps")
