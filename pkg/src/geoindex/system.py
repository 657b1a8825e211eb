"""Twisted Morse-Sturm systems: -G u'' + Rhat(t) u = 0, u(0) = A u(T).

The data of a reduced closed geodesic: signature matrix G = diag(I_p, -I_q),
period T, g-orthogonal twist A and the symmetric curvature path Rhat.  The
first-order form is dz/dt = J D_{c,s}(t) z with z = (G u', u).
"""
import re
import numpy as np
from dataclasses import dataclass, field

from .symplectic import standard_J

__all__ = [
    'SignatureMatrix', 'ConstantCurvature', 'FourierCurvature',
    'IteratedCurvature', 'MorseSturmSystem', 'validate', 'iterate',
    'hamiltonian_coefficient', 'twist_lift', 'closed_form_phi',
    'scenario', 'SCENARIO_NAMES', 'random_system',
    'system_to_dict', 'system_from_dict',
]


@dataclass(frozen=True)
class SignatureMatrix:
    """diag(I_p, -I_q)."""
    p: int
    q: int

    def __post_init__(self):
        if self.p < 0 or self.q < 0 or self.p + self.q < 1:
            raise ValueError("need p, q >= 0 with p + q >= 1")

    @property
    def n(self):
        return self.p + self.q

    @property
    def matrix(self):
        return np.diag(np.r_[np.ones(self.p), -np.ones(self.q)])


class ConstantCurvature:
    """Rhat(t) = S for a fixed symmetric matrix S."""

    def __init__(self, S):
        self.S = np.array(S, dtype=float)
        self.S.setflags(write=False)

    def __call__(self, t):
        t = np.asarray(t)
        if t.ndim == 0:
            return self.S
        return np.broadcast_to(self.S, t.shape + self.S.shape)

    def sup_norm(self, T, samples=129):
        return np.linalg.norm(self.S, 2)


class FourierCurvature:
    """Rhat(t) = sum_k cos(2 pi k t / T) C_k + sin(2 pi k t / T) S_k."""

    def __init__(self, T, terms):
        # terms: list of (k, cos_coeff, sin_coeff), coefficients symmetric n x n
        self.T = float(T)
        self.terms = tuple((int(k), np.array(C, dtype=float), np.array(S, dtype=float))
                           for k, C, S in terms)
        for _, C, S in self.terms:
            C.setflags(write=False)
            S.setflags(write=False)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        w = 2 * np.pi / self.T
        n = self.terms[0][1].shape[0]
        out = np.zeros(t.shape + (n, n))
        for k, C, S in self.terms:
            ck = np.cos(w * k * t)
            sk = np.sin(w * k * t)
            out += ck[..., None, None] * C + sk[..., None, None] * S
        return out

    def sup_norm(self, T, samples=129):
        ts = np.linspace(0.0, T, samples)
        return max(np.linalg.norm(self(t), 2) for t in ts)


class IteratedCurvature:
    """Periodic extension Rhat(t + kT) = (A^T)^k Rhat(t) A^k of a base path.

    This is what the m-fold iterate of a twisted system carries; it reduces to
    the base path when A commutes with it.
    """

    def __init__(self, base, A, T, m):
        self.base = base
        self.A = np.array(A, dtype=float)
        self.A.setflags(write=False)
        self.T = float(T)
        self.m = int(m)

    def _power(self, k):
        if not hasattr(self, '_powers'):
            self._powers = {}
        if k not in self._powers:
            self._powers[k] = np.linalg.matrix_power(self.A, k)
        return self._powers[k]

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if t.ndim == 0:
            k = min(max(int(np.floor(t / self.T + 1e-12)), 0), self.m - 1)
            Ak = self._power(k)
            return Ak.T @ self.base(float(t) - k * self.T) @ Ak
        k = np.clip(np.floor(t / self.T + 1e-12).astype(int), 0, self.m - 1)
        vals = self.base(t - k * self.T)
        out = np.empty_like(vals)
        for kk in np.unique(k):
            Ak = self._power(int(kk))
            sel = k == kk
            out[sel] = Ak.T @ vals[sel] @ Ak
        return out

    def sup_norm(self, T, samples=129):
        # conjugation by a g-orthogonal A can change the 2-norm; sample
        ts = np.linspace(0.0, T, samples)
        return max(np.linalg.norm(self(t), 2) for t in ts)


@dataclass(frozen=True)
class MorseSturmSystem:
    n: int
    g: SignatureMatrix
    T: float
    A: np.ndarray
    Rhat: object
    causal: str = "spacelike"
    label: str = ""
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        A.setflags(write=False)
        object.__setattr__(self, 'A', A)

    @property
    def G(self):
        return self.g.matrix

    @property
    def orientation(self):
        return 1 if np.linalg.det(self.A) > 0 else -1


def validate(sys):
    """Returns a list of violated constraints (empty means valid)."""
    out = []
    G = sys.G
    A = sys.A
    if A.shape != (sys.n, sys.n):
        return [f"twist shape {A.shape} does not match n={sys.n}"]
    res = np.linalg.norm(A.T @ G @ A - G)
    if res > 1e-10:
        out.append(f"A not G-orthogonal (residual {res:.3e})")
    det = abs(np.linalg.det(A))
    if abs(det - 1) > 1e-10:
        out.append(f"|det A| = {det:.12f} != 1")
    if sys.T <= 0:
        out.append("period T must be positive")
    ts = np.linspace(0.0, sys.T, 33)
    sym = max(np.linalg.norm(sys.Rhat(t) - sys.Rhat(t).T) for t in ts)
    if sym > 1e-10:
        out.append(f"Rhat not symmetric (residual {sym:.3e})")
    compat = np.linalg.norm(sys.Rhat(sys.T) - A.T @ sys.Rhat(0.0) @ A)
    if compat > 1e-10:
        out.append(f"iteration compatibility Rhat(T) = A^T Rhat(0) A "
                   f"(residual {compat:.3e})")
    if sys.causal not in ("spacelike", "timelike"):
        out.append(f"unknown causal tag {sys.causal!r}")
    return out


def iterate(sys, m):
    """The m-fold iterate: period mT, twist A^m, conjugation-extended Rhat."""
    if m < 1:
        raise ValueError("m must be positive")
    if m == 1:
        return sys
    bad = validate(sys)
    if bad:
        raise ValueError("cannot iterate invalid system: " + "; ".join(bad))
    base = sys.Rhat
    # always keep the base-period marker: downstream index computations
    # factor through the base monodromy, which stays well conditioned where
    # the iterated fundamental solution does not
    if isinstance(base, IteratedCurvature):
        ext = IteratedCurvature(base.base, base.A, base.T, base.m * m)
    else:
        ext = IteratedCurvature(base, sys.A, sys.T, m)
    return MorseSturmSystem(
        n=sys.n, g=sys.g, T=m * sys.T,
        A=np.linalg.matrix_power(sys.A, m), Rhat=ext,
        causal=sys.causal, label=f"{sys.label or 'system'}^({m})")


def hamiltonian_coefficient(sys, c, s, t):
    """D_{c,s}(t) = blockdiag(G, -c Rhat(t) - s G)."""
    if t < -1e-12 or t > sys.T + 1e-12:
        raise ValueError(f"t={t} outside [0, {sys.T}]")
    n = sys.n
    D = np.zeros((2 * n, 2 * n))
    D[:n, :n] = sys.G
    D[n:, n:] = -c * sys.Rhat(float(np.clip(t, 0.0, sys.T))) - s * sys.G
    return D


def twist_lift(A):
    """A_d = blockdiag(A^-T, A), symplectic whenever A is g-orthogonal."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    out = np.zeros((2 * n, 2 * n))
    out[:n, :n] = np.linalg.inv(A).T
    out[n:, n:] = A
    return out


def _cosx(x, t):
    """C(x, t) = cosh(sqrt(x) t), analytically continued to x < 0."""
    if x >= 0:
        return np.cosh(np.sqrt(x) * t)
    return np.cos(np.sqrt(-x) * t)


def _sincx(x, t):
    """S(x, t) = sinh(sqrt(x) t)/sqrt(x), with S(0, t) = t, continued to x < 0."""
    if abs(x) < 1e-30:
        return t
    if x > 0:
        r = np.sqrt(x)
        return np.sinh(r * t) / r
    r = np.sqrt(-x)
    return np.sin(r * t) / r


def closed_form_phi(g, c, s, t):
    """Fundamental solution of dz/dt = J B_{c,s} z for constant Rhat = cI.

    B_{c,s} = blockdiag(G, -cI - sG).  In coordinates (p_+, p_-, q_+, q_-)
    the solution decouples into cosh/sinh blocks with lambda = sqrt(s+c) on
    the positive part of G and mu = sqrt(s-c) on the negative part; negative
    arguments continue analytically to cos/sin.
    """
    p, q = g.p, g.q
    n = p + q
    xp = s + c   # lambda^2, G-positive block
    xm = s - c   # mu^2, G-negative block
    Phi = np.zeros((2 * n, 2 * n))
    # p-block rows (momenta), then q-block rows (positions)
    for i in range(p):
        Phi[i, i] = _cosx(xp, t)
        Phi[i, n + i] = xp * _sincx(xp, t)
        Phi[n + i, i] = _sincx(xp, t)
        Phi[n + i, n + i] = _cosx(xp, t)
    for j in range(q):
        i = p + j
        Phi[i, i] = _cosx(xm, t)
        Phi[i, n + i] = -xm * _sincx(xm, t)
        Phi[n + i, i] = -_sincx(xm, t)
        Phi[n + i, n + i] = _cosx(xm, t)
    return Phi


def _constant(sys_n, value):
    return ConstantCurvature(value * np.eye(sys_n))


def _rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


SCENARIO_NAMES = (
    "flat-torus(n)", "great-circle", "mobius-flat",
    "lorentz-flat(p,q)", "twisted-rot(theta)", "hyperbolic-flat",
)


def scenario(name):
    """Built-in catalog of closed-form systems."""
    m = re.fullmatch(r"\s*([a-z-]+)\s*(?:\(([^)]*)\))?\s*", name)
    if not m:
        raise KeyError(f"unknown scenario {name!r}")
    base, args = m.group(1), m.group(2)
    argv = [a.strip() for a in args.split(",")] if args else []

    if base == "flat-torus":
        n = int(argv[0]) if argv else 1
        return MorseSturmSystem(n=n, g=SignatureMatrix(n, 0), T=1.0,
                                A=np.eye(n), Rhat=_constant(n, 0.0),
                                label=f"flat-torus({n})")
    if base == "great-circle":
        return MorseSturmSystem(n=1, g=SignatureMatrix(1, 0), T=2 * np.pi,
                                A=np.eye(1), Rhat=_constant(1, -1.0),
                                label="great-circle")
    if base == "mobius-flat":
        return MorseSturmSystem(n=1, g=SignatureMatrix(1, 0), T=1.0,
                                A=-np.eye(1), Rhat=_constant(1, 0.0),
                                label="mobius-flat")
    if base == "lorentz-flat":
        p, q = (int(argv[0]), int(argv[1])) if argv else (1, 1)
        n = p + q
        return MorseSturmSystem(n=n, g=SignatureMatrix(p, q), T=1.0,
                                A=np.eye(n), Rhat=_constant(n, 0.0),
                                causal="timelike" if q else "spacelike",
                                label=f"lorentz-flat({p},{q})")
    if base == "twisted-rot":
        theta = float(argv[0]) if argv else np.pi / 2
        return MorseSturmSystem(n=2, g=SignatureMatrix(2, 0), T=1.0,
                                A=_rotation(theta), Rhat=_constant(2, 0.0),
                                label=f"twisted-rot({theta:g})")
    if base == "hyperbolic-flat":
        return MorseSturmSystem(n=1, g=SignatureMatrix(1, 0), T=1.0,
                                A=np.eye(1), Rhat=_constant(1, 1.0),
                                label="hyperbolic-flat")
    raise KeyError(f"unknown scenario {name!r}")


def random_system(rng, n_max=3, riemannian=False):
    """A random valid system: random signature, g-orthogonal twist, Fourier Rhat.

    The sine-only Fourier part vanishes at both endpoints, so the iteration
    compatibility constraint Rhat(T) = A^T Rhat(0) A holds by construction
    (the constant part is a multiple of G, which every g-orthogonal A fixes).
    """
    n = int(rng.integers(1, n_max + 1))
    if riemannian:
        p, q = n, 0
    else:
        p = int(rng.integers(0, n + 1))
        q = n - p
    g = SignatureMatrix(p, q)
    G = g.matrix
    # exp of a g-skew generator is g-orthogonal; optional reflection flips det
    K = rng.normal(size=(n, n))
    K = (K - K.T) / 2
    from scipy.linalg import expm
    A = expm(G @ K)
    if n >= 1 and rng.random() < 0.5:
        R = np.eye(n)
        R[n - 1, n - 1] = -1.0
        A = A @ R
    T = float(rng.uniform(0.5, 2.5))
    # keep the constant part away from zero: Rhat(0) = c0 G controls the
    # tangency scale of det(Psi(t) - I) at t = 0, and a tiny c0 creates
    # crossings too close to the endpoint to resolve
    c0 = float(rng.uniform(0.4, 1.5)) * (1.0 if rng.random() < 0.5 else -1.0)
    terms = [(0, c0 * G, np.zeros((n, n)))]
    for k in (1, 2):
        S = rng.normal(size=(n, n))
        terms.append((k, np.zeros((n, n)), 0.5 * (S + S.T) * 0.7))
    sysm = MorseSturmSystem(n=n, g=g, T=T, A=A,
                            Rhat=FourierCurvature(T, terms),
                            causal="spacelike",
                            label=f"random(n={n},p={p},q={q})")
    bad = validate(sysm)
    if bad:
        raise RuntimeError("random_system produced invalid data: " + "; ".join(bad))
    return sysm


def system_to_dict(sys):
    d = {
        "n": sys.n,
        "G": {"p": sys.g.p, "q": sys.g.q},
        "T": sys.T,
        "A": [float(x) for x in sys.A.ravel()],
        "causal": sys.causal,
        "label": sys.label,
    }
    R = sys.Rhat
    if isinstance(R, ConstantCurvature):
        d["Rhat"] = {"type": "constant", "matrix": [float(x) for x in R.S.ravel()]}
    elif isinstance(R, FourierCurvature):
        d["Rhat"] = {"type": "fourier", "terms": [
            {"k": k, "cos": [float(x) for x in C.ravel()],
             "sin": [float(x) for x in S.ravel()]}
            for k, C, S in R.terms]}
    else:
        raise ValueError("only constant/fourier curvature paths serialize")
    return d


def system_from_dict(d):
    n = int(d["n"])
    g = SignatureMatrix(int(d["G"]["p"]), int(d["G"]["q"]))
    T = float(d["T"])
    A = np.array(d["A"], dtype=float).reshape(n, n)
    r = d["Rhat"]
    if r["type"] == "constant":
        Rhat = ConstantCurvature(np.array(r["matrix"], dtype=float).reshape(n, n))
    elif r["type"] == "fourier":
        Rhat = FourierCurvature(T, [
            (int(t["k"]),
             np.array(t["cos"], dtype=float).reshape(n, n),
             np.array(t["sin"], dtype=float).reshape(n, n))
            for t in r["terms"]])
    else:
        raise ValueError(f"unknown curvature type {r['type']!r}")
    sysm = MorseSturmSystem(n=n, g=g, T=T, A=A, Rhat=Rhat,
                            causal=d.get("causal", "spacelike"),
                            label=d.get("label", ""))
    bad = validate(sysm)
    if bad:
        raise ValueError("invalid scenario file: " + "; ".join(bad))
    return sysm
