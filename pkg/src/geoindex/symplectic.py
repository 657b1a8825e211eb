"""Dense linear algebra on the symplectic group and Lagrangian frames.

Everything here works over the complex field with the Hermitian product
<x, y> = x* y (conjugate-linear in the first slot) and the symplectic form
omega(x, y) = <J x, y>.  Real inputs stay real where possible.
"""
import numpy as np
from dataclasses import dataclass

__all__ = [
    'DimensionError', 'SpectralError', 'KreinType',
    'standard_J', 'graph_form_matrix', 'is_symplectic', 'symplecticity_defect',
    'diamond', 'graph_frame', 'orthonormal_frame', 'isotropy_defect',
    'hermitian_signature', 'generalized_eigenspace', 'krein_type', 'd_omega',
]


class DimensionError(ValueError):
    pass


class SpectralError(ValueError):
    pass


@dataclass(frozen=True)
class KreinType:
    """Signature (p, q) of the form <-iJ x, x> on a generalized eigenspace."""
    lam: complex
    p: int
    q: int

    @property
    def definite(self):
        return self.p == 0 or self.q == 0


def standard_J(k):
    """The 2k x 2k matrix [[0, -I], [I, 0]]."""
    if k < 1:
        raise DimensionError("k must be positive")
    J = np.zeros((2 * k, 2 * k))
    J[:k, k:] = -np.eye(k)
    J[k:, :k] = np.eye(k)
    return J


def graph_form_matrix(two_n):
    """Form matrix diag(-J, J) of the product space carrying graph Lagrangians.

    Gr(M) = {(x, Mx)} is Lagrangian with respect to (-omega) x omega; this
    returns the matrix of that form in the 4n-dimensional product space.
    """
    if two_n % 2:
        raise DimensionError("graph space needs even base dimension")
    J = standard_J(two_n // 2)
    Z = np.zeros_like(J)
    return np.block([[-J, Z], [Z, J]])


def _check_even(M):
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError("square matrix expected")
    if M.shape[0] % 2:
        raise DimensionError("even dimension expected")
    return M


def symplecticity_defect(M):
    """Frobenius norm of M* J M - J."""
    M = _check_even(M)
    J = standard_J(M.shape[0] // 2)
    return np.linalg.norm(M.conj().T @ J @ M - J)


def is_symplectic(M, tol=None):
    M = _check_even(M)
    if tol is None:
        tol = 1e-9 * max(1.0, np.linalg.norm(M)) ** 2
    return symplecticity_defect(M) <= tol


def diamond(M1, M2):
    """The diamond product of two even-dimensional matrices.

    Interleaves the (p, q) block structures so that symplectic inputs give a
    symplectic output in the joint (p1, p2, q1, q2) coordinates.
    """
    M1 = _check_even(M1)
    M2 = _check_even(M2)
    a = M1.shape[0] // 2
    b = M2.shape[0] // 2
    A1, B1 = M1[:a, :a], M1[:a, a:]
    C1, D1 = M1[a:, :a], M1[a:, a:]
    A2, B2 = M2[:b, :b], M2[:b, b:]
    C2, D2 = M2[b:, :b], M2[b:, b:]
    out = np.zeros((2 * (a + b), 2 * (a + b)), dtype=np.result_type(M1, M2))
    out[:a, :a] = A1
    out[:a, a + b:2 * a + b] = B1
    out[a:a + b, a:a + b] = A2
    out[a:a + b, 2 * a + b:] = B2
    out[a + b:2 * a + b, :a] = C1
    out[a + b:2 * a + b, a + b:2 * a + b] = D1
    out[2 * a + b:, a:a + b] = C2
    out[2 * a + b:, 2 * a + b:] = D2
    return out


def graph_frame(M, tol=None):
    """Frame [I; M] of the graph Lagrangian Gr(M) in the product space."""
    M = _check_even(M)
    if not is_symplectic(M, tol):
        raise ValueError("graph_frame needs a symplectic matrix")
    return np.vstack([np.eye(M.shape[0], dtype=np.result_type(M, float)), M])


def orthonormal_frame(Z):
    """Orthonormalize the columns of a frame (thin QR)."""
    Q, _ = np.linalg.qr(np.asarray(Z, dtype=complex))
    return Q


def isotropy_defect(Z, form):
    """Norm of Z* form Z: zero iff span(Z) is isotropic for the form."""
    Z = np.asarray(Z)
    return np.linalg.norm(Z.conj().T @ form @ Z)


def hermitian_signature(H, tol=None):
    """Counts (n_plus, n_zero, n_minus) of the eigenvalues of a Hermitian H."""
    H = np.asarray(H)
    herm_defect = np.linalg.norm(H - H.conj().T)
    scale = max(1.0, np.linalg.norm(H))
    if herm_defect > 1e-8 * scale:
        raise ValueError(f"matrix is not Hermitian (defect {herm_defect:.3e})")
    if tol is None:
        tol = 1e-10 * scale
    ev = np.linalg.eigvalsh(0.5 * (H + H.conj().T))
    n_plus = int(np.sum(ev > tol))
    n_minus = int(np.sum(ev < -tol))
    return n_plus, len(ev) - n_plus - n_minus, n_minus


def generalized_eigenspace(M, lam, tol=None):
    """Orthonormal basis of E_lam = union_m ker(M - lam I)^m.

    The algebraic multiplicity is read off the spectrum at relative tolerance
    tol, then the null space of the scaled power (M - lam I)^mult is extracted
    by SVD.
    """
    M = np.asarray(M, dtype=complex)
    scale = max(1.0, np.linalg.norm(M, 2))
    if tol is None:
        tol = 1e-8 * scale
    eigs = np.linalg.eigvals(M)
    mult = int(np.sum(np.abs(eigs - lam) <= tol))
    if mult == 0:
        raise SpectralError(f"{lam} is not an eigenvalue (tol {tol:.3e})")
    B = (M - lam * np.eye(M.shape[0])) / scale
    P = np.linalg.matrix_power(B, mult)
    _, sv, Vh = np.linalg.svd(P)
    null_dim = int(np.sum(sv < 1e-10 * max(1.0, sv[0] if len(sv) else 1.0)))
    null_dim = max(null_dim, mult)  # clustered spectra can over-shrink sv
    return Vh[len(sv) - null_dim:, :].conj().T


def krein_type(M, lam, tol=None):
    """Krein type (p, q) of a unit-modulus eigenvalue of a symplectic M.

    The classical form x^T (-iJ) conj(y) is conjugate-linear in its second
    slot; with the first-slot convention used everywhere else here the two
    differ by transposition, which swaps the signature counts.
    """
    M = _check_even(M)
    if abs(abs(lam) - 1) > 1e-8:
        raise SpectralError("Krein type is defined for unit-modulus eigenvalues")
    E = generalized_eigenspace(M, lam, tol)
    Jt = -1j * standard_J(M.shape[0] // 2)
    H = E.conj().T @ Jt @ E
    p, n0, q = hermitian_signature(H, tol=1e-8 * max(1.0, np.linalg.norm(H)))
    if n0:
        raise SpectralError("Krein form degenerate on the eigenspace")
    return KreinType(lam=complex(lam), p=q, q=p)


def d_omega(M, omega):
    """D_omega(M) = (-1)^(n-1) * conj(omega)^n * det(M - omega I)."""
    M = _check_even(M)
    n = M.shape[0] // 2
    val = (-1) ** (n - 1) * np.conj(omega) ** n \
        * np.linalg.det(M - omega * np.eye(2 * n))
    return complex(val)
