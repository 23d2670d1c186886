"""SU(2) arithmetic on plain 2x2 complex numpy arrays.

Matrices are ``numpy.ndarray`` of shape ``(2, 2)`` (or ``(..., 2, 2)`` for
batched helpers). Rotations follow ``rotation(n, a) = exp(i a n.sigma)``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NormalizationError, UnitarityError


@dataclass(frozen=True)
class Tolerances:
    unitarity: float = 1e-12
    compare: float = 1e-10
    structure: float = 1e-9
    axis: float = 1e-9


TOL = Tolerances()

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (X, Y, Z)
# Hadamard scaled into SU(2); conjugation by it swaps X and Z.
IH = 1j * (X + Z) / np.sqrt(2)


def dagger(U):
    return np.conj(np.swapaxes(U, -1, -2))


def check_unitary(U, tol=None):
    """Raise UnitarityError unless U is special-unitary within ``tol``."""
    tol = TOL.unitarity if tol is None else tol
    U = np.asarray(U, dtype=complex)
    if U.shape[-2:] != (2, 2):
        raise UnitarityError(f"expected 2x2 matrix, got shape {U.shape}")
    if not np.all(np.isfinite(U)):
        raise UnitarityError("non-finite matrix entries")
    dev = np.max(op_norm(dagger(U) @ U - I2))
    det = np.max(np.abs(np.linalg.det(U) - 1.0))
    if dev > tol or det > tol:
        raise UnitarityError(f"not special-unitary: |U^dag U - I| = {dev:.3e}, |det - 1| = {det:.3e}")
    return U


def su2(a, b):
    """The matrix [[a, b], [-conj(b), conj(a)]] (normalized)."""
    r = np.sqrt(abs(a) ** 2 + abs(b) ** 2)
    a, b = a / r, b / r
    return np.array([[a, b], [-np.conj(b), np.conj(a)]], dtype=complex)


def _unit(axis, tol):
    n = np.asarray(axis, dtype=float).reshape(3)
    if abs(np.linalg.norm(n) - 1.0) > tol:
        raise NormalizationError(f"axis {n.tolist()} has norm {np.linalg.norm(n):.6g}, expected 1")
    return n


def rotation(axis, angle):
    """exp(i * angle * axis.sigma) for a unit 3-vector ``axis``."""
    n = _unit(axis, TOL.axis)
    H = n[0] * X + n[1] * Y + n[2] * Z
    return np.cos(angle) * I2 + 1j * np.sin(angle) * H


def rz(phi):
    return np.array([[np.exp(1j * phi), 0], [0, np.exp(-1j * phi)]], dtype=complex)


def rx(phi):
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, 1j * s], [1j * s, c]], dtype=complex)


def signal_unitary(x):
    """W(x) = exp(i arccos(x) X), vectorized over x."""
    x = np.asarray(x, dtype=float)
    s = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    out = np.empty(x.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = x
    out[..., 1, 1] = x
    out[..., 0, 1] = 1j * s
    out[..., 1, 0] = 1j * s
    return out


def pauli_vector(U):
    """Real (vx, vy, vz) with U ~ c I + i (v.sigma); batched.

    Uses the anti-Hermitian part, so it is well conditioned at every angle.
    """
    U = np.asarray(U, dtype=complex)
    a, b, c, d = U[..., 0, 0], U[..., 0, 1], U[..., 1, 0], U[..., 1, 1]
    vx = 0.5 * (b.imag + c.imag)
    vy = 0.5 * (b.real - c.real)
    vz = 0.5 * (a.imag - d.imag)
    return np.stack([vx, vy, vz], axis=-1)


@dataclass(frozen=True)
class PauliForm:
    theta: float
    axis: tuple

    def __post_init__(self):
        object.__setattr__(self, "axis", tuple(float(v) for v in self.axis))


def canonical_sign(U):
    """Representative of +-U with Re a >= 0 (ties broken toward Im a >= 0)."""
    a = U[0, 0]
    if a.real < -1e-15 or (abs(a.real) <= 1e-15 and a.imag < 0):
        return -U
    return U


def pauli_form(U):
    """(theta, axis) with U = cos(theta) I + i sin(theta) axis.sigma, theta in [0, pi]."""
    U = np.asarray(U, dtype=complex)
    re_a = 0.5 * (U[0, 0].real + U[1, 1].real)
    theta = float(np.arccos(np.clip(re_a, -1.0, 1.0)))
    v = pauli_vector(U)
    nv = np.linalg.norm(v)
    if nv <= 1e-12:
        return PauliForm(theta, (0.0, 0.0, 1.0))
    # dividing v by its own norm rather than sin(theta) is exact for SU(2)
    # and stays accurate near theta = 0 or pi
    return PauliForm(theta, v / nv)


def from_pauli(p):
    n = np.asarray(p.axis, dtype=float)
    if p.theta > 1e-12:
        n = _unit(n, 1e-9)
    H = n[0] * X + n[1] * Y + n[2] * Z
    return np.cos(p.theta) * I2 + 1j * np.sin(p.theta) * H


def op_norm(A):
    """Largest singular value of a (batched) 2x2 matrix, closed form.

    From the Gram matrix G = A^dag A: s_max^2 = (tr G + sqrt(tr(G)^2 - 4 det G)) / 2.
    """
    A = np.asarray(A, dtype=complex)
    fro2 = np.sum(np.abs(A) ** 2, axis=(-2, -1))
    det = np.abs(A[..., 0, 0] * A[..., 1, 1] - A[..., 0, 1] * A[..., 1, 0]) ** 2
    disc = np.sqrt(np.clip(fro2 ** 2 - 4 * det, 0.0, None))
    return np.sqrt(np.clip(0.5 * (fro2 + disc), 0.0, None))


def distance(A, B):
    """Operator-norm distance ||A - B||."""
    return op_norm(np.asarray(A) - np.asarray(B))


def projective_distance(A, B):
    """min(||A - B||, ||A + B||): distance between the gates +-A and +-B."""
    A, B = np.asarray(A), np.asarray(B)
    return np.minimum(op_norm(A - B), op_norm(A + B))


def group_commutator(A, B):
    """A B A^dag B^dag."""
    return A @ B @ dagger(A) @ dagger(B)


def haar_su2(rng, size=None):
    """Haar-random SU(2) elements from normalized 4D Gaussians."""
    shape = () if size is None else (size,)
    q = rng.normal(size=shape + (4,))
    q /= np.linalg.norm(q, axis=-1, keepdims=True)
    a = q[..., 0] + 1j * q[..., 1]
    b = q[..., 2] + 1j * q[..., 3]
    out = np.empty(shape + (2, 2), dtype=complex)
    out[..., 0, 0] = a
    out[..., 0, 1] = b
    out[..., 1, 0] = -np.conj(b)
    out[..., 1, 1] = np.conj(a)
    return out
