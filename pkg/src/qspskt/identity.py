"""Protocols near the identity function.

For a symmetric even protocol Psi = U(Phi) U(Phi^R) (so Phi is the half of
Psi) the product

    U(-Phi^R, -x) U(Phi, x) U(Phi^R, x) U(-Phi, -x)

is exactly the identity. Shifting the phase phi_0 of the two outer factors
(the phase that meets the inner factors) by eps gives a symmetric protocol

    T = U^-1 e^{-i eps Z} U  U^T e^{-i eps Z} U^-T,   U = U(Phi, x),

whose first-order term -i eps (M + M^T), M = U^dag Z U, depends on x.
Shifting the phase at the far end instead only produces the constant
e^{-2 i eps Z}.
"""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as C

from . import su2
from .errors import InconsistencyError, PreconditionError, StructureError
from .protocol import (ChebSeries, FunctionSample, Protocol, _grid_of, chebyshev_nodes,
                       check_structure, compact, concat, evaluate, half, identity_protocol,
                       require_symmetric, signal_negate)

EPS_MAX = 0.3
VARIANTS = ("base", "X", "H", "shiftZ", "shiftX")


def _core_half(psi):
    """Phases of the half Phi of a symmetric even standard protocol."""
    if psi.convention != "standard":
        raise PreconditionError("the core must be a standard protocol")
    try:
        h = half(psi)
    except StructureError:
        _, dev = check_structure(psi, None, "symmetric")
        raise StructureError("the core protocol is not symmetric", dev)
    if psi.oracle_length % 2:
        raise PreconditionError("odd cores: insert the central oracle before perturbing")
    return np.asarray(h.phases)


def _check_eps(eps):
    if not abs(eps) <= EPS_MAX:
        raise PreconditionError(f"|eps| must be at most {EPS_MAX}")


def identity_perturbation(psi, eps):
    """Symmetric near-identity protocol built from the core ``psi``.

    ``eps`` may be signed (|eps| <= 0.3); eps = 0 gives the identity.
    """
    _check_eps(eps)
    return _junction_perturbation(psi, eps)


def _junction_perturbation(psi, eps):
    phi = _core_half(psi)
    shifted = phi.copy()
    shifted[0] += eps
    o = psi.oracle
    left = signal_negate(Protocol.standard(-shifted[::-1], o))
    right = signal_negate(Protocol.standard(-shifted, o))
    return compact(concat(left, Protocol.standard(phi, o), Protocol.standard(phi[::-1], o), right))


def far_end_perturbation(psi, eps):
    """Shift of the outermost phase instead; evaluates to the constant e^{-2 i eps Z}."""
    _check_eps(eps)
    phi = _core_half(psi)
    shifted = phi.copy()
    shifted[-1] += eps
    o = psi.oracle
    left = signal_negate(Protocol.standard(-shifted[::-1], o))
    right = signal_negate(Protocol.standard(-shifted, o))
    return compact(concat(left, Protocol.standard(phi, o), Protocol.standard(phi[::-1], o), right))


def merged_core(psi):
    """Phi''' = (-Phi^R) joined to Phi with merged junction phase 0."""
    phi = _core_half(psi)
    return Protocol.standard(np.concatenate([-phi[::-1][:-1], [0.0], phi[1:]]), psi.oracle)


def perturbation_leading_term(psi, eps, x):
    """Predicted I - i eps Z [U(Phi''', x) + U(-Phi''', -x)] (batched over x)."""
    m = merged_core(psi)
    x = np.asarray(x, dtype=float)
    first = evaluate(m, x) + evaluate(Protocol.standard(-np.asarray(m.phases), m.oracle), -x)
    return su2.I2 - 1j * eps * su2.Z @ first


def perturbation_profile(psi, grid=None):
    """First-order (diag, off-diag) coefficients of identity_perturbation(psi, -eps/2).

    With U = [[P, iQs], [iQ*s, P*]] for the half, these are 2|P|^2 - 1 and
    -2 s Im(P* Q); for real P, Q the second vanishes.
    """
    g = _grid_of(grid)
    phi = _core_half(psi)
    U = evaluate(Protocol.standard(phi, psi.oracle), g)
    P = U[:, 0, 0]
    sQ = U[:, 0, 1] / 1j
    return 2 * np.abs(P) ** 2 - 1, -2 * np.imag(np.conj(P) * sQ)


def _two_sided(M_half, p):
    o = p.oracle
    return concat(Protocol.fixed(M_half, o), p, Protocol.fixed(M_half, o))


def conjugated_perturbation(psi, eps, variant="base"):
    """Variants of the base perturbation, all using Fixed letters.

    ``X`` conjugates by iX (flips the diagonal term), ``H`` conjugates by
    the SU(2) Hadamard (swaps the diagonal and off-diagonal terms).
    ``shiftZ`` / ``shiftX`` multiply ``psi`` itself on both sides by
    e^{i eps Z/2} / e^{i eps X/2}, adding the constant eps to the
    respective component; ``psi`` is then any symmetric protocol.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; choose from {VARIANTS}")
    if variant in ("shiftZ", "shiftX"):
        _check_eps(eps)
        require_symmetric(psi)
        axis = (0, 0, 1) if variant == "shiftZ" else (1, 0, 0)
        return compact(_two_sided(su2.rotation(axis, eps / 2), psi))
    base = identity_perturbation(psi, eps)
    if variant == "base":
        return base
    G = 1j * su2.X if variant == "X" else su2.IH
    o = base.oracle
    return compact(concat(Protocol.fixed(G, o), base, Protocol.fixed(su2.dagger(G), o)))


# ---------------------------------------------------------------- first-order extraction

def first_order(builder, grid=None, h=1e-4):
    """(a, b, y) with U(eps) ~ I + i eps (a Z + b X + y Y) at first order.

    ``builder`` maps eps to a Protocol or to an array of matrices over the
    grid. Central differences with one Richardson step, O(h^4) error.
    """
    g = _grid_of(grid)

    def mats(e):
        out = builder(e)
        return evaluate(out, g) if isinstance(out, Protocol) else np.asarray(out)

    def D(step):
        return (mats(step) - mats(-step)) / (2 * step)

    R = (4 * D(h / 2) - D(h)) / 3
    v = su2.pauli_vector(R)
    return v[:, 2], v[:, 0], v[:, 1]


# ---------------------------------------------------------------- probes

def zero_core(n):
    """Symmetric zero-phase protocol with 2n oracles; its profile is T_{2n}."""
    return Protocol.standard(np.zeros(2 * n + 1))


@dataclass(frozen=True, eq=False)
class Factor:
    """One symmetric near-identity factor, as a function of its amplitude."""

    kind: str  # "core", "coreH", "constZ", "constX"
    n: int = 0

    def build(self, amp):
        if self.kind == "constZ":
            return Protocol.fixed(su2.rotation((0, 0, 1), amp))
        if self.kind == "constX":
            return Protocol.fixed(su2.rotation((1, 0, 0), amp))
        if self.n == 0:
            # zero core with no oracles: profile T_0 = 1, plain constant
            M = su2.rotation((0, 0, 1), amp) if self.kind == "core" else su2.rotation((1, 0, 0), amp)
            return Protocol.fixed(M)
        p = _junction_perturbation(zero_core(self.n), -amp / 2)
        if self.kind == "coreH":
            p = compact(concat(Protocol.fixed(su2.IH), p, Protocol.fixed(su2.dagger(su2.IH))))
        return p


def palindromic_product(factors, amps):
    """F_1(a_1/2) ... F_{m-1}(a_{m-1}/2) F_m(a_m) F_{m-1}(a_{m-1}/2) ... F_1(a_1/2).

    Each factor is symmetric, so the palindrome is symmetric; its first
    order term is the sum of the factors' first-order terms.
    """
    if not factors:
        return identity_protocol()
    parts = [f.build(a / 2) for f, a in zip(factors[:-1], amps[:-1])]
    mid = factors[-1].build(amps[-1])
    return compact(concat(*parts, mid, *reversed(parts)))


def _even_coeffs(series, name):
    c = np.real(np.asarray(series.coeffs)) if series is not None else np.zeros(1)
    if series is not None and np.any(np.abs(np.imag(series.coeffs)) > 1e-12):
        raise PreconditionError(f"{name} must be real")
    if np.any(np.abs(c[1::2]) > 1e-12):
        raise PreconditionError(f"{name} must be even: odd terms are not reachable by symmetric cores")
    return c[0::2]


def probe_factors(R, S, r, s):
    """Factors and amplitudes whose first-order matrix is [[R + r, S + s], [S + s, -(R + r)]] (times i)."""
    if abs(r) > 1 or abs(s) > 1:
        raise PreconditionError("|r| and |s| must be at most 1")
    cR, cS = _even_coeffs(R, "R"), _even_coeffs(S, "S")
    factors, amps = [], []
    cR = cR.copy()
    cS = cS.copy()
    cR[0] += r
    cS[0] += s
    for n, c in enumerate(cR):
        if c != 0:
            factors.append(Factor("core", n))
            amps.append(c)
    for n, c in enumerate(cS):
        if c != 0:
            factors.append(Factor("coreH", n))
            amps.append(c)
    return factors, amps


def independent_component_probe(R, S, r, s, eps, grid=None, tol=1e-6, check=True):
    """Symmetric protocol ~ I + i eps [(R + r) Z + (S + s) X].

    R and S are even real ChebSeries; each T_{2n} term is realized by a
    perturbation of the zero-phase core with 2n oracles (H-conjugated for
    the off-diagonal), and the constants by Fixed rotations. The result is
    checked by finite-difference extraction and an InconsistencyError is
    raised if the first-order terms miss the target by more than ``tol``.
    """
    _check_eps(eps)
    factors, amps = probe_factors(R, S, r, s)
    if check:
        g = _grid_of(grid)
        a, b, y = first_order(lambda e: palindromic_product(factors, [e * v for v in amps]), g)
        want_a = (C.chebval(g, np.real(R.coeffs)) if R is not None else 0) + r
        want_b = (C.chebval(g, np.real(S.coeffs)) if S is not None else 0) + s
        res = max(np.max(np.abs(a - want_a)), np.max(np.abs(b - want_b)), np.max(np.abs(y)))
        if res > tol:
            raise InconsistencyError(f"probe first-order residual {res:.3e} exceeds {tol:g}", res)
    return palindromic_product(factors, [eps * v for v in amps])


# ---------------------------------------------------------------- shifts and differences

@dataclass
class ShiftResult:
    residual: FunctionSample  # R(x) = U(Phi)^dag A(x) U(Phi^R)^dag
    left: Protocol  # U(Phi)
    right: Protocol  # U(Phi^R)
    pre_error: float  # sup ||A - U(Phi) U(Phi^R)||
    residual_error: float  # sup ||R - I||
    planarity: float  # symmetric-structure deviation of R


def shift_to_identity(target, approx, tol=1e-9):
    """Translate a symmetric unitary-valued target by the approximant U(Phi) U(Phi^R).

    ``approx`` is the half protocol Phi (a standard or word protocol);
    ``target`` a FunctionSample of symmetric SU(2) matrices.
    """
    if not target.is_unitary:
        raise PreconditionError("target must be unitary-valued")
    g = target.grid
    A = target.values
    ok, dev = check_structure(A, which="symmetric", tol=tol)
    if not ok:
        raise StructureError(f"target is not XZ-planar (deviation {dev:.3e})", dev)
    L = evaluate(approx, g)
    Rt = np.swapaxes(L, -1, -2)
    pre = float(np.max(su2.op_norm(A - L @ Rt)))
    if pre >= 0.5:
        raise PreconditionError(f"approximant is {pre:.3f} from the target, need < 0.5")
    res = su2.dagger(L) @ A @ su2.dagger(Rt)
    _, pdev = check_structure(res, which="symmetric")
    from .protocol import reverse

    return ShiftResult(FunctionSample(g, res), approx, reverse(approx), pre,
                       float(np.max(su2.op_norm(res - su2.I2))), pdev)


@dataclass
class DifferenceReport:
    components: np.ndarray  # (n, 3) Pauli vector of the permuted difference
    distance: float  # sup ||U - U'||
    y_ratio: float  # max |y| / distance (0 when distance is 0)


def symmetric_difference_form(V, Vp, grid=None):
    """First-order components of the cyclically permuted difference.

    With U = L L^T and U' = L' L'^T the permuted difference
    [L'^dag L][L^T L'^-T] is symmetric, so its Y component vanishes.
    """
    g = _grid_of(grid)
    require_symmetric(V, g)
    require_symmetric(Vp, g)
    if V.oracle_length % 2 or Vp.oracle_length % 2:
        raise PreconditionError("even protocols expected")
    L, Lp = evaluate(half(V), g), evaluate(half(Vp), g)
    U, Up = L @ np.swapaxes(L, -1, -2), Lp @ np.swapaxes(Lp, -1, -2)
    dist = float(np.max(su2.op_norm(U - Up)))
    if dist >= 0.1:
        raise PreconditionError(f"protocols are {dist:.3f} apart, need < 0.1")
    A = su2.dagger(Lp) @ L
    D = A @ np.swapaxes(A, -1, -2)
    v = su2.pauli_vector(D)
    ratio = float(np.max(np.abs(v[:, 1])) / dist) if dist > 0 else 0.0
    return DifferenceReport(v, dist, ratio)


def cyclic_distance(A, B, Cm):
    """(||ABC - I||, ||CAB - I||); equal by unitary invariance."""
    return su2.distance(A @ B @ Cm, su2.I2), su2.distance(Cm @ A @ B, su2.I2)


__all__ = ["identity_perturbation", "far_end_perturbation", "perturbation_leading_term",
           "perturbation_profile", "conjugated_perturbation", "first_order", "zero_core",
           "palindromic_product", "independent_component_probe", "shift_to_identity",
           "symmetric_difference_form", "cyclic_distance", "merged_core", "chebyshev_nodes"]
