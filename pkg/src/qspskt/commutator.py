"""Nested group commutators of XZ-planar protocols.

For symmetric V0, V1 the quadruple is

    U0 = e^{iX pi/4} V0 e^{-iX pi/4}      (XY-planar)
    U1 = e^{iZ pi/4} V1 e^{-iZ pi/4}      (YZ-planar)
    U2 = (iY) U0 (-iY) = conj(U0)
    U3 = (iY) U1 (-iY) = conj(U1)

and N = [[U0, U1], [U2, U3]] = [G, conj(G)] with G = [U0, U1]. Since
conj(G) = (G^T)^dagger, N is a symmetric matrix, i.e. XZ-planar, and its
word splits as N = M M^T with M = [U0, U1][U2, U3].
"""

from dataclasses import dataclass

import numpy as np

from . import su2
from .protocol import (ChebSeries, Fixed, Protocol, compact, concat, evaluate, inverse,
                       require_symmetric)

CX = su2.rotation((1, 0, 0), np.pi / 4)
CZ = su2.rotation((0, 0, 1), np.pi / 4)
IY = 1j * su2.Y


@dataclass(frozen=True, eq=False)
class PlanarQuadruple:
    U0: Protocol
    U1: Protocol
    U2: Protocol
    U3: Protocol

    def as_tuple(self):
        return (self.U0, self.U1, self.U2, self.U3)


def _sandwich(G, p):
    return compact(concat(Protocol.fixed(G, p.oracle), p, Protocol.fixed(su2.dagger(G), p.oracle)))


def planar_quadruple(V0, V1, grid=None, check=True):
    """Conjugated copies of two symmetric protocols (see module docstring)."""
    if check:
        require_symmetric(V0, grid)
        require_symmetric(V1, grid)
    return PlanarQuadruple(_sandwich(CX, V0), _sandwich(CZ, V1),
                           _sandwich(IY @ CX, V0), _sandwich(IY @ CZ, V1))


def commutator_word(A, B):
    """Protocol for A B A^dag B^dag."""
    return concat(A, B, inverse(A), inverse(B))


def half_word(q):
    """M = [U0, U1][U2, U3]; the nested commutator equals M M^T."""
    return compact(concat(commutator_word(q.U0, q.U1), commutator_word(q.U2, q.U3)))


def nested_commutator(q):
    """Single protocol word computing [[U0, U1], [U2, U3]]."""
    G = commutator_word(q.U0, q.U1)
    H = commutator_word(q.U2, q.U3)
    return compact(concat(G, H, inverse(G), inverse(H)))


def nested_matrices(V0, V1):
    """Pointwise nested commutator of symmetric matrices V0, V1 (batched)."""
    U0 = CX @ V0 @ su2.dagger(CX)
    U1 = CZ @ V1 @ su2.dagger(CZ)
    G = su2.group_commutator(U0, U1)
    return su2.group_commutator(G, np.conj(G))


def half_matrices(V0, V1):
    """Pointwise M = [U0, U1][U2, U3], so that nested_matrices = M M^T."""
    U0 = CX @ V0 @ su2.dagger(CX)
    U1 = CZ @ V1 @ su2.dagger(CZ)
    G = su2.group_commutator(U0, U1)
    return G @ np.conj(G)


def nested_group_commutator(V, W):
    """[[V, W], [V^dag, W^dag]] for plain SU(2) matrices."""
    return su2.group_commutator(su2.group_commutator(V, W),
                                su2.group_commutator(su2.dagger(V), su2.dagger(W)))


def tangent_components(V, h=1e-6):
    """First-order (a, b) with V(eps) ~ I + i eps (a Z + b X).

    ``V`` is a callable eps -> matrices; central differences in eps.
    """
    D = (np.asarray(V(h)) - np.asarray(V(-h))) / (2 * h)
    return D[..., 0, 0].imag, D[..., 0, 1].imag


def leading_order_prediction(P0, Q0, P1, Q1, x, eps, weighted=True):
    """Leading-order nested commutator of two near-identity planar inputs.

    Input j is V_j ~ I + i eps (a_j Z + b_j X) with a_j = P_j(x) and
    b_j = Q_j(x) sqrt(1 - x^2) (or b_j = Q_j(x) when ``weighted`` is False).
    Returns I + 16 i eps^4 (b0^2 a1 b1 X + a0 b0 a1^2 Z).
    """
    x = np.asarray(x, dtype=float)
    s = np.sqrt(np.clip(1 - x ** 2, 0, None)) if weighted else 1.0
    a0, a1 = np.real(P0(x)), np.real(P1(x))
    b0, b1 = np.real(Q0(x)) * s, np.real(Q1(x)) * s
    return leading_order_matrix(a0, b0, a1, b1, eps)


def leading_order_matrix(a0, b0, a1, b1, eps):
    """I + 16 i eps^4 (b0^2 a1 b1 X + a0 b0 a1^2 Z) from tangent components (batched)."""
    a0, b0, a1, b1 = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a0, b0, a1, b1)))
    cx = 16 * eps ** 4 * b0 ** 2 * a1 * b1
    cz = 16 * eps ** 4 * a0 * b0 * a1 ** 2
    out = np.empty(a0.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = 1 + 1j * cz
    out[..., 1, 1] = 1 - 1j * cz
    out[..., 0, 1] = 1j * cx
    out[..., 1, 0] = 1j * cx
    return out


def nested_error_bound(Delta, delta, padding=True):
    """32 D d, plus the second-order padding 32 D (d^2 + D) by default."""
    lead = 32 * Delta * delta
    if not padding:
        return lead
    return lead + 32 * Delta * (delta ** 2 + Delta)


def nested_scaling(eps_values=(1e-1, 3e-2, 1e-2), grid=None):
    """Residual of the nested commutator after subtracting the leading order.

    Inputs are two independent-component probes with x-dependent tangents.
    Returns (slope, residuals, planarity deviations); the slope is ~5.
    """
    from .identity import independent_component_probe
    from .protocol import check_structure, chebyshev_nodes

    g = chebyshev_nodes(33) if grid is None else np.asarray(grid, dtype=float)
    specs = [(ChebSeries([0.2, 0, 0.5]), ChebSeries([0.3, 0, 0.4]), 0.1, 0.2),
             (ChebSeries([0.1, 0, 0.6]), ChebSeries([0.5, 0, -0.3]), -0.2, 0.1)]
    (R0, S0, r0, s0), (R1, S1, r1, s1) = specs
    a0, b0 = R0(g) + r0, S0(g) + s0
    a1, b1 = R1(g) + r1, S1(g) + s1
    res, dev = [], []
    for e in eps_values:
        V0 = independent_component_probe(*specs[0], e, g)
        V1 = independent_component_probe(*specs[1], e, g)
        U = evaluate(nested_commutator(planar_quadruple(V0, V1, g)), g)
        res.append(float(np.max(su2.op_norm(U - leading_order_matrix(a0, b0, a1, b1, e)))))
        dev.append(check_structure(U)[1])
    slope = float(np.polyfit(np.log(eps_values), np.log(res), 1)[0])
    return slope, res, dev


# ---------------------------------------------------------------- approximate-commutator sampling


def _random_axis(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def at_distance(rng, d):
    """Random SU(2) element at operator-norm distance d from I."""
    return su2.rotation(_random_axis(rng), 2 * np.arcsin(d / 2))


def perturbed_quadruple(rng, Delta, delta):
    """(V, W, V~, W~) with d(I, V), d(I, W) <= delta and d(V, V~), d(W, W~) <= Delta.

    Each distance is drawn uniformly from [0.5, 1] times its cap, with a
    Haar-random rotation axis.
    """
    V = at_distance(rng, delta * rng.uniform(0.5, 1))
    W = at_distance(rng, delta * rng.uniform(0.5, 1))
    Vt = V @ at_distance(rng, Delta * rng.uniform(0.5, 1))
    Wt = W @ at_distance(rng, Delta * rng.uniform(0.5, 1))
    return V, W, Vt, Wt


def commutator_mismatch(V, W, Vt, Wt, nested=False):
    """d([V, W], [V~, W~]), or the nested [[V, W], [V^dag, W^dag]] version."""
    f = nested_group_commutator if nested else su2.group_commutator
    return float(su2.distance(f(V, W), f(Vt, Wt)))


def nested_mismatch_scaling(eps_values=(1e-2, 1e-3, 1e-4), n=50, seed=5):
    """Slope of the median nested mismatch in eps with delta = eps and Delta = eps^{1/4}.

    The same random stream is reused at every eps. Returns (slope, medians).
    """
    med = []
    for e in eps_values:
        rng = np.random.default_rng(seed)
        ms = [commutator_mismatch(*perturbed_quadruple(rng, e ** 0.25, e), nested=True) for _ in range(n)]
        med.append(float(np.median(ms)))
    return float(np.polyfit(np.log(eps_values), np.log(med), 1)[0]), med
