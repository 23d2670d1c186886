"""Dawson-Nielsen Solovay-Kitaev compilation for SU(2).

Gates are SU(2) representatives; distances between compiled words and
targets are projective (min over the global sign), since +-U are the
same gate.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect
from scipy.spatial import cKDTree

from . import su2
from .errors import CoverageError, PreconditionError


@dataclass(frozen=True, eq=False)
class InstructionSet:
    names: tuple
    gates: tuple
    inverse_index: tuple = field(init=False)

    def __post_init__(self):
        gates = tuple(su2.check_unitary(np.asarray(g, dtype=complex), tol=1e-9) for g in self.gates)
        object.__setattr__(self, "gates", gates)
        object.__setattr__(self, "names", tuple(self.names))
        inv = []
        for g in gates:
            gd = su2.dagger(g)
            d = [su2.projective_distance(gd, h) for h in gates]
            j = int(np.argmin(d))
            inv.append(j if d[j] <= 1e-12 else -1)
        object.__setattr__(self, "inverse_index", tuple(inv))

    @property
    def closed_under_inverse(self):
        return all(j >= 0 for j in self.inverse_index)


def clifford_t():
    """{H, T, T^dagger} as SU(2) elements."""
    H = -1j * (su2.X + su2.Z) / np.sqrt(2)
    T = su2.rz(-np.pi / 8)
    return InstructionSet(("H", "T", "Tdg"), (H, T, su2.dagger(T)))


@dataclass(frozen=True, eq=False)
class GateWord:
    indices: tuple
    product: np.ndarray

    @property
    def length(self):
        return len(self.indices)

    def names(self, S):
        return [S.names[i] for i in self.indices]


def word_product(S, indices):
    M = su2.I2
    for i in indices:
        M = M @ S.gates[i]
    return M


def make_word(S, indices):
    return GateWord(tuple(indices), word_product(S, indices))


def word_inverse(S, w):
    if not S.closed_under_inverse:
        raise PreconditionError("instruction set is not closed under inverses")
    idx = tuple(S.inverse_index[i] for i in reversed(w.indices))
    return GateWord(idx, word_product(S, idx))


def word_concat(S, *words):
    idx = tuple(i for w in words for i in w.indices)
    M = su2.I2
    for w in words:
        M = M @ w.product
    return GateWord(idx, M)


def _vec(U):
    U = su2.canonical_sign(U)
    return np.array([U[0, 0].real, U[0, 0].imag, U[0, 1].real, U[0, 1].imag])


@dataclass(eq=False)
class Su2Net:
    """Finite set of words with a nearest-entry lookup.

    The lookup is a k-d tree over the quaternion coordinates of +-U; for
    SU(2) the Euclidean distance between those 4-vectors equals the
    operator-norm distance, so the nearest tree point is the exact
    nearest entry.
    """

    S: InstructionSet
    entries: list
    radius: float

    def __post_init__(self):
        pts = []
        for w in self.entries:
            v = _vec(w.product)
            pts += [v, -v]
        self._tree = cKDTree(np.array(pts))

    def nearest(self, U):
        """(word, projective distance) of the entry closest to U."""
        d, i = self._tree.query(_vec(U))
        return self.entries[i // 2], float(d)

    def nearest_many(self, Us):
        vs = np.array([_vec(U) for U in Us])
        d, i = self._tree.query(vs)
        return d, i // 2

    def __len__(self):
        return len(self.entries)


def build_net(S, max_len, eps0, n_samples=1000, seed=0, check=True):
    """Enumerate words up to ``max_len`` with dedup at resolution eps0/4.

    Breadth-first order keeps the shortest representative; within a level
    words are visited lexicographically, so ties go to the first word.
    """
    res = eps0 / 4
    seen = {}
    entries = []

    def key(v):
        # round, not floor: exact coordinates such as 0 sit mid-cell, away from boundaries
        return tuple(np.round(v / res).astype(int))

    ident = GateWord((), su2.I2.copy())
    seen[key(_vec(su2.I2))] = 0
    entries.append(ident)
    frontier = [ident]
    for _ in range(max_len):
        nxt = []
        for w in frontier:
            for g, G in enumerate(S.gates):
                M = w.product @ G
                k = key(_vec(M))
                if k in seen:
                    continue
                nw = GateWord(w.indices + (g,), M)
                seen[k] = len(entries)
                entries.append(nw)
                nxt.append(nw)
        frontier = nxt
        if not frontier:
            break
    net = Su2Net(S, entries, eps0)
    if check:
        rng = np.random.default_rng(seed)
        samples = su2.haar_su2(rng, n_samples)
        d, _ = net.nearest_many(samples)
        worst = int(np.argmax(d))
        if d[worst] > eps0:
            raise CoverageError(
                f"net of {len(entries)} words misses a Haar sample by {d[worst]:.3f} > {eps0}",
                samples[worst], float(d[worst]))
    return net


def _rotation_between(a, b):
    """SU(2) element S whose adjoint action maps unit vector a to unit vector b."""
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    c = np.clip(a @ b, -1.0, 1.0)
    k = np.cross(a, b)
    nk = np.linalg.norm(k)
    if nk < 1e-14:
        if c > 0:
            return su2.I2.copy()
        # antiparallel: half-turn about any axis orthogonal to a
        perp = np.cross(a, [1.0, 0, 0])
        if np.linalg.norm(perp) < 1e-8:
            perp = np.cross(a, [0, 1.0, 0])
        return su2.rotation(perp / np.linalg.norm(perp), np.pi / 2)
    gamma = np.arctan2(nk, c)
    # exp(i a n.sigma) rotates Bloch vectors by -2a about n
    return su2.rotation(k / nk, -gamma / 2)


def gc_decompose(U):
    """V, W with V W V^dag W^dag = U (up to global sign).

    V and W rotate by the same angle phi about orthogonal axes. With the
    commutator angle theta, the exact relation sin(phi)^2 = sin(theta/2)
    is solved by bisection, giving theta ~ 2 phi^2 for small angles.
    """
    U = su2.canonical_sign(np.asarray(U, dtype=complex))
    if su2.distance(su2.I2, U) >= 0.5:
        raise PreconditionError("gc_decompose needs distance(I, U) < 0.5")
    pf = su2.pauli_form(U)
    theta = pf.theta
    if theta < 1e-15:
        return su2.I2.copy(), su2.I2.copy()
    target = np.sin(theta / 2)
    phi = bisect(lambda p: np.sin(p) ** 2 - target, 0.0, np.pi / 2, xtol=1e-17, rtol=1e-15, maxiter=200)
    V0 = su2.rotation((1, 0, 0), phi)
    W0 = su2.rotation((0, 1, 0), phi)
    C0 = su2.group_commutator(V0, W0)
    axis_c = np.asarray(su2.pauli_form(C0).axis)
    Srot = _rotation_between(axis_c, np.asarray(pf.axis))
    Sd = su2.dagger(Srot)
    return Srot @ V0 @ Sd, Srot @ W0 @ Sd


def commutator_error_bound(Delta, delta):
    """8 D d + 4 D d^2 + 8 D^2 + 4 D^3 + D^4 for approximate group commutators."""
    if Delta < 0 or delta < 0:
        raise PreconditionError("Delta and delta must be non-negative")
    D, d = Delta, delta
    return 8 * D * d + 4 * D * d ** 2 + 8 * D ** 2 + 4 * D ** 3 + D ** 4


@dataclass
class SKResult:
    word: GateWord
    error: float
    depth: int
    fallback: bool = False
    levels: list = field(default_factory=list)  # per-depth (error, bound)
    lengths: list = field(default_factory=list)  # per composite node: (n, total, |wa|, |wb|, |u|)


def solovay_kitaev(U, depth, net):
    """Approximate U by a gate word via depth-n Solovay-Kitaev recursion.

    Returns an SKResult with the word, its projective error, and for each
    recursion level the achieved error alongside the approximate-commutator
    bound evaluated at that level's inputs.
    """
    if depth < 0:
        raise PreconditionError("depth must be >= 0")
    S = net.S
    state = {"fallback": False}
    levels = {}
    lengths = []

    def rec(V, n):
        if n == 0:
            w, d = net.nearest(V)
            return w, d
        un, en = rec(V, n - 1)
        R = V @ su2.dagger(un.product)
        if su2.projective_distance(su2.I2, R) >= 0.5:
            state["fallback"] = True
            return un, en
        A, B = gc_decompose(R)
        wa, da = rec(A, n - 1)
        wb, db = rec(B, n - 1)
        w = word_concat(S, wa, wb, word_inverse(S, wa), word_inverse(S, wb), un)
        err = float(su2.projective_distance(w.product, V))
        delta = float(max(su2.distance(su2.I2, A), su2.distance(su2.I2, B)))
        bound = commutator_error_bound(max(da, db), delta)
        levels.setdefault(n, []).append((err, bound))
        lengths.append((n, w.length, wa.length, wb.length, un.length))
        return w, err

    w, err = rec(np.asarray(U, dtype=complex), depth)
    if state["fallback"]:
        warnings.warn("residual outside gc_decompose domain; fell back to a lower depth", RuntimeWarning)
    return SKResult(w, err, depth, state["fallback"], [levels.get(n, []) for n in range(1, depth + 1)],
                    lengths)


def sk_length_bound(depth, l0):
    """Upper bound 5^n l0 on the word length at depth n."""
    return 5 ** depth * l0


def level_study(net, targets, depth=2):
    """Median projective error per depth 0..depth and the per-level exponents.

    The exponent at level n is log(e_n) / log(e_{n-1}); an exact 3/2-power
    law gives 1.5 at every level.
    """
    med = [float(np.median([solovay_kitaev(U, d, net).error for U in targets])) for d in range(depth + 1)]
    l = np.log(med)
    return med, [float(l[n] / l[n - 1]) for n in range(1, depth + 1)]
