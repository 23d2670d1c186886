"""Solovay-Kitaev style refinement lifted to symmetric QSP protocols.

Functions are even and are read off as Pi(U) = Im U_00. A net entry is a
symmetric near-identity protocol E(c) whose first-order term is
i (sum_n c_n T_2n(x)) Z; it is the palindromic product of perturbations of
zero-phase cores (see ``identity``).

Refinement inverts the leading order of the nested commutator,

    Pi(N) ~ 16 a0 b0 a1^2   for  V_j ~ I + i (a_j Z + b_j X),

with V1 = e^{i kappa Z} (a1 = kappa, b1 = 0) and V0 = e^{i beta X} E(c) e^{i beta X}
(a0 ~ sum c_n T_2n, b0 = 2 beta), then polishes (c, beta, kappa) by least
squares on the composed matrices. Only Pi is prescribed, so the X part
that the commutator produces is simply accepted.
"""

import json
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.optimize import least_squares

from . import su2
from .commutator import half_matrices, half_word, nested_commutator, nested_matrices, planar_quadruple
from .errors import ConvergenceError, CoverageError, PreconditionError, RefinementError
from .identity import Factor, palindromic_product
from .parallel import pmap
from .protocol import (ORACLE, ChebSeries, FunctionSample, Protocol, chebyshev_nodes, check_structure,
                       compact, concat, evaluate, half, identity_protocol, project_pi, protocol_to_json,
                       reverse)

LENGTH_FACTOR = 17
SHRINK = 1.25


# ---------------------------------------------------------------- schedule


@dataclass(frozen=True)
class Schedule:
    eps0: float
    l0: int
    c0: float = 16.0  # Lipschitz growth per level
    xi0: float = 10.0

    def eps(self, n):
        return self.eps0 ** (SHRINK ** n)

    def length(self, n):
        return self.l0 * LENGTH_FACTOR ** n

    def xi(self, n):
        return self.xi0 * self.c0 ** n

    def levels(self, n):
        return [(k, self.eps(k), self.length(k), self.xi(k)) for k in range(n + 1)]


def length_exponent():
    """log 17 / log(5/4), the exponent of the length in log(1/eps)."""
    return float(np.log(LENGTH_FACTOR) / np.log(SHRINK))


def length_schedule(eps0, l0, eps, c=1.0):
    """(n, l) with n = ceil(log(log(1/(c eps)) / log(1/(c eps0))) / log(5/4)) and l = 17^n l0."""
    if not 0 < eps0 < 1 or eps <= 0 or c <= 0:
        raise PreconditionError("need 0 < eps, 0 < eps0 < 1 and c > 0")
    if eps >= eps0:
        return 0, l0
    if c * eps0 >= 1:
        raise PreconditionError("c * eps0 must be below 1")
    n = int(np.ceil(np.log(np.log(1 / (c * eps)) / np.log(1 / (c * eps0))) / np.log(SHRINK)))
    n = max(n, 0)
    return n, l0 * LENGTH_FACTOR ** n


# ---------------------------------------------------------------- entry family


class EntryFamily:
    """Matrices and protocols of E(c), c = (c_0, ..., c_K), on a fixed grid.

    Factor n >= 1 equals U^-1 e^{i c_n Z/2} U U^T e^{i c_n Z/2} U^-T with
    U = W^n; factor 0 is e^{i c_0 Z}. Vectorized over leading amplitude axes.
    """

    def __init__(self, grid, K=2):
        self.grid = np.asarray(grid, dtype=float)
        self.K = K
        self.U = [None]
        for n in range(1, K + 1):
            U = evaluate(Protocol.standard(np.zeros(n + 1)), self.grid)
            self.U.append(U)

    @staticmethod
    def _rz(a):
        a = np.asarray(a, dtype=float)
        out = np.zeros(a.shape + (2, 2), dtype=complex)
        out[..., 0, 0] = np.exp(1j * a)
        out[..., 1, 1] = np.exp(-1j * a)
        return out

    def factor(self, n, a):
        """Factor n at amplitude(s) a; shape a.shape + (grid, 2, 2)."""
        a = np.asarray(a, dtype=float)
        if n == 0:
            return np.broadcast_to(self._rz(a)[..., None, :, :], a.shape + (self.grid.size, 2, 2))
        U = self.U[n]
        Ui = su2.dagger(U)
        R = self._rz(a / 2)[..., None, :, :]
        Ut = np.swapaxes(U, -1, -2)
        return Ui @ R @ U @ Ut @ R @ np.swapaxes(Ui, -1, -2)

    def matrices(self, amps):
        """E(c) over the grid; amps has shape (..., K + 1)."""
        amps = np.asarray(amps, dtype=float)
        F = [self.factor(n, amps[..., n] / 2) for n in range(self.K)]
        mid = self.factor(self.K, amps[..., self.K])
        M = mid
        for f in reversed(F):
            M = f @ M @ f
        return M

    def protocol(self, amps):
        factors = [Factor("core", n) for n in range(self.K + 1)]
        return palindromic_product(factors, list(np.asarray(amps, dtype=float)))


def chebyshev_even_coeffs(values, grid, K):
    """Least-squares coefficients of T_0, T_2, ..., T_2K."""
    V = np.stack([C.chebval(grid, np.eye(2 * K + 1)[2 * n]) for n in range(K + 1)], axis=1)
    return np.linalg.lstsq(V, values, rcond=None)[0]


# ---------------------------------------------------------------- nets


@dataclass(eq=False)
class NetEntry:
    sample: FunctionSample  # Pi-projection on the net grid
    amps: np.ndarray = None  # level-0 parameters
    _protocol: Protocol = None
    family: EntryFamily = None
    params: dict = field(default_factory=dict)

    @property
    def protocol(self):
        if self._protocol is None:
            self._protocol = self.family.protocol(self.amps)
        return self._protocol


@dataclass(eq=False)
class FunctionNet:
    entries: list
    radius: float  # eps
    ball: float  # eps^{1/4}
    xi: float
    level: int
    grid: np.ndarray
    family: EntryFamily = None
    max_length: int = 0

    def values(self):
        if not hasattr(self, "_vals") or self._vals.shape[0] != len(self.entries):
            self._vals = np.stack([e.sample.values for e in self.entries])
        return self._vals

    def nearest(self, f):
        """(index, sup distance) of the entry whose projection is closest to f."""
        d = np.max(np.abs(self.values() - np.asarray(f)[None, :]), axis=1)
        i = int(np.argmin(d))
        return i, float(d[i])

    def check_invariants(self, slack=0.1):
        """(ok, report) for the ball and Lipschitz invariants."""
        sup = float(np.max(np.abs(self.values()))) if self.entries else 0.0
        lip = max((e.sample.lipschitz() for e in self.entries), default=0.0)
        ok = sup <= self.ball + self.radius and lip <= self.xi * (1 + slack)
        return ok, {"sup": sup, "lipschitz": lip, "ball": self.ball, "xi": self.xi}

    def to_json(self, with_protocols=False):
        d = {"level": self.level, "radius": self.radius, "ball": self.ball, "xi": self.xi,
             "grid": self.grid.tolist(), "max_length": self.max_length,
             "entries": [{"values": e.sample.values.tolist(),
                          **({"amps": e.amps.tolist()} if e.amps is not None else {}),
                          **({"protocol": protocol_to_json(e.protocol)} if with_protocols else {})}
                         for e in self.entries]}
        return d


def random_functions(rng, n, radius, xi, grid, K=2):
    """Random even sum_k c_k T_2k (k <= K), scaled to sup in [radius/4, radius] and Lipschitz <= xi."""
    dense = np.linspace(-1, 1, 1001)
    out = []
    while len(out) < n:
        c = np.zeros(2 * K + 1)
        c[0::2] = rng.normal(size=K + 1)
        vals = C.chebval(dense, c)
        sup = np.max(np.abs(vals))
        if sup == 0:
            continue
        scale = rng.uniform(0.25, 1.0) * radius / sup
        lip = np.max(np.abs(np.diff(vals) / np.diff(dense))) * scale
        if lip > xi:
            scale *= xi / lip
        out.append(C.chebval(grid, c * scale))
    return out


def level0_net(eps0, grid=None, K=2, xi=10.0, step=None, n_check=50, seed=0):
    """Lattice of E(c) entries with projections in the ball of radius eps0^{1/4}.

    The amplitude lattice has spacing eps0/2 by default. Coverage of 50
    random functions of the ball is checked; CoverageError otherwise.
    """
    grid = chebyshev_nodes(33) if grid is None else np.asarray(grid, dtype=float)
    ball = eps0 ** 0.25
    step = eps0 / 2 if step is None else step
    fam = EntryFamily(grid, K)
    axis = np.arange(-np.ceil(ball / step), np.ceil(ball / step) + 1) * step
    amps = np.stack(np.meshgrid(*([axis] * (K + 1)), indexing="ij"), axis=-1).reshape(-1, K + 1)
    amps = amps[np.sum(np.abs(amps), axis=1) <= 1.5 * ball + 1e-12]
    vals = project_pi(fam.matrices(amps))
    sup = np.max(np.abs(vals), axis=1)
    lip = np.max(np.abs(np.diff(vals, axis=1)) / np.diff(grid)[None, :], axis=1)
    keep = (sup <= ball + eps0) & (lip <= xi)
    entries = [NetEntry(FunctionSample(grid, v), a, family=fam) for a, v in zip(amps[keep], vals[keep])]
    net = FunctionNet(entries, eps0, ball, xi, 0, grid, fam)
    net.max_length = fam.protocol(np.full(K + 1, 0.1)).length
    if n_check:
        rng = np.random.default_rng(seed)
        for f in random_functions(rng, n_check, ball, xi, grid, K):
            _, d = net.nearest(f)
            if d > eps0:
                raise CoverageError(f"level-0 net misses a sample by {d:.3f} > {eps0}", f, d)
    return net


# ---------------------------------------------------------------- initial approximation


def _parity_degree(target):
    par = target.parity()
    if par is None:
        raise PreconditionError("target must have definite parity")
    return par


def initial_protocol(target, eps0, builder="phase-finder", max_degree=64, seed=0):
    """Symmetric protocol with Pi within eps0 of the target on a dense grid.

    ``phase-finder`` fits the truncated series at increasing degree;
    ``fourier-lcu`` uses the small-phase phases directly (Im P reads the
    Fourier-limit series, so no ancilla is needed for Pi = Im U_00).
    """
    par = _parity_degree(target)
    x = chebyshev_nodes(201)
    tv = target(x)
    if np.max(np.abs(tv)) > 1:
        raise PreconditionError("target must satisfy |f| <= 1")
    if np.all(np.abs(target.coeffs) == 0):
        return identity_protocol(), 0.0
    if builder == "fourier-lcu":
        from .density import small_phase_phases

        p = Protocol.standard(small_phase_phases(target.real, 1.0))
        res = float(np.max(np.abs(project_pi(evaluate(p, x)) - tv)))
        if res > eps0:
            raise ConvergenceError(f"Fourier-limit protocol misses by {res:.3f} > {eps0}", p, res)
        return p, res
    if builder != "phase-finder":
        raise ValueError(f"unknown builder {builder!r}")
    from .phases import fit_phases

    c = np.real(np.asarray(target.coeffs))
    best = None
    for d in range(0 if par == "even" else 1, max_degree + 1, 2):
        trunc = ChebSeries(c[: d + 1])
        if np.max(np.abs(trunc(x))) > 1:
            continue
        try:
            fit = fit_phases(trunc, d, symmetric=True, seed=seed, tol=1e-8)
        except ConvergenceError as exc:
            fit = exc.best
        res = float(np.max(np.abs(project_pi(evaluate(fit.protocol, x)) - tv)))
        if best is None or res < best[1]:
            best = (fit.protocol, res)
        if res <= eps0:
            return fit.protocol, res
    raise ConvergenceError(f"no degree up to {max_degree} reaches {eps0}", best, best[1] if best else None)


def initial_net(target, eps0, builder="phase-finder", grid=None, K=2, xi=10.0, seed=0):
    """(protocol, residual, level-0 FunctionNet)."""
    p, res = initial_protocol(target, eps0, builder, seed=seed)
    return p, res, level0_net(eps0, grid, K, xi, seed=seed)


# ---------------------------------------------------------------- refinement


def _v0_matrices(fam, amps, beta):
    E = fam.matrices(amps)
    B = su2.rotation((1, 0, 0), beta)
    return B @ E @ B


def _v1_const(kappa):
    return su2.rz(kappa)


def _v0_protocol(fam, amps, beta):
    B = Protocol.fixed(su2.rotation((1, 0, 0), beta))
    return compact(concat(B, fam.protocol(amps), B))


@dataclass
class RefineOutcome:
    protocol: Protocol
    residual: float
    params: dict


def preimage(h, net, beta0=0.25, kappa=0.25, unwrap_tol=1e-10):
    """Nested commutator whose projection matches h (samples on net.grid)."""
    grid = net.grid
    fam = net.family
    h = np.asarray(h, dtype=float)
    if np.max(np.abs(h)) == 0:
        p = identity_protocol()
        return RefineOutcome(p, 0.0, {"identity": True})

    def resid(t):
        N = nested_matrices(_v0_matrices(fam, t[:-2], t[-2]), _v1_const(t[-1]))
        return project_pi(N) - h

    # keep the amplitudes inside the ball and (beta, kappa) away from 0 and pi/4
    amax = 1.5 * net.ball
    lo = np.concatenate([np.full(fam.K + 1, -amax), [0.05, 0.05]])
    hi = np.concatenate([np.full(fam.K + 1, amax), [0.6, 0.6]])
    sol = None
    for b, k in [(beta0, kappa), (1.4 * beta0, 1.4 * kappa), (0.8 * beta0, 1.6 * kappa)]:
        a0 = h / (16 * (2 * b) * k ** 2)  # b0 = 2 beta, a1 = kappa
        i, _ = net.nearest(a0)
        x0 = np.clip(np.concatenate([net.entries[i].amps, [b, k]]), lo + 1e-9, hi - 1e-9)
        cand = least_squares(resid, x0, bounds=(lo, hi), method="trf", xtol=1e-14, ftol=1e-14,
                             gtol=1e-14, max_nfev=400)
        if sol is None or cand.cost < sol.cost:
            sol, seed_entry = cand, i
        if np.max(np.abs(cand.fun)) < 0.1 * net.radius ** SHRINK:
            break
    t = sol.x
    amps, beta, kap = t[:-2], t[-2], t[-1]
    q = planar_quadruple(_v0_protocol(fam, amps, beta), Protocol.fixed(_v1_const(kap)), check=False)
    N = nested_commutator(q)
    U = evaluate(N, grid)
    composed = nested_matrices(_v0_matrices(fam, amps, beta), _v1_const(kap))
    if np.max(su2.op_norm(U - composed)) > unwrap_tol:
        raise RefinementError("protocol word disagrees with composed matrices", h)
    res = float(np.max(np.abs(project_pi(U) - h)))
    return RefineOutcome(N, res, {"amps": amps.tolist(), "beta": float(beta), "kappa": float(kap),
                                  "seed_entry": seed_entry})


@dataclass
class RefineReport:
    net: FunctionNet
    residuals: list
    worst: float
    targets: list


def refine_step(net, n_samples=50, seed=0, beta0=0.25, kappa=0.25, c0=16.0, K=None, workers=None,
                slack=0.5):
    """One shrinking step: a net for S_eps becomes a net at eps^{5/4}.

    Targets are sampled from the ball of radius eps_n with Lipschitz bound
    xi_n. A RefinementError names the first target whose residual exceeds
    eps_{n+1} (1 + slack).
    """
    if net.family is None:
        raise PreconditionError("refine_step needs a parametrized (level-0 style) net")
    K = net.family.K if K is None else K
    eps1 = net.radius ** SHRINK
    rng = np.random.default_rng(seed)
    targets = [np.zeros(net.grid.size)] + random_functions(rng, n_samples - 1, net.radius, net.xi, net.grid, K)
    outs = pmap(lambda h: preimage(h, net, beta0, kappa), targets, workers)
    for h, o in zip(targets, outs):
        if o.residual > eps1 * (1 + slack):
            raise RefinementError(f"target with sup {np.max(np.abs(h)):.3g} left residual {o.residual:.3g}",
                                  h, o.residual)
    entries = [NetEntry(FunctionSample(net.grid, project_pi(evaluate(o.protocol, net.grid))),
                        _protocol=o.protocol, params=o.params) for o in outs]
    new = FunctionNet(entries, eps1, eps1 ** 0.25, net.xi * c0, net.level + 1, net.grid, net.family,
                      max(o.protocol.length for o in outs))
    res = [o.residual for o in outs]
    return RefineReport(new, res, max(res), targets)


# ---------------------------------------------------------------- synthesis


def _transpose(M):
    return np.swapaxes(M, -1, -2)


@dataclass
class LevelRecord:
    level: int
    eps: float  # schedule value eps_n
    length_bound: int  # schedule value l_n
    length: int
    residual: float  # on the 4x dense verification grid
    unwrap_error: float = 0.0

    def to_json(self):
        return dict(self.__dict__)


def _assemble(L, odd):
    mid = [Protocol.word([ORACLE], oracle=L.oracle)] if odd else []
    return compact(concat(L, *mid, reverse(L)))


def _refine_half(L, odd, f_coeffs, grid, K, beta0=0.25, kappa=0.25):
    """New half L M with Pi(L M C M^T L^T) ~ f on the grid (C = W if odd)."""
    fam = EntryFamily(grid, K)
    Lm = evaluate(L, grid)
    Cm = su2.signal_unitary(grid) if odd else su2.I2
    f = C.chebval(grid, f_coeffs)
    # linearize Pi(L N C L^T) around N = I in the tangent i (alpha Z + beta X)
    gz = np.real((Lm @ su2.Z @ Cm @ _transpose(Lm))[:, 0, 0])
    gx = np.real((Lm @ su2.X @ Cm @ _transpose(Lm))[:, 0, 0])
    d = f - project_pi(Lm @ Cm @ _transpose(Lm))
    w = gz ** 2 + gx ** 2 + 1e-3
    alpha, beta = np.clip(d * gz / w, -0.5, 0.5), np.clip(d * gx / w, -0.5, 0.5)
    # b0 = 2 beta0 and a1 = 2 kappa for the two-sided constant factors
    a0 = chebyshev_even_coeffs(alpha / (16 * (2 * beta0) * (2 * kappa) ** 2), grid, K)
    b1 = chebyshev_even_coeffs(beta / (16 * (2 * beta0) ** 2 * (2 * kappa)), grid, K)
    IH = su2.IH

    def v1(amps, kap):
        return su2.rz(kap) @ IH @ fam.matrices(amps) @ su2.dagger(IH) @ su2.rz(kap)

    def final(t):
        m = K + 1
        M = half_matrices(_v0_matrices(fam, t[:m], t[-2]), v1(t[m:2 * m], t[-1]))
        LM = Lm @ M
        return LM @ Cm @ _transpose(LM)

    def resid(t):
        return project_pi(final(t)) - f

    x0 = np.concatenate([a0, b1, [beta0, kappa]])
    sol = least_squares(resid, x0, method="trf", xtol=1e-14, ftol=1e-14, gtol=1e-14, max_nfev=2000)
    t = sol.x
    m = K + 1
    V0p = _v0_protocol(fam, t[:m], t[-2])
    Kz = Protocol.fixed(su2.rz(t[-1]))
    V1p = compact(concat(Kz, Protocol.fixed(IH), fam.protocol(t[m:2 * m]), Protocol.fixed(su2.dagger(IH)), Kz))
    Mp = half_word(planar_quadruple(V0p, V1p, check=False))
    newL = compact(concat(L, Mp))
    return newL, final(t), {"amps0": t[:m].tolist(), "amps1": t[m:2 * m].tolist(),
                            "beta": float(t[-2]), "kappa": float(t[-1])}


@dataclass
class SynthesisResult:
    protocol: Protocol
    residual: float
    ledger: list
    level: int

    def ledger_json(self):
        return json.dumps([r.to_json() for r in self.ledger], indent=2)


def synthesize(target, eps, eps0=0.2, builder="phase-finder", max_level=2, grid_n=41, K=2, seed=0,
               l0=None, min_level=0):
    """Approximate an even or odd target by a symmetric protocol, refining as needed.

    Level 0 comes from ``initial_protocol``. Each further level replaces the
    half L by L M, with M M^T a nested commutator chosen so that the
    reassembled L M C M^T L^T (C = W for odd targets) matches the target on
    the grid. Residuals are measured on a 4x denser verification grid.
    At least ``min_level`` refinement levels are run even when eps is met
    earlier. Raises ConvergenceError (best result attached) if eps is not
    reached.
    """
    par = _parity_degree(target)
    odd = par == "odd"
    coeffs = np.real(np.asarray(target.coeffs))
    xv = chebyshev_nodes(4 * grid_n)
    fv = target(xv)
    p0, _ = initial_protocol(target, eps0, builder, seed=seed)
    res0 = float(np.max(np.abs(project_pi(evaluate(p0, xv)) - fv)))
    l0 = p0.length if l0 is None else l0
    sched = Schedule(eps0, l0)
    ledger = [LevelRecord(0, sched.eps(0), sched.length(0), p0.length, res0)]
    best = SynthesisResult(p0, res0, ledger, 0)
    if (res0 <= eps and min_level == 0) or max_level == 0:
        if res0 > eps:
            raise ConvergenceError(f"level 0 residual {res0:.3g} above {eps:g}", best, res0)
        return best
    if p0.convention != "standard":
        p0 = Protocol.standard(np.zeros(2 if odd else 1))
    L = half(p0)
    grid = chebyshev_nodes(grid_n)
    for level in range(1, max_level + 1):
        L, composed, params = _refine_half(L, odd, coeffs, grid, K)
        p = _assemble(L, odd)
        unwrap = float(np.max(su2.op_norm(evaluate(p, grid) - composed)))
        r = float(np.max(np.abs(project_pi(evaluate(p, xv)) - fv)))
        ok, _ = check_structure(p, grid)
        if not ok:
            raise RefinementError("refined protocol lost its symmetric structure", None, r)
        ledger.append(LevelRecord(level, sched.eps(level), sched.length(level), p.length, r, unwrap))
        if r < best.residual:
            best = SynthesisResult(p, r, ledger, level)
        if r <= eps and level >= min_level:
            return SynthesisResult(p, r, ledger, level)
    raise ConvergenceError(f"residual {best.residual:.3g} above {eps:g} after {max_level} levels",
                           best, best.residual)


# ---------------------------------------------------------------- compatible-commutator harness


def surjectivity_check(net, n_samples=20, seed=1, **kw):
    """Fraction of sampled targets with a pre-image at eps^{5/4} (1 + 0.5), and the worst residual."""
    eps1 = net.radius ** SHRINK
    rng = np.random.default_rng(seed)
    targets = random_functions(rng, n_samples, net.radius, net.xi, net.grid, net.family.K)
    res = [preimage(h, net, **kw).residual for h in targets]
    return float(np.mean(np.array(res) <= 1.5 * eps1)), float(max(res))


def pi_norm_constant(net, n_samples=10, seed=2):
    """Fitted C with ||N - N'|| <= C sup |Pi N - Pi N'| over pairs of pre-images."""
    rng = np.random.default_rng(seed)
    targets = random_functions(rng, n_samples, net.radius, net.xi, net.grid, net.family.K)
    Us = [evaluate(preimage(h, net).protocol, net.grid) for h in targets]
    ratios = []
    for i in range(len(Us)):
        for j in range(i + 1, len(Us)):
            dp = np.max(np.abs(project_pi(Us[i]) - project_pi(Us[j])))
            if dp > 0:
                ratios.append(np.max(su2.op_norm(Us[i] - Us[j])) / dp)
    return float(max(ratios))


def shrinking_exponent(scales=(0.4, 0.2, 0.1, 0.05), grid=None, K=2, seed=3):
    """Fitted b in ||N - I|| ~ (input size)^{1/b}; the nested commutator gives b ~ 1/4."""
    grid = chebyshev_nodes(33) if grid is None else grid
    fam = EntryFamily(grid, K)
    rng = np.random.default_rng(seed)
    shape = rng.uniform(0.5, 1.0, size=K + 1)
    ins, outs = [], []
    for s in scales:
        V0 = _v0_matrices(fam, s * shape, s)
        V1 = _v1_const(s)
        ins.append(float(max(np.max(su2.op_norm(V0 - su2.I2)), np.max(su2.op_norm(V1 - su2.I2)))))
        outs.append(float(np.max(su2.op_norm(nested_matrices(V0, V1) - su2.I2))))
    slope = np.polyfit(np.log(ins), np.log(outs), 1)[0]
    return float(1 / slope), ins, outs
