"""Explicit dense families: small-phase Fourier protocols, LCU, Chebyshev composition.

Small-phase limit: for U(Phi, cos t) with small phases, to first order

    U ~ W^k + i sum_j phi_j Z W^{k-2j},   Im P ~ sum_j phi_j T_{|k-2j|}(x),

and Im P is odd in Phi, so the next correction is cubic.
"""

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.fft import dct

from . import su2
from .errors import DomainError, PreconditionError
from .protocol import (ChebSeries, Fixed, FunctionSample, Oracle, OracleCall, Protocol, chebyshev_nodes, compact,
                       concat, evaluate, reverse)

# ---------------------------------------------------------------- small phases


def small_phase_phases(c, alpha):
    """Palindromic phases with sum_j phi_j T_{|k-2j|} = g / alpha, g = sum c_m T_m."""
    coeffs = np.real(np.asarray(c.coeffs))
    par = c.parity()
    if par is None:
        raise PreconditionError("target must have definite parity")
    k = c.degree
    if (k % 2 == 0) != (par == "even"):
        k += 1
    phi = np.zeros(k + 1)
    for m in range(k % 2, k + 1, 2):
        cm = coeffs[m] if m < coeffs.size else 0.0
        if m == 0:
            phi[k // 2] = cm / alpha
        else:
            phi[(k - m) // 2] += cm / (2 * alpha)
            phi[(k + m) // 2] += cm / (2 * alpha)
    return phi


def small_phase_protocol(c, alpha, eps=None):
    """Symmetric protocol whose Im(top-right) is ~ g(x) / alpha.

    The palindromic core puts the series into Im P; conjugation by the
    SU(2) Hadamard (as Fixed letters) moves it to the top-right entry. The
    result stays symmetric. If ``eps`` is given, alpha >= C^2 / eps is
    required, with C the coefficient one-norm.
    """
    if np.any(np.abs(np.imag(c.coeffs)) > 0):
        raise PreconditionError("coefficients must be real")
    Cn = c.one_norm()
    if alpha <= 0:
        raise PreconditionError("alpha must be positive")
    if eps is not None and alpha < Cn ** 2 / eps:
        raise PreconditionError(f"alpha = {alpha:g} is below C^2/eps = {Cn ** 2 / eps:g}")
    core = Protocol.standard(small_phase_phases(c, alpha))
    return compact(concat(Protocol.fixed(su2.IH), core, Protocol.fixed(-su2.IH)))


def top_right_imag(p, x):
    return evaluate(p, x)[..., 0, 1].imag


def small_phase_deviation(c, alpha, grid):
    """(absolute, rescaled) deviation: sup |ImTR - g/alpha| and sup |alpha ImTR - g|."""
    p = small_phase_protocol(c, alpha)
    got = top_right_imag(p, grid)
    want = C.chebval(grid, np.real(c.coeffs))
    return float(np.max(np.abs(got - want / alpha))), float(np.max(np.abs(alpha * got - want)))


# ---------------------------------------------------------------- LCU


@dataclass(eq=False)
class BlockFunction:
    """Scalar g(x) realized as the top-left entry of (A(x) + B(x)) / 2."""

    grid: np.ndarray
    values: np.ndarray
    protocol: Protocol  # A = U(x) (-iX)
    twin: Protocol  # B = U(x)^T (-iX)
    recipe: str = "(U (-iX) + U^T (-iX)) / 2, top-left entry = Im U_01"

    def sample(self):
        return FunctionSample(self.grid, self.values)


def lcu_combine(p, grid=None):
    """Average of U(-iX) and U^T(-iX); its top-left entry is Im U_01.

    For SU(2), U_10 = -conj(U_01), so (-i U_01 - i U_10) / 2 = Im U_01.
    """
    g = chebyshev_nodes(65) if grid is None else np.asarray(grid, dtype=float)
    mX = Protocol.fixed(-1j * su2.X, p.oracle)
    A = compact(concat(p, mX))
    B = compact(concat(reverse(p), mX))
    block = 0.5 * (evaluate(A, g) + evaluate(B, g))
    vals = block[:, 0, 0]
    if np.max(np.abs(vals.imag)) > 1e-10:
        raise AssertionError("LCU block is not real")
    return BlockFunction(g, vals.real, A, B)


def dilation(block, x):
    """4x4 unitaries whose top-left 2x2 block is (A(x) + B(x)) / 2 (ancilla first).

    Returns shape (4, 4) for scalar x and (len(x), 4, 4) otherwise.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    A = evaluate(block.protocol, xs)
    B = evaluate(block.twin, xs)
    H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    Hf = np.kron(H, np.eye(2))
    sel = np.zeros((xs.size, 4, 4), dtype=complex)
    sel[:, :2, :2] = A
    sel[:, 2:, 2:] = B
    out = Hf @ sel @ Hf
    return out[0] if np.ndim(x) == 0 else out


# ---------------------------------------------------------------- Chebyshev composition


def chebyshev_T(a, y):
    return C.chebval(np.asarray(y, dtype=float), np.eye(a + 1)[a])


def chebyshev_compose(b, a):
    """T_a applied pointwise to block values (a odd)."""
    if a < 1 or a % 2 == 0:
        raise PreconditionError("a must be a positive odd integer")
    s = b.sample() if isinstance(b, BlockFunction) else b
    return FunctionSample(s.grid, chebyshev_T(a, s.values))


def inverse_T(a, v):
    """Branch of T_a^{-1} containing 0: T_a(y) = (-1)^((a-1)/2) sin(a asin y)."""
    sign = -1.0 if (a - 1) // 2 % 2 else 1.0
    v = np.asarray(v, dtype=float)
    if np.any(np.abs(v) > 1):
        raise DomainError("T_a^{-1} needs |v| <= 1")
    return np.sin(np.arcsin(sign * v) / a)


@dataclass
class PipelineResult:
    output: FunctionSample
    target: FunctionSample  # (1 - delta) g
    error: float
    a: int
    protocol: Protocol
    inner: ChebSeries  # Chebyshev series of T_a^{-1}((1 - delta) g)


def density_pipeline(g, eps, delta=0.1, grid=None, a=None, max_tries=6):
    """Small-phase protocol + LCU + T_a approximating (1 - delta) g to eps.

    ``g`` is a real ChebSeries with coefficient one-norm <= 1 and definite
    parity. The inner function h = T_a^{-1}((1 - delta) g) is small, so its
    small-phase realization has cubic error ~ |h|^3, amplified by ~a under
    T_a. The odd degree a starts at a heuristic and is increased until the
    grid error meets eps.
    """
    if g.one_norm() > 1 + 1e-12:
        raise PreconditionError("coefficient one-norm must be at most 1")
    par = g.parity()
    if par is None:
        raise PreconditionError("target must have definite parity")
    if not 0 < delta < 1:
        raise PreconditionError("delta must lie in (0, 1)")
    x = chebyshev_nodes(65) if grid is None else np.asarray(grid, dtype=float)
    target = (1 - delta) * g(x)
    if a is None:
        a = int(np.ceil(np.sqrt(2.0 / eps)))
        a += 1 - a % 2
    best = None
    for _ in range(max_tries):
        h, _ = chebyshev_fit_function(lambda t: inverse_T(a, (1 - delta) * g(t)), eps / (10 * a), par)
        p = small_phase_protocol(h.scale(a), a)
        block = lcu_combine(p, x)
        out = chebyshev_compose(block, a)
        err = float(np.max(np.abs(out.values - target)))
        best = PipelineResult(out, FunctionSample(x, target), err, a, p, h)
        if err <= eps:
            break
        a = 2 * a + 1
    return best


# ---------------------------------------------------------------- truncation


def truncation_degree(M, rho, eps):
    """n = ceil(log(2M / ((rho - 1) eps)) / log rho), clamped at 0.

    With |a_k| <= 2 M rho^-k the tail beyond n is at most
    2 M rho^-n / (rho - 1) <= eps.
    """
    if rho <= 1:
        raise DomainError("rho must exceed 1")
    if eps <= 0 or M <= 0:
        raise PreconditionError("M and eps must be positive")
    n = int(np.ceil(np.log(2 * M / ((rho - 1) * eps)) / np.log(rho)))
    return max(n, 0)


def pole_parameters(x0):
    """(rho, M) for f(x) = 1 / (x0 - x), x0 > 1.

    The Chebyshev coefficients are exactly a_k = (2 / sqrt(x0^2 - 1)) rho^-k
    (halved at k = 0) with rho = x0 + sqrt(x0^2 - 1), so M = 1 / sqrt(x0^2 - 1)
    makes the envelope 2 M rho^-k tight.
    """
    if x0 <= 1:
        raise DomainError("pole must lie outside [-1, 1]")
    r = np.sqrt(x0 * x0 - 1)
    return x0 + r, 1.0 / r


# ---------------------------------------------------------------- fitting


def chebyshev_fit(samples, n):
    """(ChebSeries of degree n, max re-evaluation residual on the samples).

    On first-kind Chebyshev nodes the coefficients come from a DCT;
    otherwise a least-squares fit is used.
    """
    g, v = samples.grid, np.asarray(samples.values, dtype=float)
    N = g.size
    if n + 1 > N:
        raise PreconditionError("need at least n + 1 samples")
    if np.allclose(g, chebyshev_nodes(N), atol=1e-14, rtol=0):
        c = dct(v[::-1], type=2) / N
        c[0] /= 2
        c = c[: n + 1]
    else:
        c = C.chebfit(g, v, n)
    res = float(np.max(np.abs(C.chebval(g, c) - v)))
    return ChebSeries(c), res


def chebyshev_fit_function(f, tol, parity=None, max_degree=512):
    """Chebyshev series of a callable, doubling the degree until the dense residual is below tol."""
    n = 8
    dense = chebyshev_nodes(2048)
    while True:
        s, _ = chebyshev_fit(FunctionSample(chebyshev_nodes(2 * n + 2), f(chebyshev_nodes(2 * n + 2))), n)
        c = np.array(s.coeffs.real)
        if parity == "even":
            c[1::2] = 0
        elif parity == "odd":
            c[0::2] = 0
        res = float(np.max(np.abs(C.chebval(dense, c) - f(dense))))
        if res <= tol or n >= max_degree:
            return ChebSeries(c), res
        n *= 2


# ---------------------------------------------------------------- generalized oracles


def check_monotone_map(f, n=1001):
    """(fmin, fmax) of |f'| on a dense grid; raises unless f is strictly monotone into [-pi, pi]."""
    x = np.linspace(-1, 1, n)
    y = np.asarray(f(x), dtype=float)
    d = np.diff(y) / np.diff(x)
    if not (np.all(d > 0) or np.all(d < 0)):
        raise PreconditionError("oracle map must be strictly monotone")
    if np.min(y) < -np.pi - 1e-12 or np.max(y) > np.pi + 1e-12:
        raise PreconditionError("oracle map must take values in [-pi, pi]")
    ad = np.abs(d)
    return float(ad.min()), float(ad.max())


def generalized_oracle_protocol(f, phases, samples=None):
    """Standard-convention protocol with oracle exp(i f(x) X).

    ``f`` is a callable, or None with ``samples = (grid, values)`` for a
    PCHIP-interpolated map.
    """
    o = Oracle("generalized", f=f, samples=samples)
    check_monotone_map(o.angle)
    return Protocol.standard(phases, o)


def inverse_map(f, t, n=20001):
    """x with f(x) = t for a strictly monotone f on [-1, 1] (dense-grid interpolation)."""
    x = np.linspace(-1, 1, n)
    y = np.asarray(f(x), dtype=float)
    if y[-1] < y[0]:
        x, y = x[::-1], y[::-1]
    return np.interp(t, y, x)


def modified_basis_projection(p, n_nodes=256):
    """Coefficients q_m of Im P(x) = sum_m q_m e^{i m f(x)}, m = -k..k.

    Samples on a uniform grid in t = f(x) over one period (the 1/f'
    Jacobian of the x-measure), then an FFT. Returns a dict m -> q_m. For a
    symmetric small-phase protocol q_{k-2j} ~ phi_j.
    """
    f = p.oracle.angle
    lo, hi = sorted(float(v) for v in f(np.array([-1.0, 1.0])))
    if hi - lo < 2 * np.pi - 1e-9:
        raise PreconditionError("modified-basis projection needs f to cover a full period")
    t = lo + 2 * np.pi * np.arange(n_nodes) / n_nodes
    x = inverse_map(f, t)
    v = evaluate(p, x)[:, 0, 0].imag
    q = np.fft.fft(v) / n_nodes * np.exp(-1j * np.fft.fftfreq(n_nodes, 1 / n_nodes) * lo)
    # q[m] multiplies e^{i m t}; shift by lo so that t starts at lo
    k = p.oracle_length
    return {m: complex(q[m % n_nodes]) for m in range(-k, k + 1)}


def recover_symmetric_phases(p, n_nodes=256):
    """phi_j ~ q_{k-2j}, valid in the small-phase limit."""
    q = modified_basis_projection(p, n_nodes)
    k = p.oracle_length
    return np.array([q[k - 2 * j].real for j in range(k + 1)])


# ---------------------------------------------------------------- discretized phases


@dataclass
class Discretized:
    protocol: Protocol
    gate_errors: list  # projective error of each replaced phase gate
    ledger: float  # 2 * sum of gate errors, an upper bound on the sup deviation


def discretize_phases(p, S=None, eps_gate=0.3, depth=0, net=None, max_len=12):
    """Replace every phase letter by a Fixed gate-word product from Solovay-Kitaev.

    The word is sign-corrected to the closer of +-e^{i phi Z}. Raises a
    PreconditionError naming the achieved error if some gate misses eps_gate.
    """
    from . import skt

    if net is None:
        S = skt.clifford_t() if S is None else S
        net = skt.build_net(S, max_len, min(eps_gate, 0.3))
    letters, errs = [], []
    cache = {}
    for l in p.interleave:
        if isinstance(l, (Fixed, OracleCall)):
            letters.append(l)
            continue
        phi = p.phases[l.index]
        if phi not in cache:
            target = su2.rz(phi)
            res = skt.solovay_kitaev(target, depth, net)
            M = res.word.product
            if su2.distance(M, target) > su2.distance(-M, target):
                M = -M
            cache[phi] = (M, float(su2.distance(M, target)))
        M, e = cache[phi]
        errs.append(e)
        letters.append(Fixed(M))
    worst = max(errs) if errs else 0.0
    if worst > eps_gate:
        raise PreconditionError(f"depth {depth} reaches gate error {worst:.3g} > {eps_gate:g}")
    return Discretized(Protocol.word(letters, (), p.oracle), errs, 2 * sum(errs))
