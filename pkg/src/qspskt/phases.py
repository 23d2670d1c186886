"""Phase finding by least squares over the Pi-projection.

The loss is 0.5 * sum_nodes (Pi(U(Phi, x)) - target(x))^2. Its gradient
follows from dU/dphi = prefix (iZ e^{i phi Z}) suffix at every phase letter.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares, minimize

from . import su2
from .errors import ConvergenceError, PreconditionError
from .parallel import max_workers, pmap
from .protocol import ChebSeries, FunctionSample, OracleCall, Phase, Protocol, chebyshev_nodes, project_pi


def _letter_mats(p, phases, x):
    N = x.size
    W = p.oracle.matrices(x) if p.oracle_length else None
    mats = []
    for l in p.interleave:
        if isinstance(l, Phase):
            mats.append(np.broadcast_to(su2.rz(phases[l.index]), (N, 2, 2)))
        elif isinstance(l, OracleCall):
            mats.append(W)
        else:
            mats.append(np.broadcast_to(l.matrix, (N, 2, 2)))
    return mats


def _entry(selector):
    if selector == "top-left":
        return 0, 0
    if selector == "top-right":
        return 0, 1
    raise ValueError(f"unknown selector {selector!r}")


def projection_and_jacobian(p, x, phases=None, selector="top-left"):
    """Pi(U(x)) and its Jacobian d Pi / d phases, shape (len(x), len(phases))."""
    phases = np.asarray(p.phases if phases is None else phases, dtype=float)
    x = np.asarray(x, dtype=float)
    mats = _letter_mats(p, phases, x)
    L = len(mats)
    N = x.size
    r, c = _entry(selector)
    # prefix rows: only row r of the prefix is needed
    pre = [None] * (L + 1)
    row = np.zeros((N, 2), dtype=complex)
    row[:, r] = 1
    pre[0] = row
    for i, M in enumerate(mats):
        pre[i + 1] = np.einsum("ni,nij->nj", pre[i], M)
    # suffix columns: only column c
    suf = [None] * (L + 1)
    col = np.zeros((N, 2), dtype=complex)
    col[:, c] = 1
    suf[L] = col
    for i in range(L - 1, -1, -1):
        suf[i] = np.einsum("nij,nj->ni", mats[i], suf[i + 1])
    val = np.einsum("ni,ni->n", pre[L], col)
    J = np.zeros((N, phases.size))
    zsign = np.array([1.0, -1.0])
    for i, l in enumerate(p.interleave):
        if isinstance(l, Phase):
            # d/dphi of e^{i phi Z} is iZ e^{i phi Z}
            v = np.einsum("ni,nij,nj->n", pre[i] * (1j * zsign), mats[i], suf[i + 1])
            J[:, l.index] += v.imag
    return val.imag, J


def objective(p, target, selector="top-left", phases=None):
    """(0.5 * sum of squared residuals, sup residual) on the target's grid."""
    vals, _ = projection_and_jacobian(p, target.grid, phases, selector)
    res = vals - target.values
    return 0.5 * float(res @ res), float(np.max(np.abs(res)))


def objective_gradient(p, target, selector="top-left", phases=None):
    vals, J = projection_and_jacobian(p, target.grid, phases, selector)
    return J.T @ (vals - target.values)


def gradient_check(p, target, h=1e-5, selector="top-left"):
    """Max relative deviation between analytic and central-difference gradients.

    Relative to the largest gradient component; if both gradients are
    below 1e-8 the absolute deviation is returned instead.
    """
    if not 1e-8 <= h <= 1e-3:
        raise PreconditionError("h must lie in [1e-8, 1e-3]")
    phi = np.asarray(p.phases, dtype=float)
    ga = objective_gradient(p, target, selector)
    gn = np.zeros_like(ga)
    for j in range(phi.size):
        e = np.zeros_like(phi)
        e[j] = h
        gn[j] = (objective(p, target, selector, phi + e)[0] - objective(p, target, selector, phi - e)[0]) / (2 * h)
    scale = max(np.max(np.abs(ga)), np.max(np.abs(gn)))
    diff = float(np.max(np.abs(ga - gn)))
    return diff if scale < 1e-8 else diff / scale


# ---------------------------------------------------------------- fitting


def _expand(theta, k):
    """Palindromic phase vector of length k + 1 from its independent half."""
    m = k // 2 + 1
    full = np.empty(k + 1)
    full[:m] = theta
    full[k + 1 - m:] = theta[::-1]
    return full


def _fold(g, k):
    """Chain rule for _expand: sum mirrored gradient entries."""
    m = k // 2 + 1
    out = g[:m].copy()
    out += g[::-1][:m]
    if k % 2 == 0:
        out[-1] -= g[k // 2]  # the middle phase is its own mirror
    return out


def fourier_start(target, k):
    """Small-phase (Fourier-limit) initialization: Im P ~ sum_j phi_j T_{|k-2j|}."""
    from .density import small_phase_phases

    c = np.zeros(k + 1)
    t = np.real(target.coeffs)[: k + 1]
    c[: t.size] = t
    return small_phase_phases(ChebSeries(c), 1.0)


@dataclass
class FitResult:
    protocol: Protocol
    residual: float  # sup residual on the verification grid
    start: int  # index of the start that produced it
    starts_used: int


def _check_target(target, degree, delta):
    par = target.parity()
    if par is None:
        raise PreconditionError("target must have definite parity")
    if target.degree > 0 and (target.degree % 2 == 0) != (par == "even"):
        raise PreconditionError("inconsistent target parity")
    if np.any(np.abs(np.imag(target.coeffs)) > 0):
        raise PreconditionError("target must be real")
    want = "even" if degree % 2 == 0 else "odd"
    if np.any(np.abs(target.coeffs) > 0) and par != want:
        raise PreconditionError(f"target parity {par} does not match degree {degree}")
    if target.degree > degree:
        raise PreconditionError(f"target degree {target.degree} exceeds {degree}")
    sup = float(np.max(np.abs(target(np.linspace(-1, 1, 2001)))))
    if sup > 1 - delta + 1e-12:
        raise PreconditionError(f"target sup {sup:.4f} exceeds 1 - delta = {1 - delta:g}")


def fit_phases(target, degree, symmetric=True, seed=0, tol=1e-6, starts=8, delta=0.0,
               selector="top-left", workers=None):
    """Fit phases so that Pi(U(Phi, x)) matches ``target``.

    BFGS (max 2000 iterations, gradient tolerance 1e-12) from the
    Fourier-limit start and ``starts - 1`` small Gaussian starts, each
    polished by Levenberg-Marquardt. The first start (in order) reaching
    ``tol`` wins; otherwise ConvergenceError carries the best result.
    """
    if degree < 0:
        raise PreconditionError("degree must be non-negative")
    if delta < 0:
        raise PreconditionError("delta must be non-negative")
    _check_target(target, degree, delta)
    k = degree
    x = chebyshev_nodes(max(4 * k, 4))
    xv = chebyshev_nodes(max(16 * k, 101))
    tv = target(x)
    template = Protocol.standard(np.zeros(k + 1))
    ss = np.random.SeedSequence(seed)
    rngs = [np.random.default_rng(s) for s in ss.spawn(starts)]
    inits = [fourier_start(target, k)]
    sigma = 0.1 / np.sqrt(max(k, 1))
    for i in range(1, starts):
        inits.append(rngs[i].normal(scale=sigma, size=k + 1))
    if symmetric:
        m = k // 2 + 1
        inits = [0.5 * (v[:m] + v[::-1][:m]) for v in inits]
        expand = lambda t: _expand(t, k)  # noqa: E731
        fold = lambda g: _fold(g, k)  # noqa: E731
    else:
        expand = lambda t: t  # noqa: E731
        fold = lambda g: g  # noqa: E731

    def res_jac(t):
        v, J = projection_and_jacobian(template, x, expand(t), selector)
        return v - tv, J

    def f(t):
        r, J = res_jac(t)
        return 0.5 * float(r @ r), fold(J.T @ r)

    def run(t0):
        out = minimize(f, t0, jac=True, method="BFGS", options={"maxiter": 2000, "gtol": 1e-12})
        ls = least_squares(lambda t: res_jac(t)[0], out.x, jac=lambda t: _fold_jac(res_jac(t)[1]),
                           method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=2000)
        t = ls.x
        p = Protocol.standard(expand(t))
        vals, _ = projection_and_jacobian(p, xv, None, selector)
        return p, float(np.max(np.abs(vals - target(xv))))

    def _fold_jac(J):
        return np.stack([fold(row) for row in J]) if symmetric else J

    if (max_workers() if workers is None else workers) > 1:
        results = iter(pmap(run, inits, workers))
    else:
        results = (run(t0) for t0 in inits)
    best = None
    for i, (p, r) in enumerate(results):
        if best is None or r < best.residual:
            best = FitResult(p, r, i, i + 1)
        if r <= tol:
            return FitResult(p, r, i, i + 1)
    raise ConvergenceError(f"best residual {best.residual:.3e} above tolerance {tol:g}", best, best.residual)


def sample_target(target, n):
    x = chebyshev_nodes(n)
    return FunctionSample(x, target(x))
