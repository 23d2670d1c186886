"""QSP protocols: representation, evaluation, transforms and polynomial extraction.

A protocol is a word over three letters. ``Phase(j)`` is exp(i phases[j] Z),
``OracleCall`` is the signal unitary W(x), and ``Fixed(M)`` is a constant
SU(2) gate. The standard convention is

    U(Phi, x) = e^{i phi_0 Z} prod_{j=1..k} W(x) e^{i phi_j Z}.
"""

import json
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as C

from . import su2
from .errors import DomainError, InconsistencyError, ParseError, StructureError, UnitarityError


# ---------------------------------------------------------------- letters

@dataclass(frozen=True)
class Phase:
    index: int


@dataclass(frozen=True)
class OracleCall:
    pass


@dataclass(frozen=True, eq=False)
class Fixed:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex).reshape(2, 2)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)


ORACLE = OracleCall()


# ---------------------------------------------------------------- oracles

class Oracle:
    """Signal oracle x -> exp(i f(x) X).

    ``kind`` is "standard" (f = arccos) or "generalized" (any strictly
    monotone f). A generalized oracle may be built from samples, in which
    case f is a monotone cubic (PCHIP) interpolant and the oracle is
    serializable.
    """

    def __init__(self, kind="standard", f=None, samples=None):
        self.kind = kind
        self.samples = None
        if kind == "standard":
            self.f = np.arccos
        elif kind == "generalized":
            if samples is not None:
                from scipy.interpolate import PchipInterpolator

                grid, vals = (np.asarray(v, dtype=float) for v in samples)
                self.samples = (grid, vals)
                self.f = PchipInterpolator(grid, vals)
            elif f is not None:
                self.f = f
            else:
                raise ValueError("generalized oracle needs f or samples")
        else:
            raise ValueError(f"unknown oracle kind {kind!r}")

    def angle(self, x):
        return np.asarray(self.f(np.asarray(x, dtype=float)), dtype=float)

    def matrices(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "standard":
            return su2.signal_unitary(x)
        t = self.angle(x)
        out = np.empty(x.shape + (2, 2), dtype=complex)
        out[..., 0, 0] = np.cos(t)
        out[..., 1, 1] = np.cos(t)
        out[..., 0, 1] = 1j * np.sin(t)
        out[..., 1, 0] = 1j * np.sin(t)
        return out

    def to_json(self):
        if self.kind == "standard":
            return {"kind": "standard"}
        if self.samples is None:
            raise ValueError("only sampled generalized oracles can be serialized")
        return {"kind": "generalized", "grid": self.samples[0].tolist(), "values": self.samples[1].tolist()}

    @classmethod
    def from_json(cls, d):
        if d.get("kind", "standard") == "standard":
            return STANDARD_ORACLE
        return cls("generalized", samples=(d["grid"], d["values"]))


STANDARD_ORACLE = Oracle()


# ---------------------------------------------------------------- series and samples

@dataclass(frozen=True, eq=False)
class ChebSeries:
    """f(x) = sum_n c_n T_n(x) with complex coefficients."""

    coeffs: np.ndarray
    basis: str = "chebyshev-T"

    def __post_init__(self):
        c = np.atleast_1d(np.array(self.coeffs, dtype=complex))
        if c.size == 0:
            c = np.zeros(1, dtype=complex)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def __call__(self, x):
        v = C.chebval(np.asarray(x, dtype=float), self.coeffs)
        if np.all(self.coeffs.imag == 0):
            return np.real(v)
        return v

    @property
    def degree(self):
        nz = np.nonzero(np.abs(self.coeffs) > 0)[0]
        return int(nz[-1]) if nz.size else 0

    @property
    def real(self):
        return ChebSeries(self.coeffs.real)

    @property
    def imag(self):
        return ChebSeries(self.coeffs.imag)

    def one_norm(self):
        return float(np.sum(np.abs(self.coeffs)))

    def parity(self, tol=1e-12):
        """'even', 'odd', or None for mixed parity."""
        c = np.abs(self.coeffs)
        odd_mass, even_mass = c[1::2].sum(), c[0::2].sum()
        if odd_mass <= tol:
            return "even"
        if even_mass <= tol:
            return "odd"
        return None

    def __add__(self, other):
        n = max(self.coeffs.size, other.coeffs.size)
        a = np.zeros(n, complex)
        a[: self.coeffs.size] += self.coeffs
        a[: other.coeffs.size] += other.coeffs
        return ChebSeries(a)

    def scale(self, s):
        return ChebSeries(self.coeffs * s)

    def to_json(self):
        return {"basis": self.basis, "coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs]}

    @classmethod
    def from_json(cls, d):
        try:
            if d.get("basis", "chebyshev-T") != "chebyshev-T":
                raise ParseError(f"unsupported basis {d.get('basis')!r}")
            # entries are [re, im] pairs or plain real numbers
            coeffs = [complex(float(c)) if isinstance(c, (int, float)) else complex(float(c[0]), float(c[1]))
                      for c in d["coeffs"]]
            if any(not isinstance(c, (int, float)) and len(c) != 2 for c in d["coeffs"]):
                raise ValueError("complex entries must be [re, im] pairs")
        except ParseError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed ChebSeries: {exc}") from exc
        return cls(np.array(coeffs))

    @classmethod
    def basis_function(cls, n, scale=1.0):
        c = np.zeros(n + 1)
        c[n] = scale
        return cls(c)


def chebyshev_nodes(n, kind="first"):
    """n Chebyshev nodes in increasing order.

    ``kind="first"`` gives the interior Gauss nodes, ``"second"`` the
    Lobatto nodes that include the endpoints.
    """
    if kind == "first":
        j = np.arange(n)
        return -np.cos(np.pi * (j + 0.5) / n)
    if n == 1:
        return np.zeros(1)
    return -np.cos(np.pi * np.arange(n) / (n - 1))


@dataclass(frozen=True, eq=False)
class FunctionSample:
    """Values of a real or SU(2)-valued function on an increasing grid."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values)
        if g.ndim != 1 or np.any(np.diff(g) <= 0):
            raise ValueError("grid must be one-dimensional and strictly increasing")
        if v.shape[0] != g.size:
            raise ValueError("values and grid lengths differ")
        if not np.all(np.isfinite(v)):
            raise ValueError("non-finite sample values")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)

    @property
    def is_unitary(self):
        return self.values.ndim == 3

    def sup(self):
        if self.is_unitary:
            return float(np.max(su2.op_norm(self.values - su2.I2)))
        return float(np.max(np.abs(self.values)))

    def lipschitz(self):
        """Largest divided difference over adjacent nodes."""
        if self.is_unitary:
            d = su2.op_norm(np.diff(self.values, axis=0))
        else:
            d = np.abs(np.diff(self.values))
        return float(np.max(d / np.diff(self.grid))) if self.grid.size > 1 else 0.0

    def to_json(self):
        if self.is_unitary:
            vals = [[[[float(z.real), float(z.imag)] for z in row] for row in m] for m in self.values]
        else:
            vals = [float(v) for v in self.values]
        return {"grid": [float(g) for g in self.grid], "values": vals}

    @classmethod
    def from_json(cls, d):
        try:
            grid = np.array(d["grid"], dtype=float)
            raw = d["values"]
            if raw and isinstance(raw[0], list):
                arr = np.array(raw, dtype=float)
                vals = arr[..., 0] + 1j * arr[..., 1]
            else:
                vals = np.array(raw, dtype=float)
            return cls(grid, vals)
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed FunctionSample: {exc}") from exc


# ---------------------------------------------------------------- protocol

@dataclass(frozen=True, eq=False)
class Protocol:
    phases: tuple
    interleave: tuple
    convention: str = "standard"
    oracle: Oracle = field(default=STANDARD_ORACLE)

    def __post_init__(self):
        object.__setattr__(self, "phases", tuple(float(p) for p in self.phases))
        object.__setattr__(self, "interleave", tuple(self.interleave))
        for letter in self.interleave:
            if isinstance(letter, Phase) and not 0 <= letter.index < len(self.phases):
                raise ValueError(f"phase index {letter.index} out of range")

    @classmethod
    def standard(cls, phases, oracle=None):
        phases = [float(p) for p in np.atleast_1d(np.asarray(phases, dtype=float))]
        if not phases:
            raise ValueError("a standard protocol needs at least one phase")
        letters = [Phase(0)]
        for j in range(1, len(phases)):
            letters += [ORACLE, Phase(j)]
        return cls(tuple(phases), tuple(letters), "standard", oracle or STANDARD_ORACLE)

    @classmethod
    def word(cls, letters, phases=(), oracle=None):
        return cls(tuple(phases), tuple(letters), "word", oracle or STANDARD_ORACLE)

    @classmethod
    def fixed(cls, matrix, oracle=None):
        return cls.word([Fixed(matrix)], oracle=oracle)

    @property
    def oracle_length(self):
        return sum(1 for l in self.interleave if isinstance(l, OracleCall))

    @property
    def phase_length(self):
        return len(self.interleave) - self.oracle_length

    @property
    def length(self):
        return len(self.interleave)

    @property
    def k(self):
        return self.oracle_length

    @property
    def parity(self):
        return "even" if self.oracle_length % 2 == 0 else "odd"

    def letter_matrix(self, letter):
        if isinstance(letter, Phase):
            return su2.rz(self.phases[letter.index])
        if isinstance(letter, Fixed):
            return letter.matrix
        raise TypeError("oracle letters depend on x")

    def __repr__(self):
        if self.convention == "standard":
            return f"Protocol.standard({list(self.phases)!r})"
        return f"Protocol(word, length={self.length}, oracles={self.oracle_length})"


def identity_protocol(oracle=None):
    return Protocol.standard([0.0], oracle=oracle)


def evaluate(p, x):
    """U(Phi, x) for scalar x (2x2 result) or array x (shape (..., 2, 2))."""
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) > 1 + 1e-12):
        raise DomainError("signal x must lie in [-1, 1]")
    xa = np.clip(xa, -1.0, 1.0)
    flat = xa.reshape(-1)
    M = np.broadcast_to(su2.I2, (flat.size, 2, 2)).copy()
    W = p.oracle.matrices(flat) if p.oracle_length else None
    for letter in p.interleave:
        if isinstance(letter, Phase):
            e = np.exp(1j * p.phases[letter.index])
            M[:, :, 0] *= e
            M[:, :, 1] *= np.conj(e)
        elif isinstance(letter, OracleCall):
            M = M @ W
        else:
            M = M @ letter.matrix
    return M.reshape(xa.shape + (2, 2))


def project_pi(U, selector="top-left"):
    """Im of the top-left (default) or top-right entry; batched."""
    U = np.asarray(U)
    if selector == "top-left":
        return U[..., 0, 0].imag
    if selector == "top-right":
        return U[..., 0, 1].imag
    raise ValueError(f"unknown selector {selector!r}")


def projection(p, grid, selector="top-left"):
    """Pi-projection of a protocol sampled on ``grid`` as a FunctionSample."""
    grid = np.asarray(grid, dtype=float)
    return FunctionSample(grid, project_pi(evaluate(p, grid), selector))


# ---------------------------------------------------------------- word algebra

def _merge(protocols):
    users = [p.oracle for p in protocols if p.oracle_length]
    oracle = users[0] if users else protocols[0].oracle
    for o in users:
        if o is not oracle and not (o.kind == oracle.kind == "standard"):
            raise ValueError("cannot concatenate protocols with different oracles")
    phases, letters = [], []
    for p in protocols:
        off = len(phases)
        phases.extend(p.phases)
        for l in p.interleave:
            letters.append(Phase(l.index + off) if isinstance(l, Phase) else l)
    return phases, letters, oracle


def concat(*protocols):
    """Pointwise product: evaluate(concat(A, B), x) = A(x) @ B(x)."""
    phases, letters, oracle = _merge(protocols)
    return Protocol.word(letters, phases, oracle)


def compact(p):
    """Merge every maximal run of non-oracle letters into one letter.

    Runs made only of phases become a single phase; mixed runs become a
    single Fixed gate. Evaluation is unchanged.
    """
    phases, letters, run = [], [], []

    def flush():
        if not run:
            return
        if len(run) == 1:
            l = run[0]
            if isinstance(l, Phase):
                phases.append(p.phases[l.index])
                letters.append(Phase(len(phases) - 1))
            else:
                letters.append(l)
        elif all(isinstance(l, Phase) for l in run):
            phases.append(sum(p.phases[l.index] for l in run))
            letters.append(Phase(len(phases) - 1))
        else:
            M = su2.I2
            for l in run:
                M = M @ p.letter_matrix(l)
            letters.append(Fixed(M))
        run.clear()

    for l in p.interleave:
        if isinstance(l, OracleCall):
            flush()
            letters.append(l)
        else:
            run.append(l)
    flush()
    if not letters:
        return identity_protocol(p.oracle)
    return Protocol.word(letters, phases, p.oracle)


_IZ = 1j * su2.Z


def inverse(p):
    """Protocol for U(x)^dagger.

    W^dagger = (iZ) W (-iZ) holds for every oracle exp(i f X), so the
    inverse needs no new letter type and keeps the oracle length.
    """
    phases = [-v for v in p.phases]
    letters = []
    for l in reversed(p.interleave):
        if isinstance(l, OracleCall):
            letters += [Fixed(_IZ), ORACLE, Fixed(-_IZ)]
        elif isinstance(l, Phase):
            letters.append(l)
        else:
            letters.append(Fixed(su2.dagger(l.matrix)))
    return compact(Protocol.word(letters, phases, p.oracle))


def reverse(p):
    """Reversed word with Fixed gates transposed; evaluates to U(x)^T."""
    if p.convention == "standard":
        return Protocol.standard(p.phases[::-1], p.oracle)
    letters = [Fixed(l.matrix.T) if isinstance(l, Fixed) else l for l in reversed(p.interleave)]
    return Protocol.word(letters, p.phases, p.oracle)


def negate(p):
    """Negate every phase (Fixed gates are left unchanged)."""
    return Protocol(tuple(-v for v in p.phases), p.interleave, p.convention, p.oracle)


def signal_negate(p):
    """Protocol for x -> U(Phi, -x).

    Each oracle is wrapped as (iZ) W (iZ), which equals W(-x) exactly for the
    standard oracle (Z W Z alone would differ by a sign per oracle).
    """
    letters = []
    for l in p.interleave:
        if isinstance(l, OracleCall):
            letters += [Fixed(_IZ), ORACLE, Fixed(_IZ)]
        else:
            letters.append(l)
    return Protocol.word(letters, p.phases, p.oracle)


PLANE_MAPS = {
    "XY": su2.rotation((1, 0, 0), np.pi / 4),  # XZ-plane -> XY-plane
    "YZ": su2.rotation((0, 0, 1), np.pi / 4),  # XZ-plane -> YZ-plane
}


def conjugate(p, G):
    """Fixed(G) p Fixed(G^dagger); G may be a plane-map name "XY" or "YZ"."""
    if isinstance(G, str):
        G = PLANE_MAPS[G]
    G = np.asarray(G, dtype=complex)
    return concat(Protocol.fixed(G, p.oracle), p, Protocol.fixed(su2.dagger(G), p.oracle))


def transform(p, op):
    """Apply "reverse", "negate", "signal_negate" or ("conjugate", plane)."""
    if isinstance(op, tuple) and op[0] == "conjugate":
        return conjugate(p, op[1])
    table = {"reverse": reverse, "negate": negate, "signal_negate": signal_negate}
    if op not in table:
        raise ValueError(f"unknown transform {op!r}")
    return table[op](p)


def half(p):
    """Split a palindromic standard protocol as U = L L^T (even) or L W L^T (odd).

    Returns the standard protocol L.
    """
    ph = np.asarray(p.phases)
    if p.convention != "standard" or not np.allclose(ph, ph[::-1], atol=1e-12):
        raise StructureError("half() needs a palindromic standard protocol")
    k = p.oracle_length
    if k % 2 == 0:
        n = k // 2
        return Protocol.standard(list(ph[:n]) + [ph[n] / 2], p.oracle)
    return Protocol.standard(ph[: (k + 1) // 2], p.oracle)


# ---------------------------------------------------------------- structure checks

def _grid_of(grid):
    if isinstance(grid, FunctionSample):
        return grid.grid
    if grid is None:
        return chebyshev_nodes(33)
    return np.asarray(grid, dtype=float)


def check_structure(p, grid=None, which="symmetric", tol=None):
    """(passed, max_deviation) for a structural property over a grid.

    ``which="symmetric"`` measures ||Y U Y - U^dagger||. ``("planar", n)``
    measures |n . v| where U = c I + i v.sigma, i.e. |axis.n| sin(theta).
    """
    tol = su2.TOL.structure if tol is None else tol
    U = p if isinstance(p, np.ndarray) else evaluate(p, _grid_of(grid))
    if which == "symmetric":
        dev = su2.op_norm(su2.Y @ U @ su2.Y - su2.dagger(U))
    elif isinstance(which, tuple) and which[0] == "planar":
        n = np.asarray(which[1], dtype=float)
        n = n / np.linalg.norm(n)
        dev = np.abs(su2.pauli_vector(U) @ n)
    else:
        raise ValueError(f"unknown structure {which!r}")
    dev = float(np.max(dev))
    return dev <= tol, dev


def require_symmetric(p, grid=None):
    ok, dev = check_structure(p, grid, "symmetric")
    if not ok:
        raise StructureError(f"protocol is not symmetric (deviation {dev:.3e})", dev)


# ---------------------------------------------------------------- polynomials

def _fit(x, y, deg):
    return C.chebfit(x, y.real, deg) + 1j * C.chebfit(x, y.imag, deg)


def extract_polynomials(p, tol=1e-9):
    """(P, Q) with U = [[P, i Q s], [i Q* s, P*]] and s = sqrt(1 - x^2).

    P is interpolated at k+1 and Q at k interior Chebyshev nodes; both are
    re-checked on a 4x denser grid and an InconsistencyError is raised if
    the entries are not polynomials of the expected degree.
    """
    k = p.oracle_length
    xp = chebyshev_nodes(k + 1)
    P = ChebSeries(_fit(xp, evaluate(p, xp)[:, 0, 0], k))
    if k >= 1:
        xq = chebyshev_nodes(k)
        Q = ChebSeries(_fit(xq, evaluate(p, xq)[:, 0, 1] / (1j * np.sqrt(1 - xq ** 2)), k - 1))
    else:
        Q = ChebSeries([0.0])
    xd = chebyshev_nodes(4 * (k + 1))
    U = evaluate(p, xd)
    s = np.sqrt(1 - xd ** 2)
    res = max(np.max(np.abs(C.chebval(xd, P.coeffs) - U[:, 0, 0])),
              np.max(np.abs(1j * C.chebval(xd, Q.coeffs) * s - U[:, 0, 1])))
    if res > tol:
        raise InconsistencyError(f"entries are not degree-{k} polynomials (residual {res:.3e})", res)
    return P, Q


# ---------------------------------------------------------------- JSON

def _mat_to_json(M):
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def _mat_from_json(m):
    arr = np.array(m, dtype=float)
    if arr.shape != (2, 2, 2):
        raise ParseError(f"fixed gate must be 2x2 [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def protocol_to_json(p):
    letters = []
    for l in p.interleave:
        if isinstance(l, Phase):
            letters.append({"op": "phase", "index": l.index})
        elif isinstance(l, OracleCall):
            letters.append({"op": "oracle"})
        else:
            letters.append({"op": "fixed", "matrix": _mat_to_json(l.matrix)})
    d = {"convention": p.convention, "phases": list(p.phases), "interleave": letters, "parity": p.parity}
    if p.oracle.kind != "standard":
        d["oracle"] = p.oracle.to_json()
    return d


def protocol_from_json(d):
    """Inverse of protocol_to_json; raises ParseError or UnitarityError."""
    if not isinstance(d, dict):
        raise ParseError("protocol JSON must be an object")
    try:
        phases = [float(v) for v in d["phases"]]
        raw = d.get("interleave")
        convention = d.get("convention", "standard")
        oracle = Oracle.from_json(d["oracle"]) if "oracle" in d else STANDARD_ORACLE
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed protocol: {exc}") from exc
    if raw is None:
        p = Protocol.standard(phases, oracle)
    else:
        letters = []
        for pos, item in enumerate(raw):
            op = item.get("op") if isinstance(item, dict) else None
            if op == "phase":
                idx = item.get("index")
                if not isinstance(idx, int) or not 0 <= idx < len(phases):
                    raise ParseError(f"interleave[{pos}]: bad phase index {idx!r}")
                letters.append(Phase(idx))
            elif op == "oracle":
                letters.append(ORACLE)
            elif op == "fixed":
                try:
                    M = _mat_from_json(item["matrix"])
                except (KeyError, ValueError, TypeError) as exc:
                    raise ParseError(f"interleave[{pos}]: {exc}") from exc
                try:
                    su2.check_unitary(M, tol=1e-9)
                except UnitarityError as exc:
                    raise UnitarityError(f"interleave[{pos}]: {exc}") from exc
                letters.append(Fixed(M))
            else:
                raise ParseError(f"interleave[{pos}]: unknown op {op!r}")
        p = Protocol(tuple(phases), tuple(letters), convention, oracle)
    if "parity" in d and d["parity"] != p.parity:
        raise ParseError(f"declared parity {d['parity']!r} does not match {p.oracle_length} oracle calls")
    return p


def dumps(p):
    return json.dumps(protocol_to_json(p))


def loads(s):
    try:
        d = json.loads(s)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return protocol_from_json(d)
