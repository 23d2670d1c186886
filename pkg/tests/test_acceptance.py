"""End-to-end acceptance checks, one test per criterion.

Each test records (passed, detail) in RESULTS before asserting; the
terminal summary in conftest prints one PASS/FAIL line per criterion.
"""

import time

import numpy as np
import pytest
from numpy.polynomial import chebyshev as C

from qspskt import skt, su2
from qspskt.commutator import (commutator_mismatch, nested_error_bound, nested_mismatch_scaling, nested_scaling,
                               perturbed_quadruple)
from qspskt.density import (chebyshev_fit, density_pipeline, generalized_oracle_protocol, pole_parameters,
                            recover_symmetric_phases, small_phase_deviation, truncation_degree)
from qspskt.driver import LENGTH_FACTOR, SHRINK, Schedule, length_schedule, level0_net, refine_step
from qspskt.phases import fit_phases, gradient_check, sample_target
from qspskt.protocol import ChebSeries, FunctionSample, Protocol, check_structure, chebyshev_nodes, evaluate, \
    extract_polynomials
from qspskt.words import count_table

RESULTS = {}


def record(n, ok, detail):
    RESULTS[n] = (bool(ok), detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def test_criterion_01_reference_protocol():
    t0 = time.perf_counter()
    P, _ = extract_polynomials(Protocol.standard([0, -np.pi / 4, 3 * np.pi / 4, -np.pi / 4, -np.pi / 4]))
    re_want = C.poly2cheb([-1, 0, 4, 0, -2])
    im_want = C.poly2cheb([0, 0, -2, 0, 2])
    err = max(np.max(np.abs(P.coeffs.real - re_want)), np.max(np.abs(P.coeffs.imag - im_want)))
    dt = time.perf_counter() - t0
    record(1, err <= 1e-10 and dt < 1, f"coefficient error {err:.1e}, {dt:.2f} s")


def test_criterion_02_qsp_invariants():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    x = chebyshev_nodes(101)
    s = np.sqrt(1 - x ** 2)
    worst = {"unitarity": 0.0, "parity": 0.0, "norm": 0.0}
    for _ in range(1000):
        k = int(rng.integers(0, 33))
        p = Protocol.standard(rng.uniform(-np.pi, np.pi, k + 1))
        U = evaluate(p, x)
        Um = evaluate(p, -x)
        worst["unitarity"] = max(worst["unitarity"],
                                 float(np.max(np.abs(U @ np.conj(np.swapaxes(U, -1, -2)) - su2.I2))))
        P, Q = U[:, 0, 0], U[:, 0, 1] / (1j * s)
        Pm, Qm = Um[:, 0, 0], Um[:, 0, 1] / (1j * s)
        par = max(np.max(np.abs(Pm - (-1) ** k * P)), np.max(np.abs(Qm - (-1) ** (k - 1) * Q)) if k else 0.0)
        worst["parity"] = max(worst["parity"], float(par))
        worst["norm"] = max(worst["norm"], float(np.max(np.abs(np.abs(P) ** 2 + s ** 2 * np.abs(Q) ** 2 - 1))))
    dt = time.perf_counter() - t0
    ok = worst["unitarity"] <= 1e-12 and worst["parity"] <= 1e-9 and worst["norm"] <= 1e-9 and dt < 30
    record(2, ok, ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + f", {dt:.1f} s")


def test_criterion_03_nested_leading_order():
    t0 = time.perf_counter()
    slope, _, dev = nested_scaling((1e-1, 3e-2, 1e-2))
    dt = time.perf_counter() - t0
    ok = abs(slope - 5) <= 0.3 and max(dev) <= 1e-9 and dt < 10
    record(3, ok, f"slope {slope:.3f}, planarity {max(dev):.1e}, {dt:.2f} s")


def test_criterion_04_approximate_commutators():
    rng = np.random.default_rng(4)
    Delta, delta = 1e-2, 1e-1
    std = max(commutator_mismatch(*perturbed_quadruple(rng, Delta, delta)) for _ in range(100))
    std_bound = skt.commutator_error_bound(Delta, delta)
    eps = 1e-4
    D, d = eps ** 0.25, eps
    nst = max(commutator_mismatch(*perturbed_quadruple(rng, D, d), nested=True) for _ in range(100))
    nst_bound = 32 * D * d * 1.5
    slope, _ = nested_mismatch_scaling()
    ok = std <= std_bound and nst <= nst_bound and abs(slope - 1.25) <= 0.2
    record(4, ok, f"standard {std:.2e} <= {std_bound:.2e}, nested {nst:.2e} <= {nst_bound:.2e}, slope {slope:.3f}")


@pytest.fixture(scope="module")
def sk_net():
    return skt.build_net(skt.clifford_t(), 16, 0.3)


def test_criterion_05_standard_sk(sk_net):
    t0 = time.perf_counter()
    targets = su2.haar_su2(np.random.default_rng(0), 20)
    med, expo = skt.level_study(sk_net, targets, depth=2)
    l0 = max(w.length for w in sk_net.entries)
    lengths_ok = True
    for U in targets:
        r = skt.solovay_kitaev(U, 2, sk_net)
        lengths_ok &= r.word.length <= skt.sk_length_bound(2, l0)
        lengths_ok &= all(tot == 2 * a + 2 * b + u for _, tot, a, b, u in r.lengths)
    dt = time.perf_counter() - t0
    in_window = all(abs(e - 1.5) <= 0.25 * 1.5 for e in expo)
    ok = in_window and lengths_ok and dt < 300
    record(5, ok, f"medians {[f'{m:.2e}' for m in med]}, exponents {[f'{e:.2f}' for e in expo]}, "
                  f"lengths {'exact' if lengths_ok else 'broken'}, {dt:.1f} s")


def test_criterion_06_qsp_shrinking():
    net = level0_net(0.1)
    rep = refine_step(net, n_samples=50)
    eps1 = 0.1 ** SHRINK
    grid = net.grid
    planar = all(check_structure(e.protocol, grid)[0] for e in rep.net.entries)
    lengths_ok = rep.net.max_length <= LENGTH_FACTOR * net.max_length
    s = Schedule(0.1, 3)
    sched_ok = all(np.isclose(s.eps(n), s.eps(n - 1) ** SHRINK) and s.length(n) == 17 * s.length(n - 1)
                   for n in range(1, 6))
    sched_ok &= length_schedule(0.1, 1, 1e-3) == (5, 17 ** 5)
    ok = rep.worst <= 1.5 * eps1 and lengths_ok and planar and sched_ok
    record(6, ok, f"worst {rep.worst:.4f} <= {1.5 * eps1:.4f}, max length {rep.net.max_length} <= "
                  f"{LENGTH_FACTOR * net.max_length}, planar {planar}, schedule {sched_ok}")


def test_criterion_07_density_pipeline():
    g = ChebSeries([0, 0.5, 0, 0.3, 0, 0.2])
    r = density_pipeline(g, 1e-2, grid=chebyshev_nodes(65))
    alphas = np.array([50.0, 100.0, 200.0])
    dev = [small_phase_deviation(ChebSeries([0.3, 0, 0.4, 0, 0.3]), a, chebyshev_nodes(65))[1] for a in alphas]
    slope = float(np.polyfit(np.log(alphas), np.log(dev), 1)[0])
    ok = r.error <= 1e-2 and abs(slope + 2) <= 0.2
    record(7, ok, f"pipeline error {r.error:.1e} (a = {r.a}), deviation slope {slope:.3f}")


def test_criterion_08_truncation_degree():
    f = lambda x: 1 / (2 - x)  # noqa: E731
    rho, M = pole_parameters(2.0)
    s, _ = chebyshev_fit(FunctionSample(chebyshev_nodes(256), f(chebyshev_nodes(256))), 200)
    xs = np.linspace(-1, 1, 1001)
    rows = []
    for eps in (1e-2, 1e-3, 1e-4):
        n = truncation_degree(M, rho, eps)
        rows.append((eps, n, float(np.max(np.abs(C.chebval(xs, s.coeffs.real[: n + 1]) - f(xs))))))
    ok = all(err <= eps for eps, _, err in rows)
    record(8, ok, ", ".join(f"eps {e:g}: n {n}, err {err:.1e}" for e, n, err in rows))


def test_criterion_09_goulden_jackson():
    t0 = time.perf_counter()
    rows = count_table(10, 6)
    good = sum(a == b for _, _, a, b in rows)
    dt = time.perf_counter() - t0
    record(9, good == len(rows) == 66 and dt < 60, f"{good}/{len(rows)} exact, {dt:.1f} s")


def test_criterion_10_phase_finder():
    t0 = time.perf_counter()
    rng = np.random.default_rng(10)
    c = np.zeros(9)
    c[0::2] = rng.normal(size=5)
    xs = np.linspace(-1, 1, 2001)
    c *= 0.9 / np.max(np.abs(C.chebval(xs, c)))
    targets = [(ChebSeries([0, 1]), 1), (ChebSeries([0, 0, 0.9]), 2), (ChebSeries([0, 0, 0, 0, 0.9]), 4),
               (ChebSeries(c), 8)]
    res, grads = [], []
    for t, d in targets:
        r = fit_phases(t, d, starts=8)
        res.append(r.residual)
        probe = Protocol.standard(rng.normal(size=d + 1))
        grads.append(gradient_check(probe, sample_target(t, 4 * d + 4)))
    dt = time.perf_counter() - t0
    ok = max(res) <= 1e-6 and max(grads) <= 1e-6 and dt < 120
    record(10, ok, f"residuals {[f'{v:.1e}' for v in res]}, gradient {max(grads):.1e}, {dt:.1f} s")


def test_criterion_11_generalized_oracle():
    rng = np.random.default_rng(11)
    phi = rng.normal(size=6)
    x = np.linspace(-1, 1, 101)
    match = float(np.max(np.abs(evaluate(generalized_oracle_protocol(np.arccos, phi), x)
                                - evaluate(Protocol.standard(phi), x))))
    f = lambda t: np.pi * (t + t ** 3) / 2  # noqa: E731
    h = 0.01 * rng.uniform(-1, 1, size=4)
    small = np.concatenate([h, h[::-1][1:]])
    rec = float(np.max(np.abs(recover_symmetric_phases(generalized_oracle_protocol(f, small)) - small)))
    ok = match <= 1e-12 and rec <= 1e-4
    record(11, ok, f"arccos match {match:.1e}, phase recovery {rec:.1e}")
