import numpy as np
import pytest
from numpy.polynomial import chebyshev as C

from qspskt import su2
from qspskt.density import (chebyshev_T, chebyshev_compose, chebyshev_fit, chebyshev_fit_function,
                            check_monotone_map, density_pipeline, dilation, discretize_phases,
                            generalized_oracle_protocol, inverse_T, lcu_combine, modified_basis_projection,
                            pole_parameters, recover_symmetric_phases, small_phase_deviation,
                            small_phase_phases, small_phase_protocol, top_right_imag, truncation_degree)
from qspskt.errors import DomainError, PreconditionError
from qspskt.protocol import ChebSeries, FunctionSample, Protocol, check_structure, chebyshev_nodes, evaluate

X = chebyshev_nodes(65)


def test_small_phase_phases_map_coefficients():
    c = ChebSeries([0, 0.4, 0, 0.2])
    phi = small_phase_phases(c, 1.0)
    # sum_j phi_j T_{|k-2j|} with k = 3
    k = 3
    got = sum(phi[j] * C.chebval(X, np.eye(k + 1)[abs(k - 2 * j)]) for j in range(k + 1))
    np.testing.assert_allclose(got, c(X).real, atol=1e-14)
    np.testing.assert_allclose(phi, phi[::-1])


def test_small_phase_protocol_is_symmetric():
    p = small_phase_protocol(ChebSeries([0.2, 0, 0.3]), 20.0)
    assert check_structure(p, X)[1] <= 1e-9


def test_small_phase_error_is_cubic_in_inverse_alpha():
    c = ChebSeries([0.3, 0, 0.4, 0, 0.3])
    alphas = np.array([50.0, 100.0, 200.0])
    dev = [small_phase_deviation(c, a, X)[0] for a in alphas]
    slope = np.polyfit(np.log(alphas), np.log(dev), 1)[0]
    assert abs(slope + 3) <= 0.2
    resc = [small_phase_deviation(c, a, X)[1] for a in alphas]
    assert abs(np.polyfit(np.log(alphas), np.log(resc), 1)[0] + 2) <= 0.2


def test_small_phase_preconditions():
    with pytest.raises(PreconditionError):
        small_phase_protocol(ChebSeries([0.5, 0.5]), 10.0)  # mixed parity
    with pytest.raises(PreconditionError):
        small_phase_protocol(ChebSeries([1.0]), 10.0, eps=0.01)  # alpha below C^2 / eps
    with pytest.raises(PreconditionError):
        small_phase_protocol(ChebSeries([1.0]), -1.0)


def test_lcu_top_left_is_imag_top_right(rng):
    p = Protocol.standard(rng.normal(size=5))
    b = lcu_combine(p, X)
    np.testing.assert_allclose(b.values, top_right_imag(p, X), atol=1e-12)


def test_dilation_is_unitary_and_contains_block(rng):
    p = Protocol.standard(rng.normal(size=4))
    b = lcu_combine(p, X)
    x = np.array([0.3])
    D = dilation(b, 0.3)
    assert dilation(b, X).shape == (X.size, 4, 4)
    np.testing.assert_allclose(D @ D.conj().T, np.eye(4), atol=1e-12)
    assert D[0, 0].real == pytest.approx(float(top_right_imag(p, x)[0]), abs=1e-12)


def test_chebyshev_T_and_inverse():
    y = np.linspace(-0.99, 0.99, 101)
    for a in (1, 3, 5, 7):
        np.testing.assert_allclose(chebyshev_T(a, np.cos(0.3)), np.cos(a * 0.3), atol=1e-13)
        v = chebyshev_T(a, inverse_T(a, y))
        np.testing.assert_allclose(v, y, atol=1e-12)
    with pytest.raises(DomainError):
        inverse_T(3, np.array([1.5]))
    with pytest.raises(PreconditionError):
        chebyshev_compose(FunctionSample(X, X), 2)


def test_pipeline_meets_tolerance():
    g = ChebSeries([0, 0.6, 0, 0.3])
    r = density_pipeline(g, 1e-3)
    assert r.error <= 1e-3
    assert r.a % 2 == 1


def test_pipeline_preconditions():
    with pytest.raises(PreconditionError):
        density_pipeline(ChebSeries([0, 0.8, 0, 0.8]), 1e-3)
    with pytest.raises(PreconditionError):
        density_pipeline(ChebSeries([0.3, 0.3]), 1e-3)


def test_truncation_degree_bound_holds():
    for x0 in (1.5, 2.0, 3.0):
        rho, M = pole_parameters(x0)
        for eps in (1e-3, 1e-6):
            n = truncation_degree(M, rho, eps)
            f = lambda x: 1 / (x0 - x)  # noqa: E731
            s, _ = chebyshev_fit(FunctionSample(chebyshev_nodes(200), f(chebyshev_nodes(200))), 150)
            xs = np.linspace(-1, 1, 2001)
            tail = np.max(np.abs(C.chebval(xs, s.coeffs.real[: n + 1]) - f(xs)))
            assert tail <= eps


def test_pole_coefficients_are_exact():
    x0 = 2.0
    rho, M = pole_parameters(x0)
    s, _ = chebyshev_fit(FunctionSample(chebyshev_nodes(64), 1 / (x0 - chebyshev_nodes(64))), 20)
    k = np.arange(1, 21)
    np.testing.assert_allclose(s.coeffs.real[1:], 2 * M * rho ** -k, atol=1e-13)


def test_truncation_errors():
    with pytest.raises(DomainError):
        truncation_degree(1.0, 1.0, 1e-3)
    with pytest.raises(DomainError):
        pole_parameters(0.5)
    assert truncation_degree(1e-9, 2.0, 1.0) == 0


def test_chebyshev_fit_recovers_polynomial(rng):
    c = rng.normal(size=7)
    for grid in (chebyshev_nodes(20), np.linspace(-1, 1, 20)):
        s, res = chebyshev_fit(FunctionSample(grid, C.chebval(grid, c)), 6)
        np.testing.assert_allclose(s.coeffs.real, c, atol=1e-12)
        assert res <= 1e-12
    with pytest.raises(PreconditionError):
        chebyshev_fit(FunctionSample(X[:3], X[:3]), 5)


def test_fit_function_parity():
    s, res = chebyshev_fit_function(np.sin, 1e-12, "odd")
    assert res <= 1e-12 and np.all(s.coeffs.real[0::2] == 0)


def test_monotone_map_checks():
    lo, hi = check_monotone_map(np.arccos)
    assert lo == pytest.approx(1.0, abs=1e-3)
    with pytest.raises(PreconditionError):
        check_monotone_map(lambda x: x ** 2)
    with pytest.raises(PreconditionError):
        check_monotone_map(lambda x: 4 * x)


def test_arccos_oracle_matches_standard(rng):
    phi = rng.normal(size=5)
    p = generalized_oracle_protocol(np.arccos, phi)
    x = np.linspace(-1, 1, 41)
    np.testing.assert_allclose(evaluate(p, x), evaluate(Protocol.standard(phi), x), atol=1e-12)


def test_pchip_samples_oracle(rng):
    g = np.linspace(-1, 1, 401)
    phi = rng.normal(size=3)
    p = generalized_oracle_protocol(None, phi, samples=(g, np.arccos(g)))
    x = np.linspace(-0.9, 0.9, 17)
    np.testing.assert_allclose(evaluate(p, x), evaluate(Protocol.standard(phi), x), atol=1e-4)


def test_modified_basis_recovers_small_phases(rng):
    f = lambda x: np.pi * (x + x ** 3) / 2  # noqa: E731
    h = 1e-3 * rng.normal(size=3)
    phi = np.concatenate([h, h[::-1][1:]])
    p = generalized_oracle_protocol(f, phi)
    got = recover_symmetric_phases(p)
    np.testing.assert_allclose(got, phi, atol=1e-6)
    q = modified_basis_projection(p)
    assert set(q) == set(range(-4, 5))


def test_modified_basis_needs_full_period():
    with pytest.raises(PreconditionError):
        modified_basis_projection(generalized_oracle_protocol(lambda x: 0.5 * x, [0.1, 0.1]))


def test_discretized_phases_within_ledger(rng):
    p = Protocol.standard(rng.normal(size=4))
    from qspskt import skt

    net = skt.build_net(skt.clifford_t(), 10, 0.3)
    d = discretize_phases(p, eps_gate=0.3, net=net)
    x = chebyshev_nodes(17)
    dev = np.max(np.abs(evaluate(d.protocol, x)[:, 0, 0].imag - evaluate(p, x)[:, 0, 0].imag))
    assert dev <= d.ledger
    assert len(d.gate_errors) == 4 and max(d.gate_errors) <= 0.3
    with pytest.raises(PreconditionError):
        discretize_phases(p, eps_gate=1e-6, net=net)
