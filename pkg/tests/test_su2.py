import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qspskt import su2
from qspskt.errors import NormalizationError, UnitarityError

angles = st.floats(-np.pi, np.pi, allow_nan=False)
unit3 = st.tuples(*[st.floats(-1, 1, allow_nan=False)] * 3).filter(lambda v: np.linalg.norm(v) > 1e-3)


def _unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def test_rotation_examples():
    np.testing.assert_allclose(su2.rotation((0, 0, 1), np.pi / 2), np.diag([1j, -1j]), atol=1e-15)
    W = su2.rotation((1, 0, 0), np.arccos(0.5))
    np.testing.assert_allclose(W, [[0.5, 1j * np.sqrt(0.75)], [1j * np.sqrt(0.75), 0.5]], atol=1e-15)
    np.testing.assert_allclose(su2.rotation((0, 1, 0), 0.0), su2.I2)


def test_rotation_rejects_non_unit_axis():
    with pytest.raises(NormalizationError):
        su2.rotation((1, 1, 0), 0.3)


def test_pauli_form_examples():
    pf = su2.pauli_form(su2.rotation((0, 0, 1), np.pi / 3))
    assert pf.theta == pytest.approx(np.pi / 3, abs=1e-12)
    np.testing.assert_allclose(pf.axis, (0, 0, 1), atol=1e-12)
    pf = su2.pauli_form(su2.signal_unitary(np.cos(0.7)))
    assert pf.theta == pytest.approx(0.7, abs=1e-12)
    np.testing.assert_allclose(pf.axis, (1, 0, 0), atol=1e-12)


def test_pauli_form_identity_axis_is_z():
    pf = su2.pauli_form(su2.I2)
    assert pf.theta == 0.0 and pf.axis == (0.0, 0.0, 1.0)


def test_from_pauli_examples():
    np.testing.assert_allclose(su2.from_pauli(su2.PauliForm(0.0, (0.3, 0.1, 0.2))), su2.I2)
    np.testing.assert_allclose(su2.from_pauli(su2.PauliForm(np.pi / 2, (1, 0, 0))), 1j * su2.X, atol=1e-15)


def test_pauli_round_trip_haar(rng):
    for U in su2.haar_su2(rng, 200):
        V = su2.from_pauli(su2.pauli_form(U))
        assert su2.projective_distance(U, V) <= 1e-10
        assert abs(np.linalg.norm(su2.pauli_form(U).axis) - 1) <= 1e-12


@given(unit3, st.floats(1e-3, np.pi - 1e-3))
def test_pauli_form_inverts_from_pauli(axis, theta):
    p = su2.PauliForm(theta, _unit(axis))
    q = su2.pauli_form(su2.from_pauli(p))
    assert q.theta == pytest.approx(theta, abs=1e-10)
    np.testing.assert_allclose(q.axis, p.axis, atol=1e-9)


def test_pauli_form_near_zero_angle_is_accurate():
    U = su2.rotation(_unit((1, 2, 3)), 1e-9)
    np.testing.assert_allclose(su2.pauli_form(U).axis, _unit((1, 2, 3)), atol=1e-6)


def test_distance_examples():
    assert su2.distance(su2.I2, su2.I2) == 0.0
    t = 0.37
    assert su2.distance(su2.I2, su2.rz(t)) == pytest.approx(abs(np.exp(1j * t) - 1), abs=1e-14)


def test_op_norm_matches_eigenvalue_oracle(rng):
    A, B = su2.haar_su2(rng, 100), su2.haar_su2(rng, 100)
    D = A - B
    G = su2.dagger(D) @ D
    want = np.sqrt(np.max(np.linalg.eigvalsh(G), axis=-1))
    np.testing.assert_allclose(su2.op_norm(D), want, atol=1e-12)


def test_distance_is_a_metric(rng):
    A, B, C = (su2.haar_su2(rng, 1000) for _ in range(3))
    assert np.array_equal(su2.distance(A, B), su2.distance(B, A))
    assert np.all(su2.distance(A, C) <= su2.distance(A, B) + su2.distance(B, C) + 1e-12)


def test_group_commutator_leading_order():
    # [e^{i a X}, e^{i b Y}] = I - 2 i a b Z + ..., i.e. a z-rotation by -2ab;
    # the next terms are +-2 a b^2 along X and Y, so the gap is 2 sqrt(2) phi^3
    G = su2.group_commutator(su2.rotation((1, 0, 0), 0.01), su2.rotation((0, 1, 0), 0.01))
    d = su2.distance(G, su2.rotation((0, 0, 1), -2e-4))
    assert d == pytest.approx(2 * np.sqrt(2) * 1e-6, rel=1e-3)
    assert su2.distance(G, su2.rotation((0, 0, 1), 2e-4)) > 100 * d


def test_group_commutator_with_identity(rng):
    A = su2.haar_su2(rng)
    np.testing.assert_allclose(su2.group_commutator(A, su2.I2), su2.I2, atol=1e-15)


def test_group_commutator_residual_scales_as_fourth_power():
    phis = np.array([1e-1, 1e-2, 1e-3])
    res = []
    for p in phis:
        G = su2.group_commutator(su2.rotation((1, 0, 0), p), su2.rotation((0, 1, 0), p))
        lead = su2.I2 - 2j * p * p * su2.Z
        res.append(su2.distance(G, lead))
    slope = np.polyfit(np.log(phis), np.log(res), 1)[0]
    # the first correction is cubic in the angle (X and Y components +-2 phi^3)
    assert abs(slope - 3) <= 0.1


def test_group_commutator_leading_constant_is_stable(rng):
    n, m = _unit((1, 0.2, 0)), _unit((0, 1, 0.3))
    C = []
    for s in (1e-1, 1e-2, 1e-3):
        G = su2.group_commutator(su2.rotation(n, s), su2.rotation(m, s))
        c = np.cross(n, m)
        lead = su2.I2 - 2j * s * s * (c[0] * su2.X + c[1] * su2.Y + c[2] * su2.Z)
        C.append(su2.distance(G, lead) / s ** 3)
    assert max(C) / min(C) < 1.5


def test_unitarity_preserved_under_products(rng):
    A, B = su2.haar_su2(rng, 500), su2.haar_su2(rng, 500)
    for M in (A @ B, su2.dagger(A), A @ B @ su2.dagger(A)):
        su2.check_unitary(M, tol=1e-12)


def test_check_unitary_rejects():
    with pytest.raises(UnitarityError):
        su2.check_unitary(2 * su2.I2)
    with pytest.raises(UnitarityError):
        su2.check_unitary(1j * su2.I2)  # unitary but det = -1


def test_canonical_sign():
    U = -su2.rz(0.3)
    V = su2.canonical_sign(U)
    assert V[0, 0].real >= 0
    np.testing.assert_allclose(V, su2.rz(0.3))


def test_ih_swaps_x_and_z():
    np.testing.assert_allclose(su2.IH @ su2.X @ su2.dagger(su2.IH), su2.Z, atol=1e-15)
    np.testing.assert_allclose(su2.IH @ su2.Z @ su2.dagger(su2.IH), su2.X, atol=1e-15)
