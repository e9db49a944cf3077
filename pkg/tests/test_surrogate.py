"""Linear majorizers of 2|r|^2: eigenvalue facts, tangency and domination."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pslset.correlation import LagConstraint, LagConstraintSet, SequenceSet, correlate_all_fft
from pslset.surrogate import (_apply_shift, build_surrogate, lambda_bound_D, lambda_max_phi,
                              objective_values, to_real)

from conftest import random_set


def shift_matrix(L, M, i, j, k):
    """Dense A with s^H A s = r_ij(k) (oracle only)."""
    A = np.zeros((L * M, L * M))
    for m in range(M - k):
        A[i * M + m, j * M + m + k] = 1.0
    return A


def phi_dense(L, M, i, j, k):
    a = shift_matrix(L, M, i, j, k).reshape(-1, order="F")
    b = shift_matrix(L, M, i, j, k).T.reshape(-1, order="F")
    return np.outer(a, b) + np.outer(b, a)


def random_unimodular(n, rng):
    return np.exp(2j * np.pi * rng.random(n))


@pytest.mark.parametrize("M, k, expected", [(100, 1, 99), (4, 3, 1), (4, 0, 4)])
def test_lambda_max_phi_values(M, k, expected):
    assert lambda_max_phi(M, k) == expected


@pytest.mark.parametrize("k", [-1, 4])
def test_lambda_max_phi_rejects_bad_lag(k):
    with pytest.raises(ValueError):
        lambda_max_phi(4, k)


@pytest.mark.parametrize("M", [3, 4, 5, 6])
def test_lifted_matrix_top_eigenvalue_is_M_minus_k(M):
    for c in LagConstraintSet(2, M):
        w = np.linalg.eigvalsh(phi_dense(2, M, *c))
        assert w[-1] == pytest.approx(M - c.k, abs=1e-8)


def test_lifted_quadratic_form_reproduces_correlation():
    # a a^H + b b^H has the same top eigenvalue and gives 2|r|^2 on vec(ss^H)
    rng = np.random.default_rng(1)
    L, M = 2, 4
    s = random_unimodular(L * M, rng)
    S = np.outer(s, s.conj()).reshape(-1, order="F")
    set_ = SequenceSet(np.angle(s).reshape(L, M))
    table = correlate_all_fft(set_)
    for c in LagConstraintSet(L, M):
        A = shift_matrix(L, M, *c)
        a, b = A.reshape(-1, order="F"), A.T.reshape(-1, order="F")
        herm = np.outer(a, a) + np.outer(b, b)
        assert np.linalg.eigvalsh(herm)[-1] == pytest.approx(M - c.k, abs=1e-8)
        assert np.real(S.conj() @ herm @ S) == pytest.approx(2 * abs(table(*c)) ** 2, abs=1e-9)


def test_apply_shift_matches_dense():
    rng = np.random.default_rng(2)
    L, M = 3, 5
    s = random_unimodular(L * M, rng)
    for c in LagConstraintSet(L, M):
        A = shift_matrix(L, M, *c)
        np.testing.assert_allclose(_apply_shift(s, M, c), A @ s, atol=1e-15)
        np.testing.assert_allclose(_apply_shift(s, M, c, adjoint=True), A.T @ s, atol=1e-15)


def dense_D_top(set_, c):
    L, M = set_.L, set_.M
    A = shift_matrix(L, M, *c)
    r = set_.stacked().conj() @ A @ set_.stacked()
    return np.linalg.eigvalsh(np.conj(r) * A + r * A.T)[-1]


def test_lambda_bound_zero_correlation():
    set_ = SequenceSet.from_complex([[1, 1j]])
    c = LagConstraint(0, 0, 1)
    for mode in ("spectral_bound_D", "power_iteration_D"):
        assert lambda_bound_D(set_, c, r=0.0, mode=mode).value == 0.0


def test_lambda_bound_constant_sequence():
    set_ = SequenceSet(np.zeros((1, 4)))
    c = LagConstraint(0, 0, 1)
    assert lambda_bound_D(set_, c).value == pytest.approx(6.0)
    tight = lambda_bound_D(set_, c, mode="power_iteration_D").value
    assert 0 < tight <= 6.0
    assert tight >= dense_D_top(set_, c) - 1e-8


@pytest.mark.parametrize("mode", ["spectral_bound_D", "power_iteration_D"])
def test_lambda_bound_dominates_dense_eigenvalue(mode):
    set_ = random_set(2, 5, seed=3)
    for c in LagConstraintSet(2, 5):
        assert lambda_bound_D(set_, c, mode=mode).value >= dense_D_top(set_, c) - 1e-8


def test_lambda_bound_rejects_unknown_mode():
    with pytest.raises(ValueError):
        lambda_bound_D(random_set(1, 4), LagConstraint(0, 0, 1), mode="closed_form_phi")


def check_majorizer(set_, rng, n_points=100, **kw):
    K = LagConstraintSet(set_.L, set_.M)
    table = correlate_all_fft(set_)
    sys = build_surrogate(set_, K, table, **kw)
    target = objective_values(set_, K, table)
    at_t = sys.values(to_real(set_.stacked()))
    np.testing.assert_allclose(at_t, target, rtol=1e-8, atol=1e-8)
    for _ in range(n_points):
        other = SequenceSet(2 * np.pi * rng.random((set_.L, set_.M)))
        gap = sys.values(to_real(other.stacked())) - objective_values(other, K)
        assert gap.min() >= -1e-8


@pytest.mark.parametrize("curvature", ["direct", "lifted"])
@pytest.mark.parametrize("bound_scale", [1.0, 2.0])
def test_tangent_and_dominating(curvature, bound_scale):
    rng = np.random.default_rng(0)
    for t in range(5):
        check_majorizer(random_set(2, 16, seed=t), rng, n_points=30,
                        curvature=curvature, bound_scale=bound_scale)


def test_power_iteration_bound_keeps_majorization():
    check_majorizer(random_set(2, 8, seed=5), np.random.default_rng(1), n_points=50,
                    eigen_mode="power_iteration_D")


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(2, 12), st.integers(0, 2**31), st.floats(0.05, 0.5))
def test_domination_near_iterate(L, M, seed, radius):
    # small phase perturbations probe the region where the bound is tightest
    rng = np.random.default_rng(seed)
    set_ = SequenceSet(2 * np.pi * rng.random((L, M)))
    K = LagConstraintSet(L, M)
    sys = build_surrogate(set_, K, correlate_all_fft(set_))
    near = SequenceSet(set_.phases + radius * rng.standard_normal((L, M)))
    gap = sys.values(to_real(near.stacked())) - objective_values(near, K)
    assert gap.min() >= -1e-8 * max(1.0, M**2)


def test_columns_match_per_constraint_formula():
    set_ = random_set(2, 6, seed=7)
    L, M = 2, 6
    K = LagConstraintSet(L, M)
    table = correlate_all_fft(set_)
    sys = build_surrogate(set_, K, table)
    s = set_.stacked()
    for n, c in enumerate(K):
        r = table(*c)
        lam = 2 * abs(r)
        A_s, Ah_s = _apply_shift(s, M, c), _apply_shift(s, M, c, adjoint=True)
        W = (np.abs(A_s) > 0).astype(float) + (np.abs(Ah_s) > 0)
        d = np.conj(r) * A_s + r * Ah_s - lam * (W > 0) * s - 2 * (M - c.k) * W * s
        np.testing.assert_allclose(sys.Dtilde[:, n], to_real(d), atol=1e-12)
        p = -6 * abs(r) ** 2 + 4 * lam * np.count_nonzero(W) + 16 * (M - c.k) ** 2
        assert sys.p[n] == pytest.approx(p)


def test_zero_correlation_columns():
    # s = [1, 1j, -1, -1j] on one sequence: r(1) = 3j... pick lags where r = 0
    set_ = SequenceSet.from_complex([[1, 1, 1, -1]])
    K = LagConstraintSet(1, 4)
    table = correlate_all_fft(set_)
    s = set_.stacked()
    n = next(n for n, c in enumerate(K) if abs(table(*c)) < 1e-12)
    c = K[n]
    M, ML = 4, 4
    direct = build_surrogate(set_, K, table)
    W = (np.abs(_apply_shift(s, M, c)) > 0).astype(float) + (np.abs(_apply_shift(s, M, c, True)) > 0)
    np.testing.assert_allclose(direct.Dtilde[:, n], to_real(-2 * (M - c.k) * W * s), atol=1e-12)
    assert direct.p[n] == pytest.approx(16 * (M - c.k) ** 2)
    lifted = build_surrogate(set_, K, table, curvature="lifted")
    np.testing.assert_allclose(lifted.Dtilde[:, n], to_real(-(M - c.k) * ML * s), atol=1e-12)
    assert lifted.p[n] == pytest.approx(4 * (M - c.k) * ML**2)


def test_unlifted_constants_are_not_tangent():
    # offsets built with ML instead of (ML)^2 leave a 4 lambda (ML - 1) gap at s^t
    set_ = random_set(2, 8, seed=1)
    L, M = 2, 8
    ML = L * M
    K = LagConstraintSet(L, M)
    table = correlate_all_fft(set_)
    s = set_.stacked()
    gaps = []
    for c in K:
        r = table(*c)
        lam = 2 * abs(r)
        d = (np.conj(r) * _apply_shift(s, M, c) + r * _apply_shift(s, M, c, True)
             - lam * s - (M - c.k) * s)
        p = -6 * abs(r) ** 2 + 4 * lam + 4 * (M - c.k) * ML
        value = 4 * np.real(np.vdot(s, d)) + p
        gaps.append(value - 2 * abs(r) ** 2)
    np.testing.assert_allclose(gaps, -4 * 2 * np.abs(table.at(K)) * (ML - 1), atol=1e-9)


def test_system_shape_and_layout():
    set_ = random_set(3, 7)
    K = LagConstraintSet(3, 7)
    sys = build_surrogate(set_, K, correlate_all_fft(set_))
    assert sys.Dtilde.shape == (2 * 21, len(K))
    assert sys.Dtilde.flags.f_contiguous
    sub = sys.restrict([0, 5, 9])
    assert sub.Dtilde.shape == (42, 3)
    assert list(sub.K) == [K[0], K[5], K[9]]
    np.testing.assert_array_equal(sub.p, sys.p[[0, 5, 9]])


def test_build_rejects_mismatch():
    set_ = random_set(2, 6)
    with pytest.raises(ValueError):
        build_surrogate(set_, LagConstraintSet(2, 6), correlate_all_fft(random_set(2, 7)))
    with pytest.raises(ValueError):
        build_surrogate(set_, LagConstraintSet(2, 6).subset([0, 1]), correlate_all_fft(set_))
    with pytest.raises(ValueError):
        build_surrogate(set_, LagConstraintSet(2, 6), correlate_all_fft(set_), curvature="x")
