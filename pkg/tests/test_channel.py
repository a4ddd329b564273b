import numpy as np
import pytest

from tfqkd.channel import (
    ProtocolParams,
    attack_matrix,
    bob_matrix,
    eve_matrix,
    is_column_stochastic,
    make_layout,
    mixed_bob_matrix,
    p_correct,
    p_second_correct,
    p_wrong,
)
from tfqkd.errors import DomainError

# closed-form references computed once from the error function
P2_DIAG = 0.9213503964748574   # 0.5*(1 + erf(1))
P2_OFF = 0.07864960352514261
ERF2 = 0.9953222650189527
PW4_OUTER = 0.15621110562134666  # m=4, beta=0.7 outer bin
PW4_INNER = 0.34378889437865334
ATTACK2_11 = 0.6775361566095195  # 0.5*((p^2 + q^2) + 0.5) at m=2, alpha=1


class TestProtocolParams:
    def test_derived_widths(self):
        p = ProtocolParams(8, 0.6, 0.9, 0.25)
        assert p.symbol_sigma == pytest.approx(0.3)
        assert p.conjugate_sigma == pytest.approx(3.6)
        assert p.bits_per_symbol == pytest.approx(3.0)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(m=1, alpha=0.5, beta=0.7),
            dict(m=4, alpha=0.0, beta=0.7),
            dict(m=4, alpha=0.5, beta=-0.7),
            dict(m=4, alpha=0.5, beta=0.7, epsilon=1.5),
            dict(m=4, alpha=0.5, beta=0.7, epsilon=-0.1),
        ],
    )
    def test_validation(self, kwargs):
        with pytest.raises(DomainError):
            ProtocolParams(**kwargs)


class TestMakeLayout:
    def test_m4(self):
        lay = make_layout(4)
        assert np.allclose(lay.centers, [-1.5, -0.5, 0.5, 1.5])
        assert np.isneginf(lay.lower[0])
        assert np.allclose(lay.lower[1:], [-1.0, 0.0, 1.0])
        assert np.allclose(lay.upper[:-1], [-1.0, 0.0, 1.0])
        assert np.isposinf(lay.upper[-1])

    def test_m2(self):
        lay = make_layout(2)
        assert np.allclose(lay.centers, [-0.5, 0.5])
        assert lay.upper[0] == 0.0 and lay.lower[1] == 0.0

    def test_m3(self):
        lay = make_layout(3)
        assert np.allclose(lay.centers, [-1.0, 0.0, 1.0])
        assert np.allclose(lay.lower[1:], [-0.5, 0.5])

    def test_rejects_small_m(self):
        with pytest.raises(DomainError):
            make_layout(1)

    @pytest.mark.parametrize("m", [2, 3, 4, 7, 16])
    def test_partition_and_mirror(self, m):
        lay = make_layout(m)
        assert np.allclose(lay.upper[:-1], lay.lower[1:])  # bins tile the axis
        assert np.allclose(lay.centers, -lay.centers[::-1])
        inner = (lay.centers > np.where(np.isneginf(lay.lower), -np.inf, lay.lower)) & (
            lay.centers < np.where(np.isposinf(lay.upper), np.inf, lay.upper)
        )
        assert inner.all()


class TestPCorrect:
    def test_m2_alpha1(self):
        P = p_correct(ProtocolParams(2, 1.0, 0.7))
        assert np.allclose(P, [[P2_DIAG, P2_OFF], [P2_OFF, P2_DIAG]], atol=1e-12)

    def test_m4_center_entry(self):
        P = p_correct(ProtocolParams(4, 0.5, 0.7))
        assert P[1, 1] == pytest.approx(ERF2, abs=1e-12)

    def test_narrow_pulse_limit(self):
        P = p_correct(ProtocolParams(4, 1e-4, 0.7))
        assert np.allclose(P, np.eye(4), atol=1e-12)

    @pytest.mark.parametrize("m,alpha", [(2, 0.3), (4, 1.0), (8, 1.5), (16, 0.05)])
    def test_column_stochastic(self, m, alpha):
        assert is_column_stochastic(p_correct(ProtocolParams(m, alpha, 0.7)), tol=1e-9)

    @pytest.mark.parametrize("m", [2, 4, 8])
    def test_mirror_symmetry(self, m):
        P = p_correct(ProtocolParams(m, 0.8, 0.7))
        assert np.allclose(P, P[::-1, ::-1], atol=1e-12)

    def test_diagonal_decreases_with_alpha(self):
        diags = [
            p_correct(ProtocolParams(4, a, 0.7))[1, 1]
            for a in np.arange(0.1, 1.51, 0.1)
        ]
        assert np.all(np.diff(diags) <= 1e-15)


class TestPWrong:
    def test_m2_is_half(self):
        for beta in (0.2, 0.7, 1.4):
            assert np.allclose(p_wrong(ProtocolParams(2, 0.5, beta)), 0.5, atol=1e-15)

    def test_m4_beta07_column(self):
        P = p_wrong(ProtocolParams(4, 0.5, 0.7))
        assert np.allclose(P[:, 0], [PW4_OUTER, PW4_INNER, PW4_INNER, PW4_OUTER], atol=1e-12)

    def test_columns_identical(self):
        P = p_wrong(ProtocolParams(8, 0.5, 0.9))
        assert np.all(P == P[:, :1])

    def test_wide_pulse_limit(self):
        P = p_wrong(ProtocolParams(4, 0.5, 1e4))
        assert np.all(P[1:3, 0] < 1e-3)
        assert P[0, 0] == pytest.approx(0.5, abs=1e-3)
        assert P[3, 0] == pytest.approx(0.5, abs=1e-3)

    @pytest.mark.parametrize("m,beta", [(2, 0.3), (4, 0.7), (8, 1.2)])
    def test_column_stochastic_and_mirror(self, m, beta):
        P = p_wrong(ProtocolParams(m, 0.5, beta))
        assert is_column_stochastic(P, tol=1e-9)
        assert np.allclose(P, P[::-1, ::-1], atol=1e-12)


class TestPSecondCorrect:
    @pytest.mark.parametrize("m,alpha,beta", [(2, 0.5, 0.7), (4, 0.5, 0.7), (8, 0.9, 0.4)])
    def test_column_stochastic(self, m, alpha, beta):
        P = p_second_correct(ProtocolParams(m, alpha, beta))
        assert np.allclose(P.sum(axis=0), 1.0, atol=1e-6)
        assert P.min() >= 0.0

    def test_mirror_symmetry(self):
        P = p_second_correct(ProtocolParams(4, 0.5, 0.7))
        assert np.allclose(P, P[::-1, ::-1], atol=1e-8)

    def test_deterministic(self):
        params = ProtocolParams(4, 0.6, 0.8)
        assert np.array_equal(p_second_correct(params), p_second_correct(params))


class TestDualBasisMatrices:
    def test_bob_blocks(self):
        params = ProtocolParams(4, 0.5, 0.7)
        B = bob_matrix(params)
        pc = p_correct(params)
        assert np.array_equal(B[:4, :4], pc)
        assert np.array_equal(B[4:, 4:], pc)
        assert np.all(B[:4, 4:] == 0.0)
        assert np.all(B[4:, :4] == 0.0)
        assert is_column_stochastic(B, tol=1e-9)

    def test_bob_narrow_limit_is_identity(self):
        B = bob_matrix(ProtocolParams(4, 1e-4, 0.7))
        assert np.allclose(B, np.eye(8), atol=1e-12)

    def test_eve_blocks(self):
        params = ProtocolParams(4, 0.5, 0.7)
        E = eve_matrix(params)
        assert np.array_equal(E[:4, :4], p_correct(params))
        assert np.allclose(E[4:, 4:], p_second_correct(params), atol=1e-12)
        assert np.all(E[:4, 4:] == 0.0)
        assert np.allclose(E.sum(axis=0), 1.0, atol=1e-6)

    def test_eve_ignores_epsilon(self):
        a = eve_matrix(ProtocolParams(4, 0.5, 0.7, 0.0))
        b = eve_matrix(ProtocolParams(4, 0.5, 0.7, 1.0))
        assert np.array_equal(a, b)

    def test_eve_top_block_identity_when_narrow(self):
        E = eve_matrix(ProtocolParams(4, 1e-4, 0.7))
        assert np.allclose(E[:4, :4], np.eye(4), atol=1e-12)

    def test_attack_frozen_entry(self):
        A = attack_matrix(ProtocolParams(2, 1.0, 0.7))
        assert A[0, 0] == pytest.approx(ATTACK2_11, abs=1e-12)

    def test_attack_column_sums(self):
        A = attack_matrix(ProtocolParams(4, 0.7, 0.9))
        assert is_column_stochastic(A, tol=1e-9)

    def test_attack_narrow_limit(self):
        params = ProtocolParams(4, 1e-4, 0.7)
        A = attack_matrix(params)
        expected = 0.5 * (np.eye(4) + p_wrong(params))
        assert np.allclose(A[:4, :4], expected, atol=1e-8)

    def test_mixed_endpoints_and_convexity(self):
        p0 = ProtocolParams(4, 0.5, 0.7, 0.0)
        p1 = ProtocolParams(4, 0.5, 0.7, 1.0)
        ph = ProtocolParams(4, 0.5, 0.7, 0.5)
        assert np.array_equal(mixed_bob_matrix(p0), bob_matrix(p0))
        assert np.array_equal(mixed_bob_matrix(p1), attack_matrix(p1))
        mean = 0.5 * (bob_matrix(ph) + attack_matrix(ph))
        assert np.allclose(mixed_bob_matrix(ph), mean, atol=1e-15)

    @pytest.mark.parametrize("eps", [0.0, 0.3, 0.9, 1.0])
    def test_mixed_column_stochastic(self, eps):
        M = mixed_bob_matrix(ProtocolParams(4, 0.5, 0.7, eps))
        assert is_column_stochastic(M, tol=1e-9)
        assert np.all(M[:4, 4:] == 0.0)
        assert np.all(M[4:, :4] == 0.0)
