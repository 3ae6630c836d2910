import numpy as np
import pytest

from okidera import (
    MarkovSequence,
    RankPolicy,
    StateSpaceModel,
    build_hankel,
    era_realize,
    gramians,
    markov_from_model,
    truncate_svd,
)
from okidera.analysis import eigenvalue_error
from okidera.errors import InsufficientData, RankPolicyUnsatisfiable, ZeroMatrix

from conftest import markov_rel_error, random_stable_model


def seq(values, dt=1.0):
    return MarkovSequence(blocks=np.array(values).reshape(-1, 1, 1), dt=dt)


class TestBuildHankel:
    def test_scalar_example(self):
        # Y_0..Y_4 of the half-decay system; H holds Y_1..Y_3, shift Y_2..Y_4
        markov = seq([0.0, 1.0, 0.5, 0.25, 0.125])
        pair = build_hankel(markov, s=2)
        np.testing.assert_array_equal(pair.H, [[1.0, 0.5], [0.5, 0.25]])
        np.testing.assert_array_equal(pair.H_shift, [[0.5, 0.25], [0.25, 0.125]])

    def test_four_blocks_give_single_column(self):
        # with only Y_0..Y_3 the widest H at s=2 is one block column
        pair = build_hankel(seq([0.0, 1.0, 0.5, 0.25]), s=2)
        np.testing.assert_array_equal(pair.H, [[1.0], [0.5]])
        np.testing.assert_array_equal(pair.H_shift, [[0.5], [0.25]])

    def test_insufficient_blocks(self):
        with pytest.raises(InsufficientData):
            build_hankel(seq([0.0, 1.0, 0.5]), s=2)
        with pytest.raises(InsufficientData):
            build_hankel(seq([0.0, 1.0]), s=1)
        with pytest.raises(InsufficientData):
            build_hankel(seq([0.0, 1.0, 0.5]), s=0)

    def test_zero_markov_zero_hankel(self):
        pair = build_hankel(seq(np.zeros(6)), s=2)
        assert not pair.H.any() and not pair.H_shift.any()

    def test_block_antidiagonal_structure(self, rng):
        # direct scan against the defining index formula
        q, m, count, s = 2, 3, 9, 3
        blocks = rng.standard_normal((count, q, m))
        markov = MarkovSequence(blocks=blocks, dt=1.0)
        pair = build_hankel(markov, s)
        J = count - 1 - s
        assert pair.H.shape == (s * q, J * m)
        for i in range(s):
            for j in range(J):
                np.testing.assert_array_equal(
                    pair.H[i * q : (i + 1) * q, j * m : (j + 1) * m],
                    blocks[i + j + 1],
                )
                np.testing.assert_array_equal(
                    pair.H_shift[i * q : (i + 1) * q, j * m : (j + 1) * m],
                    blocks[i + j + 2],
                )


class TestTruncateSvd:
    def test_rank_one_example(self):
        # H = v v' with v = (1, 0.5): sigma = {|v|^2, 0} = {1.25, 0}
        H = np.array([[1.0, 0.5], [0.5, 0.25]])
        trunc = truncate_svd(H, RankPolicy.fixed(1))
        np.testing.assert_allclose(trunc.singular_values, [1.25, 0.0], atol=1e-15)
        recon = trunc.U @ np.diag(trunc.s) @ trunc.Vh
        np.testing.assert_allclose(recon, H, atol=1e-14)
        assert trunc.discarded_energy <= 1e-28

    def test_identity_full_rank(self):
        trunc = truncate_svd(np.eye(3), RankPolicy.fixed(3))
        assert trunc.r == 3
        assert trunc.discarded_energy == 0.0
        np.testing.assert_allclose(
            trunc.U @ np.diag(trunc.s) @ trunc.Vh, np.eye(3), atol=1e-15
        )

    def test_energy_policy_squared_energy(self):
        # sigma = {10, 1, 0.01}: squared-energy tails are
        #   r=1: (1 + 1e-4)/101.0001 ~ 9.901e-3,  r=2: ~9.9e-7
        H = np.diag([10.0, 1.0, 0.01])
        assert truncate_svd(H, RankPolicy.energy(0.99)).r == 1
        assert truncate_svd(H, RankPolicy.energy(0.999)).r == 2
        assert truncate_svd(H, RankPolicy.energy(0.9999999)).r == 3

    def test_energy_postcondition(self, rng):
        H = rng.standard_normal((8, 6))
        tau = 0.95
        trunc = truncate_svd(H, RankPolicy.energy(tau))
        recon = trunc.U @ np.diag(trunc.s) @ trunc.Vh
        rel = np.linalg.norm(H - recon) ** 2 / np.linalg.norm(H) ** 2
        assert rel == pytest.approx(trunc.discarded_energy, rel=1e-9, abs=1e-12)
        assert trunc.discarded_energy <= 1.0 - tau

    def test_gap_policy(self):
        H = np.diag([10.0, 9.0, 0.1, 0.09])
        assert truncate_svd(H, RankPolicy.gap()).r == 2

    def test_zero_matrix(self):
        with pytest.raises(ZeroMatrix):
            truncate_svd(np.zeros((3, 3)), RankPolicy.fixed(1))

    def test_fixed_rank_beyond_dimension(self):
        with pytest.raises(RankPolicyUnsatisfiable):
            truncate_svd(np.eye(2), RankPolicy.fixed(3))

    def test_sigma_guard_clips_fixed_rank(self):
        # rank-1 matrix: asking for r=2 quietly yields r=1
        H = np.outer([1.0, 2.0], [3.0, 4.0])
        trunc = truncate_svd(H, RankPolicy.fixed(2))
        assert trunc.r == 1

    def test_policy_parsing(self):
        assert RankPolicy.parse("r=4") == RankPolicy.fixed(4)
        assert RankPolicy.parse("energy=0.999") == RankPolicy.energy(0.999)
        assert RankPolicy.parse("gap") == RankPolicy.gap()
        for bad in ("", "r=", "energy=2", "rank=3", "r=0"):
            with pytest.raises(ValueError):
                RankPolicy.parse(bad)


class TestEraRealize:
    def test_scalar_recovery(self):
        markov = markov_from_model(
            StateSpaceModel(A=[[0.5]], B=[[1.0]], C=[[1.0]], D=[[0.0]], dt=1.0), 6
        )
        model = era_realize(markov, s=2, policy=RankPolicy.fixed(1))
        np.testing.assert_allclose(model.A, [[0.5]], atol=1e-10)
        back = markov_from_model(model, 6)
        np.testing.assert_allclose(back.blocks, markov.blocks, atol=1e-10)

    def test_zero_sequence_is_error(self):
        with pytest.raises(ZeroMatrix):
            era_realize(seq(np.zeros(8)), s=2)

    def test_eigenvalue_recovery_mimo(self, rng):
        truth = random_stable_model(rng, 5, 2, 3)
        markov = markov_from_model(truth, 24)
        model = era_realize(markov, s=10, policy=RankPolicy.energy(1 - 1e-12))
        err = eigenvalue_error(
            np.linalg.eigvals(model.A), np.linalg.eigvals(truth.A)
        )
        assert err <= 1e-6

    @pytest.mark.parametrize("n", [2, 4, 7, 10])
    def test_markov_round_trip(self, rng, n):
        truth = random_stable_model(rng, n, 2, 2)
        M = 4 * n
        markov = markov_from_model(truth, M + 1)
        model = era_realize(markov, policy=RankPolicy.fixed(n))
        back = markov_from_model(model, M + 1)
        assert markov_rel_error(back.blocks[1:], markov.blocks[1:]) <= 1e-8

    def test_similarity_invariance(self, rng):
        truth = random_stable_model(rng, 4, 2, 2)
        T = rng.standard_normal((4, 4)) + 4 * np.eye(4)
        Tinv = np.linalg.inv(T)
        transformed = StateSpaceModel(
            A=Tinv @ truth.A @ T,
            B=Tinv @ truth.B,
            C=truth.C @ T,
            D=truth.D,
            dt=truth.dt,
        )
        m1 = era_realize(markov_from_model(truth, 17), s=8, policy=RankPolicy.fixed(4))
        m2 = era_realize(
            markov_from_model(transformed, 17), s=8, policy=RankPolicy.fixed(4)
        )
        b1 = markov_from_model(m1, 17).blocks
        b2 = markov_from_model(m2, 17).blocks
        np.testing.assert_allclose(b1, b2, rtol=0, atol=1e-10 * np.abs(b2).max())

    def test_default_s_floor_half(self):
        markov = markov_from_model(
            StateSpaceModel(A=[[0.5]], B=[[1.0]], C=[[1.0]], D=[[0.0]], dt=1.0), 11
        )
        model = era_realize(markov, policy=RankPolicy.fixed(1))
        np.testing.assert_allclose(model.A, [[0.5]], atol=1e-10)

    def test_feedthrough_carried(self, rng):
        truth = random_stable_model(rng, 3, 2, 2, feedthrough=True)
        markov = markov_from_model(truth, 14)
        model = era_realize(markov, s=6, policy=RankPolicy.fixed(3))
        np.testing.assert_array_equal(model.D, truth.D)

    def test_approximate_balancing_long_data(self, rng):
        # enough data: identified realization has Wc ~ Wo ~ diagonal
        truth = random_stable_model(rng, 4, 2, 2, mag_range=(0.3, 0.9))
        markov = markov_from_model(truth, 202)
        model = era_realize(markov, s=100, policy=RankPolicy.fixed(4))
        Wc, Wo = gramians(model)
        assert np.linalg.norm(Wc - Wo) <= 0.05 * np.linalg.norm(Wc)
        for W in (Wc, Wo):
            off = W - np.diag(np.diag(W))
            assert np.linalg.norm(off) <= 0.05 * np.linalg.norm(np.diag(np.diag(W)))
