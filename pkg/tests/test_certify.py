import numpy as np
import pytest

from rankatlas.bilinear import as_tensor, hypercomplex_mult
from rankatlas.certify import (
    CertifyBudget,
    Inconclusive,
    NotInVError,
    RankExceedsP,
    RankP,
    certify,
    decompose,
    iota,
    iota_tensor,
    nu,
    phi,
    sigma,
    span_dimension_U,
)
from rankatlas.pencil import ProblemDims, Tensor3, afcr_margin, flatten


def tensor_from_fl2(F, n, m):
    # inverse of flatten(mode=2): rows split into m blocks of n
    return Tensor3(np.stack([F[k * n:(k + 1) * n, :] for k in range(m)]))


def rank_terms_tensor(rng, n, p, m, r):
    A = rng.standard_normal((n, r))
    B = rng.standard_normal((p, r))
    C = rng.standard_normal((m, r))
    return Tensor3(np.einsum("ij,aj,kj->kia", A, B, C))


def quaternion_high_rank_tensor():
    # sigma-preimage of a pencil with full column rank on the whole sphere
    Y = as_tensor(hypercomplex_mult(4))
    fl1 = np.hstack(Y.slices)
    A = -np.linalg.solve(fl1[:, 12:], fl1[:, :12])
    F = np.vstack([np.eye(12), A])
    return tensor_from_fl2(F, 4, 4)


class TestSigma:
    def test_identity_top_block(self):
        rng = np.random.default_rng(0)
        B = rng.standard_normal((3, 6))
        T = tensor_from_fl2(np.vstack([np.eye(6), B]), 3, 3)
        assert np.allclose(sigma(T), B)

    def test_scaled_top_block(self):
        rng = np.random.default_rng(1)
        B = rng.standard_normal((3, 6))
        T = tensor_from_fl2(np.vstack([2 * np.eye(6), B]), 3, 3)
        assert np.allclose(sigma(T), B / 2)

    def test_hits_every_target(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            B = rng.standard_normal((4, 12))
            T = tensor_from_fl2(np.vstack([np.eye(12), B]), 4, 4)
            assert np.allclose(sigma(T), B)

    def test_not_in_v(self):
        F = np.vstack([np.zeros((6, 6)), np.ones((3, 6))])
        with pytest.raises(NotInVError):
            sigma(tensor_from_fl2(F, 3, 3))


class TestIota:
    def test_zero_matrix(self):
        out = iota(np.zeros((3, 5)))
        assert np.array_equal(out, np.hstack([np.zeros((3, 5)), -np.eye(3)]))

    def test_flatten_roundtrip(self):
        rng = np.random.default_rng(3)
        A = rng.standard_normal((4, 12))
        W = iota_tensor(A, 4, 4)
        assert np.allclose(flatten(W, 1), iota(A))

    def test_trailing_block_always_minus_identity(self):
        rng = np.random.default_rng(4)
        for _ in range(5):
            A = rng.standard_normal((3, 6))
            W = iota_tensor(A, 3, 3)
            assert np.array_equal(flatten(W, 1)[:, 6:], -np.eye(3))

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            iota_tensor(np.zeros((3, 5)), 3, 3)


class TestNu:
    def test_inverts_iota(self):
        rng = np.random.default_rng(5)
        A = rng.standard_normal((4, 12))
        assert np.allclose(nu(iota_tensor(A, 4, 4)), A, atol=1e-12)

    def test_normalized_pencil(self):
        rng = np.random.default_rng(6)
        B = rng.standard_normal((3, 6))
        Y = iota_tensor(B, 3, 3)
        assert np.allclose(nu(Y), B)

    def test_identity_with_flattening(self):
        # iota(nu(Y)) equals the mode-1 flattening of the row-normalized Y
        rng = np.random.default_rng(7)
        checked = 0
        while checked < 20:
            Y = Tensor3(rng.standard_normal((3, 4, 3)))
            F = flatten(Y, 1)
            trailing = F[:, 5:]  # p = nm - u = 5
            if np.linalg.cond(trailing) > 1e4:
                continue
            lhs = iota(nu(Y))
            rhs = -np.linalg.inv(trailing) @ F
            assert np.max(np.abs(lhs - rhs)) < 1e-10
            checked += 1

    def test_singular_trailing_block(self):
        Y = Tensor3(np.zeros((3, 4, 3)))
        with pytest.raises(ValueError):
            nu(Y)


class TestPhi:
    def test_first_basis_vector(self):
        dims = ProblemDims(m=3, n=3, p=6)
        b = np.array([1.0, 2.0, 3.0])
        out = phi(np.eye(3)[0], b, dims)
        assert np.allclose(out, [1, 2, 3, 0, 0, 0])

    def test_last_coordinate_ignored(self):
        dims = ProblemDims(m=3, n=3, p=6)
        b = np.ones(3)
        assert np.allclose(phi(np.eye(3)[2], b, dims), np.zeros(6))

    def test_truncation(self):
        dims = ProblemDims(m=3, n=3, p=5)  # l = 1: last block keeps n-l = 2
        a = np.array([2.0, 3.0, 9.0])
        b = np.array([1.0, 10.0, 100.0])
        out = phi(a, b, dims)
        assert np.allclose(out, [2, 20, 200, 3, 30])

    def test_linear_in_a(self):
        dims = ProblemDims(m=4, n=4, p=12)
        rng = np.random.default_rng(8)
        a, b = rng.standard_normal(4), rng.standard_normal(4)
        al = 3.7
        assert np.allclose(phi(al * a, b, dims), al * phi(a, b, dims))

    def test_shape_validation(self):
        dims = ProblemDims(m=3, n=3, p=6)
        with pytest.raises(ValueError):
            phi(np.zeros(4), np.zeros(3), dims)


class TestSpanDimension:
    def test_single_and_duplicate(self):
        dims = ProblemDims(m=3, n=3, p=6)
        d = np.array([1.0, 2.0, 3.0])
        b = np.array([0.5, -1.0, 2.0])
        assert span_dimension_U([(d, b)], dims) == 1
        assert span_dimension_U([(d, b), (d, b)], dims) == 1
        assert span_dimension_U([(d, b), (-d, -b)], dims) == 1

    def test_full_span_from_synthetic_points(self):
        dims = ProblemDims(m=3, n=3, p=6)
        rng = np.random.default_rng(9)
        pts = [(rng.standard_normal(3), rng.standard_normal(3))
               for _ in range(6)]
        assert span_dimension_U(pts, dims) == 6

    def test_empty(self):
        dims = ProblemDims(m=3, n=3, p=6)
        assert span_dimension_U([], dims) == 0


class TestCertify:
    def test_explicit_rank_six(self):
        rng = np.random.default_rng(10)
        T = rank_terms_tensor(rng, 3, 6, 3, 6)
        verdict = certify(T, seed=0)
        assert isinstance(verdict, RankP)
        cert = verdict.certificate
        assert cert.residual <= 1e-6
        assert len(cert.points) == 6
        # every witness point kills the pencil
        W = iota_tensor(sigma(T), 3, 3)
        for d, b in cert.points:
            M = np.einsum("k,kij->ij", d, W.data)
            assert np.linalg.norm(M @ b) <= 1e-6

    def test_gaussian_3x6x3_mostly_rank_p(self):
        rng = np.random.default_rng(11)
        outcomes = []
        for i in range(30):
            T = Tensor3(rng.standard_normal((3, 3, 6)))
            outcomes.append(certify(T, seed=i).kind)
        assert outcomes.count("RankP") >= 29
        assert outcomes.count("RankExceedsP") == 0

    def test_constructed_high_rank_instance(self):
        T = quaternion_high_rank_tensor()
        verdict = certify(T, seed=0)
        assert isinstance(verdict, RankExceedsP)
        assert verdict.margin > 1e-6

    def test_mutual_exclusion_on_rankp(self):
        # a RankP verdict implies the pencil margin is below tolerance
        rng = np.random.default_rng(12)
        for i in range(10):
            T = Tensor3(rng.standard_normal((3, 3, 6)))
            verdict = certify(T, seed=i)
            if isinstance(verdict, RankP):
                W = iota_tensor(sigma(T), 3, 3)
                margin = afcr_margin(W.scaled(1 / W.norm()), seed=i + 100)
                assert margin <= 1e-6

    def test_rejects_wrong_window(self):
        rng = np.random.default_rng(13)
        T = Tensor3(rng.standard_normal((4, 4, 4)))  # p=4 outside the window
        with pytest.raises(ValueError):
            certify(T)

    def test_budget_validation(self):
        with pytest.raises(ValueError):
            CertifyBudget(search_rounds=0)

    def test_inconclusive_diagnostics(self):
        # (3,5,3) samples with 2 or 4 real points cannot reach span 5
        rng = np.random.default_rng(14)
        seen = False
        for i in range(12):
            T = Tensor3(rng.standard_normal((3, 3, 5)))
            verdict = certify(T, seed=i)
            if isinstance(verdict, Inconclusive):
                assert "span_dim" in verdict.diagnostics
                assert verdict.diagnostics["span_dim"] < 5
                seen = True
        assert seen


class TestDecompose:
    def test_reconstructs_explicit_tensor(self):
        rng = np.random.default_rng(15)
        T = rank_terms_tensor(rng, 3, 6, 3, 6)
        verdict = certify(T, seed=0)
        assert isinstance(verdict, RankP)
        factors = decompose(T, verdict.certificate)
        assert factors.terms == 6
        assert factors.residual < 1e-8

    def test_residual_matches_recomputation(self):
        rng = np.random.default_rng(16)
        T = Tensor3(rng.standard_normal((3, 3, 6)))
        verdict = certify(T, seed=3)
        assert isinstance(verdict, RankP)
        factors = decompose(T, verdict.certificate)
        That = np.einsum("ij,aj,kj->kia", factors.A, factors.B, factors.C)
        recomputed = np.linalg.norm(That - T.data) / np.linalg.norm(T.data)
        assert factors.residual == pytest.approx(recomputed, rel=1e-9)
        assert factors.residual == pytest.approx(verdict.certificate.residual,
                                                 abs=1e-9)

    def test_mismatched_certificate(self):
        rng = np.random.default_rng(17)
        T = Tensor3(rng.standard_normal((3, 3, 6)))
        verdict = certify(T, seed=0)
        assert isinstance(verdict, RankP)
        other = Tensor3(rng.standard_normal((3, 3, 5)))
        with pytest.raises(ValueError):
            decompose(other, verdict.certificate)


def test_extension_caps_rank_when_certify_fails():
    # when the p-certificate fails, a generic one-column extension is
    # certifiable at p+1 in nearly all cases
    from rankatlas.experiments import extend_with_random_column

    rng = np.random.default_rng(18)
    failures = []
    i = 0
    while len(failures) < 8 and i < 200:
        T = Tensor3(rng.standard_normal((3, 3, 5)))
        if not isinstance(certify(T, seed=i), RankP):
            failures.append((T, i))
        i += 1
    assert len(failures) == 8
    successes = 0
    for T, i in failures:
        Text = extend_with_random_column(T, np.random.default_rng(i))
        if isinstance(certify(Text, seed=i), RankP):
            successes += 1
    assert successes >= int(0.9 * len(failures))
