import numpy as np
import pytest

from antcomb import linalg
from antcomb.errors import (
    DegenerateChannelError,
    NonHermitianError,
    NotInSpanError,
    UnsupportedConfigurationError,
)
from conftest import make_rng, unit


def test_phase_fix_pivot_real_nonnegative(rng):
    v = linalg.complex_gaussian(rng, (50, 6))
    out = linalg.phase_fix(v)
    piv = np.take_along_axis(out, np.argmax(np.abs(out), axis=-1)[:, None], axis=-1)
    assert np.all(np.abs(piv.imag) < 1e-12)
    assert np.all(piv.real >= 0)


def test_phase_fix_is_phase_invariant(rng):
    v = linalg.complex_gaussian(rng, (5,))
    rotated = v * np.exp(1j * 1.234)
    np.testing.assert_allclose(linalg.phase_fix(v), linalg.phase_fix(rotated), atol=1e-12)


def test_phase_fix_zero_vector_passthrough():
    z = np.zeros(4, dtype=complex)
    np.testing.assert_array_equal(linalg.phase_fix(z), z)


def test_complex_gaussian_unit_entry_variance():
    g = linalg.complex_gaussian(make_rng(3), (100_000,))
    assert abs(np.mean(np.abs(g) ** 2) - 1.0) < 0.02
    assert abs(np.mean(g)) < 0.01


def test_column_norm_mean_is_m():
    # E||h||^2 = M for a single-column channel, M=4
    rng = make_rng(11)
    cols = linalg.sample_channel_batch(rng, (100_000, 4, 1))
    n2 = np.sum(np.abs(cols[..., 0]) ** 2, axis=-1)
    assert abs(np.mean(n2) / 4.0 - 1.0) < 0.02


def test_sample_channel_rejects_n_ge_m(rng):
    with pytest.raises(UnsupportedConfigurationError):
        linalg.sample_channel(2, 2, rng)
    with pytest.raises(UnsupportedConfigurationError):
        linalg.ChannelMatrix.from_h(np.eye(3, dtype=complex))


def test_sample_channel_basis_orthonormal(rng):
    ch = linalg.sample_channel(3, 2, rng)
    np.testing.assert_allclose(ch.Q.conj().T @ ch.Q, np.eye(2), atol=1e-10)
    # col(Q) = col(H)
    resid = ch.H - ch.Q @ (ch.Q.conj().T @ ch.H)
    assert np.linalg.norm(resid) < 1e-10


def test_orthonormal_basis_standard_columns():
    H = np.zeros((4, 2), dtype=complex)
    H[0, 0] = 1.0
    H[1, 1] = 1.0
    Q = linalg.orthonormal_basis(H)
    p, cos2 = linalg.project_onto_span(H[:, 0], Q)
    assert abs(cos2 - 1.0) < 1e-12
    np.testing.assert_allclose(p, H[:, 0], atol=1e-12)


def test_orthonormal_basis_random_residual(rng):
    for _ in range(20):
        H = linalg.complex_gaussian(rng, (4, 2))
        Q = linalg.orthonormal_basis(H)
        assert np.linalg.norm(H - Q @ (Q.conj().T @ H)) <= 1e-10
        np.testing.assert_allclose(Q.conj().T @ Q, np.eye(2), atol=1e-10)


def test_orthonormal_basis_rank_deficient(rng):
    col = linalg.complex_gaussian(rng, (4, 1))
    H = np.concatenate([col, col], axis=1)
    with pytest.raises(DegenerateChannelError):
        linalg.orthonormal_basis(H)


def test_orthonormal_basis_batch_matches_single(rng):
    H = linalg.complex_gaussian(rng, (8, 5, 3))
    Qb = linalg.orthonormal_basis_batch(H)
    for t in range(8):
        np.testing.assert_allclose(Qb[t], linalg.orthonormal_basis(H[t]), atol=1e-12)


def test_complement_basis(rng):
    Q = linalg.orthonormal_basis_batch(linalg.complex_gaussian(rng, (6, 5, 2)))
    Qc = linalg.complement_basis_batch(Q)
    assert Qc.shape == (6, 5, 3)
    cross = np.swapaxes(Q, -1, -2).conj() @ Qc
    assert np.max(np.abs(cross)) < 1e-10
    gram = np.swapaxes(Qc, -1, -2).conj() @ Qc
    np.testing.assert_allclose(gram, np.broadcast_to(np.eye(3), (6, 3, 3)), atol=1e-10)


def test_project_in_span_and_orthogonal(rng):
    ch = linalg.sample_channel(4, 2, rng)
    w = unit(ch.Q @ linalg.complex_gaussian(rng, (2,)))
    p, cos2 = linalg.project_onto_span(w, ch.Q)
    assert abs(cos2 - 1.0) < 1e-10
    np.testing.assert_allclose(p, w, atol=1e-10)
    wo = unit(linalg.complement_basis_batch(ch.Q[None])[0][:, 0])
    p0, cos0 = linalg.project_onto_span(wo, ch.Q)
    assert cos0 < 1e-20
    assert np.linalg.norm(p0) < 1e-10


def test_projection_idempotent_and_pythagorean(rng):
    ch = linalg.sample_channel(5, 2, rng)
    w = unit(linalg.complex_gaussian(rng, (5,)))
    p, cos2 = linalg.project_onto_span(w, ch.Q)
    p2, _ = linalg.project_onto_span(p, ch.Q)
    np.testing.assert_allclose(p2, p, atol=1e-12)
    sin2 = 1.0 - cos2
    assert abs((cos2 + sin2) - 1.0) < 1e-15


def test_projection_cos2_beta22_law():
    # random unit vector vs random 2-dim subspace of C^4: cos^2 ~ beta(2,2)
    from antcomb.distributions import BetaParams, beta_cdf, ks_statistic

    rng = make_rng(23)
    n = 100_000
    Q = linalg.orthonormal_basis_batch(linalg.complex_gaussian(rng, (n, 4, 2)))
    w = linalg.complex_gaussian(rng, (n, 4))
    w = w / np.linalg.norm(w, axis=-1, keepdims=True)
    coef = (np.swapaxes(Q, -1, -2).conj() @ w[..., None])[..., 0]
    cos2 = np.sum(np.abs(coef) ** 2, axis=-1)
    d = ks_statistic(np.sort(cos2), lambda x: beta_cdf(x, BetaParams(2, 2)))
    assert d < 0.01


def test_pseudo_inverse_identity_case():
    H = np.eye(4, dtype=complex)[:, :2]
    u = linalg.pseudo_inverse_apply(H, H[:, 0])
    np.testing.assert_allclose(u, np.array([1.0, 0.0]), atol=1e-12)


def test_pseudo_inverse_round_trip(rng):
    for _ in range(20):
        H = linalg.complex_gaussian(rng, (5, 3))
        x = linalg.complex_gaussian(rng, (3,))
        u = linalg.pseudo_inverse_apply(H, H @ x)
        assert np.linalg.norm(u - x) < 1e-8


def test_pseudo_inverse_out_of_span(rng):
    ch = linalg.sample_channel(4, 2, rng)
    s = unit(ch.Q @ linalg.complex_gaussian(rng, (2,)))
    out = unit(linalg.complement_basis_batch(ch.Q[None])[0][:, 0])
    with pytest.raises(NotInSpanError):
        linalg.pseudo_inverse_apply(ch.H, s + 1e-3 * out)


def test_pseudo_inverse_ill_conditioned(rng):
    col = linalg.complex_gaussian(rng, (4, 1))
    H = np.concatenate([col, col * (1 + 1e-15)], axis=1)
    with pytest.raises(DegenerateChannelError):
        linalg.pseudo_inverse_apply(H, col[:, 0])


def test_max_eigvec_diagonal():
    lam, x = linalg.max_eigvec(np.diag([3.0, 1.0]).astype(complex))
    assert abs(lam - 3.0) < 1e-12
    np.testing.assert_allclose(np.abs(x), [1.0, 0.0], atol=1e-12)
    assert x[0].real > 0  # phase convention


def test_max_eigvec_degenerate_tie_is_deterministic():
    lam, x = linalg.max_eigvec(np.eye(2, dtype=complex))
    assert abs(lam - 1.0) < 1e-12
    assert abs(np.linalg.norm(x) - 1.0) < 1e-12
    # lowest-index basis vector wins the tie
    np.testing.assert_allclose(x, np.array([1.0, 0.0]), atol=1e-10)


def test_max_eigvec_matches_svd(rng):
    for _ in range(10):
        H = linalg.complex_gaussian(rng, (5, 3))
        A = H.conj().T @ H
        lam, x = linalg.max_eigvec(A)
        smax = np.linalg.svd(H, compute_uv=False)[0]
        assert abs(lam - smax**2) < 1e-8
        assert np.linalg.norm(A @ x - lam * x) < 1e-8


def test_max_eigvec_rejects_non_hermitian():
    A = np.array([[1.0, 0.5], [0.0, 1.0]], dtype=complex)
    with pytest.raises(NonHermitianError):
        linalg.max_eigvec(A)
