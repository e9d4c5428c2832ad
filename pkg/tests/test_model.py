import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sparseshare.field import PrimeField
from sparseshare.model import (
    AsymmetricSharePMF,
    ShareParams,
    SymmetricSharePMF,
    asymmetric_sparsities,
    conditional_prob,
    feasible_sd_range,
    is_feasible,
    share_sparsity,
)

F7, F89 = PrimeField(7), PrimeField(89)
SMALL_PRIMES = [3, 5, 7, 11, 13, 29, 53, 89, 101]


def test_conditional_zero_source():
    pmf = SymmetricSharePMF(F7, 2, 0.4, 0.2)
    params = ShareParams.default(F7, 2)
    assert conditional_prob(pmf, params, 0, 0) == 0.4
    assert conditional_prob(pmf, params, 3, 0) == pytest.approx(0.1)


def test_special_values_by_hand():
    params = ShareParams.default(F7, 2)
    assert sorted(params.special_values(3)) == [2, 4]
    pmf = SymmetricSharePMF(F7, 2, 0.4, 0.2)
    assert conditional_prob(pmf, params, F7(4), F7(3)) == 0.2
    assert conditional_prob(pmf, params, 2, 3) == 0.2
    assert conditional_prob(pmf, params, 1, 3) == pytest.approx(0.6 / 5)


def test_uniform_is_flat():
    pmf = SymmetricSharePMF.uniform(F7, 3)
    assert np.allclose(pmf.conditional_matrix(ShareParams.default(F7, 3)), 1 / 7, atol=1e-15)


def test_share_sparsity_examples():
    assert share_sparsity(SymmetricSharePMF.uniform(F89, 2), 0.3) == pytest.approx(1 / 89)
    assert share_sparsity(SymmetricSharePMF(F89, 2, 0.7, 0.1), 1.0) == 0.7
    assert share_sparsity(SymmetricSharePMF(F89, 2, 0.9, 0.5), 0.95) == pytest.approx(0.88, abs=1e-15)


def test_asymmetric_sparsities_examples():
    pmf = AsymmetricSharePMF(F89, 0.8, 0.3, 0.5)
    s_r, s_ar = asymmetric_sparsities(pmf, 0.9)
    assert (s_r, s_ar) == (pytest.approx(0.75), pytest.approx(0.77))
    u = AsymmetricSharePMF(F89, 1 / 89, 1 / 89, 1 / 89)
    assert asymmetric_sparsities(u, 0.4) == (pytest.approx(1 / 89), pytest.approx(1 / 89))
    eq = AsymmetricSharePMF(F89, 0.6, 0.2, 0.2)
    a, b = asymmetric_sparsities(eq, 0.7)
    assert a == b


def test_feasible_range_examples():
    assert feasible_sd_range(1.0, 89, 2) == (0.0, 1.0)
    assert feasible_sd_range(0.95, 89, 2) == (0.0, pytest.approx(0.975))
    assert feasible_sd_range(0.95, 89, 5) == (0.0, pytest.approx(0.96))
    assert not is_feasible(0.99, 0.95, 89, 5)
    with pytest.raises(ValueError):
        feasible_sd_range(0.5, 7, 7)


@pytest.mark.parametrize("kwargs", [
    dict(n=1, p1=0.5, p_star=0.1),
    dict(n=7, p1=0.5, p_star=0.1),
    dict(n=2, p1=1.2, p_star=0.1),
    dict(n=3, p1=0.5, p_star=0.4),
])
def test_symmetric_rejects(kwargs):
    with pytest.raises(ValueError):
        SymmetricSharePMF(F7, **kwargs)


def test_rounding_noise_snapped():
    pmf = SymmetricSharePMF(F7, 2, 1.0 + 1e-14, 0.5 + 1e-14)
    assert pmf.p1 == 1.0 and pmf.p_star == 0.5
    assert pmf.p1_inv == 0.0 and pmf.p_star_inv == 0.0


def test_complements_are_used():
    pmf = SymmetricSharePMF(F7, 2, 1.0, 0.25, p1_comp=1e-20)
    assert pmf.p1_inv == pytest.approx(1e-20 / 6, rel=1e-15)
    with pytest.raises(ValueError):
        SymmetricSharePMF(F7, 2, 0.5, 0.25, p1_comp=0.4)


def test_asymmetric_rejects():
    with pytest.raises(ValueError):
        AsymmetricSharePMF(F7, 0.5, 0.7, 0.6)
    with pytest.raises(ValueError):
        AsymmetricSharePMF(PrimeField(2), 0.5, 0.2, 0.2)


@pytest.mark.parametrize("alphas", [(1, 1), (0, 2), (1, 8)])
def test_share_params_rejects(alphas):
    with pytest.raises(ValueError):
        ShareParams(F7, alphas)


def test_share_params_too_many():
    with pytest.raises(ValueError):
        ShareParams(PrimeField(3), (1, 2, 4))  # 4 = 1 mod 3


pmfs = st.sampled_from(SMALL_PRIMES).flatmap(lambda q: st.tuples(
    st.just(q), st.integers(2, min(7, q - 1)), st.floats(0, 1), st.floats(0, 1)))


@settings(max_examples=80, deadline=None)
@given(pmfs)
def test_rows_sum_to_one(t):
    q, n, p1, frac = t
    f = PrimeField(q)
    pmf = SymmetricSharePMF(f, n, p1, frac / n)
    assert max(abs(c) for c in pmf.constraint_residuals()) <= 1e-12
    P = pmf.conditional_matrix(ShareParams.default(f, n))
    assert np.allclose(P.sum(axis=1), 1.0, atol=1e-12)
    assert P.min() >= 0


@pytest.mark.parametrize("q", SMALL_PRIMES)
def test_special_values_distinct(q):
    f = PrimeField(q)
    params = ShareParams(f, tuple(range(1, q)))
    for a in range(1, q):
        assert len(set(params.special_values(a))) == q - 1


@settings(max_examples=40, deadline=None)
@given(pmfs, st.floats(0, 1))
def test_share_marginal(t, s):
    q, n, p1, frac = t
    f = PrimeField(q)
    pmf = SymmetricSharePMF(f, n, p1, frac / n)
    params = ShareParams.default(f, n)
    P = pmf.conditional_matrix(params)
    p_a = np.full(q, (1 - s) / (q - 1))
    p_a[0] = s
    s_d = share_sparsity(pmf, s)
    for i, alpha in enumerate(params.alphas):
        marg = np.zeros(q)
        for a in range(q):
            for r in range(q):
                marg[(a + alpha * r) % q] += p_a[a] * P[a, r]
        assert marg[0] == pytest.approx(s_d, abs=1e-12)
        assert np.allclose(marg[1:], (1 - s_d) / (q - 1), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([5, 7, 11]), st.floats(0, 1), st.floats(0, 1), st.floats(0, 1))
def test_asymmetric_rows(q, p1, p2, frac):
    pmf = AsymmetricSharePMF(PrimeField(q), p1, p2, (1 - p2) * frac)
    assert max(abs(c) for c in pmf.constraint_residuals()) <= 1e-12
    assert np.allclose(pmf.conditional_matrix().sum(axis=1), 1.0, atol=1e-12)
