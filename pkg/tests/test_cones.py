from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from superenergy import generators as gen
from superenergy.cones import (
    check_dp2_exact,
    check_dp_sampled,
    decompose_dp2,
    evaluate,
    is_simple,
    null_factor_test,
    null_factors,
    sample_null,
    segre_frame,
    square_sym2,
)
from superenergy.errors import NotDiagonalizable, NotDominant, NotSymmetric
from superenergy.forms import superenergy
from superenergy.lorentz import Tensor, covector, contract_ij, metric_tensor, minkowski, outer, wedge

from conftest import dx

L = [1.0, 1.0, 0.0, 0.0]


def ell(frame):
    return covector(frame, L)


# ---------------------------------------------------------------- null samples


def test_sample_null_axes_first(mink4):
    ks = sample_null(mink4, 8, seed=5)
    expected = [[1, 1, 0, 0], [1, -1, 0, 0], [1, 0, 1, 0], [1, 0, -1, 0], [1, 0, 0, 1], [1, 0, 0, -1]]
    assert np.array_equal(ks[:6], np.array(expected, dtype=float))
    assert ks.shape == (8, 4)


@pytest.mark.parametrize("general", [False, True])
def test_sample_null_vectors_are_future_null(rng, general):
    f = gen.random_frame(rng, 5, general=general)
    ks = sample_null(f, 200, seed=1)
    norms = np.einsum("ia,ab,ib->i", ks, f.metric, ks)
    assert np.max(np.abs(norms)) <= 1e-13
    assert all(f.g(k, f.future_axis) < 0 for k in ks)


def test_sample_null_is_deterministic(mink4):
    a = sample_null(mink4, 300, seed=11)
    b = sample_null(mink4, 300, seed=11)
    assert a.tobytes() == b.tobytes()
    assert not np.array_equal(a, sample_null(mink4, 300, seed=12))


def test_sample_null_rejects_empty(mink4):
    with pytest.raises(ValueError):
        sample_null(mink4, 0)


# ---------------------------------------------------------------- sampled verdicts


def test_metric_is_in_minus_cone(mink4):
    g = metric_tensor(mink4)
    assert check_dp_sampled(g, "minus").member
    assert not check_dp_sampled(g, "plus").member


def test_null_square_is_dominant(mink4):
    v = check_dp_sampled(outer(ell(mink4), ell(mink4)), "plus")
    assert v.member and v.method == "sampled" and v.samples_used > 0


def test_sampled_witness_for_indefinite(mink4):
    t = Tensor(mink4, np.diag([1.0, 2, 0, 0]))
    v = check_dp_sampled(t, "plus")
    assert not v.member
    assert v.witness_value <= -1.0 + 1e-9
    # the axis grid already contains the (1,1,0,0), (1,-1,0,0) pair with value -1
    assert t([1, 1, 0, 0], [1, -1, 0, 0]) == pytest.approx(-1.0)
    assert evaluate(t.components, v.witness) == pytest.approx(v.witness_value)
    assert v.margin < 0


def test_sampled_verdict_is_deterministic(rng):
    f = gen.random_frame(rng, 4)
    t = gen.random_symmetric(rng, f)
    a = check_dp_sampled(t, "plus", count=80, seed=4)
    b = check_dp_sampled(t, "plus", count=80, seed=4)
    assert a.margin == b.margin and a.member == b.member


def test_large_rank_uses_capped_budget(mink4):
    t = outer(*[ell(mink4)] * 5)
    v = check_dp_sampled(t, "plus", count=40, cap=10_000)
    assert v.member
    assert v.samples_used <= 10_000 + 1000


# ---------------------------------------------------------------- exact rank-2


def test_exact_boundary_case(mink4):
    v = check_dp2_exact(Tensor(mink4, np.diag([0.5, -0.5, 0.5, 0.5])), "plus")
    assert v.member and v.method == "exact_eigen"
    assert abs(v.margin) <= 1e-15


def test_exact_rejects_and_witnesses(mink4):
    t = Tensor(mink4, np.diag([1.0, 2, 0, 0]))
    v = check_dp2_exact(t, "plus")
    assert not v.member and v.method == "exact_eigen"
    assert v.witness_value < -1e-10
    assert t(*v.witness) == pytest.approx(v.witness_value)


def test_exact_falls_back_for_null_type(mink4):
    v = check_dp2_exact(outer(ell(mink4), ell(mink4)), "plus")
    assert v.member and v.method == "sampled"


def test_exact_requires_symmetry(mink4):
    with pytest.raises(NotSymmetric):
        check_dp2_exact(wedge(dx(mink4, 0), dx(mink4, 1)))


def test_exact_matches_generated_eigenvalues(rng):
    f = gen.random_frame(rng, 4)
    t, mu, p = gen.random_dp2_plus(rng, f)
    sf = segre_frame(t)
    assert sf.mu == pytest.approx(mu, rel=1e-9)
    assert np.allclose(np.sort(sf.p), np.sort(p), atol=1e-9)
    assert check_dp2_exact(t, "plus").member


def test_agreement_exact_vs_sampled():
    rng = np.random.default_rng(77)
    disagreements = 0
    for _ in range(500):
        f = gen.random_frame(rng, 4)
        t = gen.random_symmetric(rng, f)
        ex = check_dp2_exact(t, "plus")
        sa = check_dp_sampled(t, "plus", count=200, seed=1)
        if ex.member != sa.member and abs(ex.margin) > 1e-10:
            disagreements += 1
    assert disagreements == 0


# ---------------------------------------------------------------- squares


def test_square_examples(mink4):
    t = Tensor(mink4, np.diag([0.5, -0.5, 0.5, 0.5]))
    assert np.allclose(square_sym2(t).components, 0.25 * mink4.metric)
    g = metric_tensor(mink4)
    assert np.allclose(square_sym2(g).components, mink4.metric)
    assert np.allclose(square_sym2(outer(ell(mink4), ell(mink4))).components, 0.0)


def test_maxwell_square_is_trace_of_metric(rng):
    """Rank-2 superenergy of a 2-form in N = 4 squares to a multiple of g."""
    f = gen.random_frame(rng, 4)
    t = superenergy(gen.random_form(rng, f, 2))
    sq = square_sym2(t).components
    c = np.trace(f.inverse @ sq) / 4
    assert np.allclose(sq, c * f.metric, atol=1e-10 * np.max(np.abs(sq)))


# ---------------------------------------------------------------- cone algebra


def test_cone_algebra(rng):
    f = gen.random_frame(rng, 4)
    t1, _, _ = gen.random_dp2_plus(rng, f)
    t2, _, _ = gen.random_dp2_plus(rng, f)
    a1, a2 = rng.uniform(0, 3, size=2)
    assert check_dp_sampled(t1 * a1 + t2 * a2, "plus", count=150).member
    assert check_dp_sampled(outer(t1, t2), "plus", count=25).member


def test_mixed_product_law(rng):
    f = gen.random_frame(rng, 4)
    t, _, _ = gen.random_dp2_plus(rng, f)
    m, _, _ = gen.random_dp2_plus(rng, f)
    m = -m  # in DP-
    assert check_dp2_exact(m, "minus").member
    big = superenergy(gen.random_folded(rng, f, (2, 1)))  # rank 4 in DP+
    for i in range(2):
        for j in range(2):
            prod = contract_ij(t, i, m, j)
            assert check_dp2_exact(Tensor(f, 0.5 * (prod.components + prod.components.T)), "plus").member
            assert check_dp_sampled(prod, "plus", count=60).member
    for i in range(4):
        prod = contract_ij(big, i, m, 0)
        assert check_dp_sampled(prod, "plus", count=20, seed=2).member


# ---------------------------------------------------------------- decomposition


def test_decompose_examples(mink4):
    dec = decompose_dp2(Tensor(mink4, np.diag([0.5, -0.5, 0.5, 0.5])))
    assert len(dec.terms) == 1
    (term,) = dec.terms
    assert term.p == 2 and term.weight == pytest.approx(1.0)
    assert np.allclose(np.abs(term.form.components), np.abs(wedge(dx(mink4, 0), dx(mink4, 1)).components))
    assert np.allclose(dec.reassemble().components, np.diag([0.5, -0.5, 0.5, 0.5]))

    dec = decompose_dp2(Tensor(mink4, np.eye(4)))
    (term,) = dec.terms
    assert term.p == 1 and term.weight == pytest.approx(2.0)
    assert np.allclose(np.abs(term.form.components), [np.sqrt(2), 0, 0, 0])

    with pytest.raises(NotDominant):
        decompose_dp2(metric_tensor(mink4))
    with pytest.raises(NotDiagonalizable):
        decompose_dp2(outer(ell(mink4), ell(mink4)))


def test_decomposition_reassembly():
    rng = np.random.default_rng(31)
    for _ in range(200):
        f = gen.random_frame(rng, int(rng.integers(3, 6)))
        t, _, _ = gen.random_dp2_plus(rng, f)
        dec = decompose_dp2(t)
        assert np.min(dec.weights) >= -1e-12
        err = np.max(np.abs(dec.reassemble().components - t.components)) / t.scale()
        assert err <= 1e-9
        assert all(is_simple(term.form) for term in dec.terms)


def test_decomposition_matches_exact_decision():
    rng = np.random.default_rng(32)
    for _ in range(100):
        f = gen.random_frame(rng, 4)
        t = gen.random_symmetric(rng, f)
        v = check_dp2_exact(t, "plus")
        try:
            decompose_dp2(t)
            ok = True
        except (NotDominant, NotDiagonalizable):
            ok = False
        assert ok == (v.member and v.method == "exact_eigen")


def test_null_factor_conversion(rng):
    f = gen.random_frame(rng, 5)
    t, _, _ = gen.random_dp2_plus(rng, f)
    dec = decompose_dp2(t)
    for term in dec.terms:
        if term.p < 2:
            continue
        ks = null_factors(term, dec.eigenframe)
        for k in ks:
            kv = f.inverse @ k.components
            assert abs(f.g(kv, kv)) <= 1e-10 * np.dot(kv, kv)
        assert np.allclose(wedge(*ks).components, term.form.components, atol=1e-10)


def test_is_simple(mink4):
    assert is_simple(wedge(dx(mink4, 0), dx(mink4, 1)))
    assert not is_simple(wedge(dx(mink4, 0), dx(mink4, 1)) + wedge(dx(mink4, 2), dx(mink4, 3)))


# ---------------------------------------------------------------- null factors


def test_null_factor_examples(mink4):
    l = ell(mink4)
    res = null_factor_test(outer(l, l, l))
    assert res is not None and len(res.factors) == 3
    for k in res.factors:
        assert np.allclose(k.components, l.components)
    assert res.coefficient == pytest.approx(1.0)
    assert null_factor_test(metric_tensor(mink4)) is None
    assert null_factor_test(outer(l, dx(mink4, 0))) is None


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 4))
def test_null_factor_recovers_products(seed, r):
    rng = np.random.default_rng(seed)
    f = gen.random_frame(rng, 4)
    # lowering a future null vector with a minus sign gives a null form in DP+
    ks = [covector(f, -f.metric @ gen.random_future_null(rng, f)) for _ in range(r)]
    c = rng.uniform(0.5, 2.0)
    res = null_factor_test(outer(*ks) * c)
    assert res is not None
    rebuilt = outer(*res.factors) * res.coefficient
    assert np.allclose(rebuilt.components, (outer(*ks) * c).components, atol=1e-9)
    assert check_dp_sampled(outer(*ks), "plus", count=12, refine=False).member
