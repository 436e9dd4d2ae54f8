from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from superenergy import generators as gen
from superenergy.cones import check_dp_sampled
from superenergy.errors import (
    ArityMismatch,
    FoldTooLarge,
    NotAntisymmetric,
    RankZero,
    StructureMismatch,
    UnsupportedNBlock,
    ZeroTensor,
)
from superenergy.forms import (
    BlockStructure,
    DualIndex,
    FoldedForm,
    detect_blocks,
    fold,
    hodge_dual,
    independent_square_sum,
    interior_contraction,
    odot,
    superenergy,
    superenergy_nform,
    superenergy_pform_closed,
)
from superenergy.lorentz import Tensor, covector, metric_tensor, minkowski, outer, scalar, volume_form, wedge

from conftest import dx

E = np.eye(4)


def maxwell(frame):
    return wedge(dx(frame, 0), dx(frame, 1))


# ---------------------------------------------------------------- structure


def test_detect_two_form(mink4):
    s = detect_blocks(maxwell(mink4))
    assert s.degrees == (2,) and s.permutation == (0, 1)


def test_detect_riemann_like(rng):
    f = gen.random_frame(rng, 4)
    r = outer(gen.random_form(rng, f, 2), gen.random_form(rng, f, 2))
    assert detect_blocks(r).degrees == (2, 2)


def test_detect_outer_slots_antisymmetric(rng):
    f = minkowski(4)
    a = rng.standard_normal((4, 4, 4))
    a = a - np.transpose(a, (2, 1, 0))
    s = detect_blocks(Tensor(f, a))
    assert s.degrees == (2, 1)
    assert s.permutation == (0, 2, 1)


def test_detect_zero_and_rank_zero(mink4):
    with pytest.raises(ZeroTensor):
        detect_blocks(Tensor(mink4, np.zeros((4, 4))))
    assert detect_blocks(Tensor(mink4, np.zeros((4, 4))), zero_ok=True).degrees == (1, 1)
    with pytest.raises(RankZero):
        detect_blocks(scalar(mink4, 1.0))


def test_detect_symmetric_is_double_one_form(mink4):
    assert detect_blocks(metric_tensor(mink4)).degrees == (1, 1)


def test_supplied_structure_is_validated(mink4):
    with pytest.raises(NotAntisymmetric):
        FoldedForm(metric_tensor(mink4), BlockStructure.contiguous((2,)))


def test_dual_index_bits():
    assert DualIndex.from_index(1, 3).bits == (0, 0, 0)
    assert DualIndex.from_index(6, 3).bits == (1, 0, 1)
    assert DualIndex.from_bits((1, 1)).P == 4


# ---------------------------------------------------------------- contractions and duals


def test_interior_contraction_examples(mink4):
    f = fold(maxwell(mink4))
    assert np.array_equal(interior_contraction(f, [E[0]]).components, [0.0, 1, 0, 0])
    assert np.array_equal(interior_contraction(f, [E[2]]).components, np.zeros(4))
    ff = FoldedForm.contiguous(outer(maxwell(mink4), maxwell(mink4)), (2, 2))
    got = interior_contraction(ff, [E[0], E[0]]).components
    assert np.array_equal(got, np.outer(E[1], E[1]))
    with pytest.raises(ArityMismatch):
        interior_contraction(ff, [E[0]])


def test_hodge_identity_and_maxwell_dual(mink4):
    f = fold(maxwell(mink4))
    assert hodge_dual(f, 1) is f
    star = hodge_dual(f, 2).folded
    expected = -wedge(dx(mink4, 2), dx(mink4, 3)).components
    assert np.allclose(star, expected, atol=1e-15)


def test_blockwise_dual_of_double_form(mink4):
    f = maxwell(mink4)
    ff = FoldedForm.contiguous(outer(f, f), (2, 2))
    star_f = hodge_dual(fold(f), 2).folded
    got = hodge_dual(ff, DualIndex.from_bits((1, 0))).folded
    assert np.allclose(got, np.multiply.outer(star_f, f.components))


def test_odot_examples(mink4):
    f = fold(maxwell(mink4))
    assert odot(f, f)(E[0], E[0]) == pytest.approx(1.0)
    xi = fold(dx(mink4, 0))
    assert odot(xi, xi)(E[0], E[0]) == pytest.approx(1.0)
    zero = FoldedForm.contiguous(Tensor(mink4, np.zeros((4, 4))), (2,))
    assert np.array_equal(odot(f, zero).components, np.zeros((4, 4)))
    with pytest.raises(StructureMismatch):
        odot(f, xi)


def test_odot_matches_contraction_oracle(rng):
    """(A . B)(x, y) = 1/(p-1)! g(i_x A, i_y B) evaluated by brute force."""
    from superenergy.lorentz import inner_full

    f = gen.random_frame(rng, 4)
    a = fold(gen.random_form(rng, f, 3))
    b = FoldedForm.contiguous(gen.random_form(rng, f, 3), (3,))
    prod = odot(a, b)
    for _ in range(5):
        x, y = rng.standard_normal(4), rng.standard_normal(4)
        ix = interior_contraction(a, [x])
        iy = interior_contraction(b, [y])
        assert prod(x, y) == pytest.approx(inner_full(ix, iy) / 2.0, rel=1e-10, abs=1e-12)


# ---------------------------------------------------------------- superenergy


def test_superenergy_one_form(mink4):
    assert np.allclose(superenergy(dx(mink4, 0)).components, 0.5 * np.eye(4))


def test_superenergy_maxwell(mink4):
    t = superenergy(maxwell(mink4))
    assert np.allclose(t.components, np.diag([0.5, -0.5, 0.5, 0.5]), atol=1e-15)
    assert t.folds == 1


def test_superenergy_of_product_carries_factor_two(mink4):
    """With the dual-sum normalization a product of two 1-forms gets 2 T{l1} (x) T{l2}."""
    l1, l2 = covector(mink4, [1.0, 1, 0, 0]), covector(mink4, [2.0, 0, 1, 0])
    t = superenergy(FoldedForm.contiguous(outer(l1, l2), (1, 1)))
    expected = 2.0 * outer(superenergy(l1), superenergy(l2)).components
    assert np.allclose(t.components, expected, atol=1e-13)


@pytest.mark.parametrize("degrees", [(1, 2), (2, 2), (1, 1, 1), (2, 1, 3)])
def test_product_law_with_power_of_two(rng, degrees):
    f = gen.random_frame(rng, 4)
    pieces = [gen.random_form(rng, f, d) for d in degrees]
    t = superenergy(FoldedForm.contiguous(outer(*pieces), degrees)).components
    expected = 2 ** (len(degrees) - 1) * outer(*[superenergy(p) for p in pieces]).components
    assert np.max(np.abs(t - expected)) <= 1e-10 * np.max(np.abs(expected))


def test_closed_form_examples(mink4):
    assert np.allclose(superenergy_pform_closed(dx(mink4, 0)).components, 0.5 * np.eye(4))
    n = covector(mink4, [1.0, 1, 0, 0])
    t = superenergy_pform_closed(wedge(n, dx(mink4, 2)))
    assert np.allclose(t.components, outer(n, n).components)
    eta2 = volume_form(mink4) * 2.0
    assert np.allclose(superenergy_pform_closed(eta2).components, -2.0 * mink4.metric)
    with pytest.raises(NotAntisymmetric):
        superenergy_pform_closed(metric_tensor(mink4))


def test_nform_examples(mink4):
    assert np.array_equal(superenergy_nform(2.0, mink4).components, np.diag([2.0, -2, -2, -2]))
    assert np.array_equal(superenergy_nform(0.0, mink4).components, np.zeros((4, 4)) * -0.0)
    assert check_dp_sampled(superenergy_nform(1.3, mink4), "plus", count=60).member
    assert np.allclose(superenergy(volume_form(mink4) * 2.0).components, -2.0 * mink4.metric)


def test_unsupported_structures(mink4):
    eta = volume_form(mink4)
    with pytest.raises(UnsupportedNBlock):
        superenergy(FoldedForm.contiguous(outer(eta, dx(mink4, 0)), (4, 1)))
    five = outer(*[dx(mink4, 0)] * 5)
    with pytest.raises(FoldTooLarge):
        superenergy(five)


@pytest.mark.parametrize("n", [3, 4, 5])
def test_closed_form_agreement(rng, n):
    for p in range(1, n):
        f = gen.random_frame(rng, n)
        w = gen.random_form(rng, f, p)
        a, b = superenergy(w).components, superenergy_pform_closed(w).components
        assert np.max(np.abs(a - b)) <= 1e-10 * np.max(np.abs(b))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from([(1,), (2,), (3,), (1, 2), (2, 2), (3, 1)]), st.sampled_from([4, 5]))
def test_duality_invariance(seed, degrees, n):
    rng = np.random.default_rng(seed)
    degrees = tuple(min(d, n - 1) for d in degrees)
    a = gen.random_folded(rng, gen.random_frame(rng, n), degrees)
    base = superenergy(a).components
    for P in range(1, 2 ** len(degrees) + 1):
        t = superenergy(hodge_dual(a, P)).components
        assert np.max(np.abs(t - base)) <= 1e-10 * np.max(np.abs(base))


def test_pair_symmetry(rng):
    f = gen.random_frame(rng, 4)
    t = superenergy(gen.random_folded(rng, f, (2, 3))).components
    assert np.allclose(t, np.transpose(t, (1, 0, 2, 3)), rtol=1e-12, atol=1e-12)
    assert np.allclose(t, np.transpose(t, (0, 1, 3, 2)), rtol=1e-12, atol=1e-12)


def test_zero_law(rng, mink4):
    a = gen.random_folded(rng, mink4, (2, 1))
    neg = FoldedForm(-a.tensor, a.structure)
    assert np.allclose(superenergy(a).components, superenergy(neg).components)
    zero = Tensor(mink4, np.zeros((4, 4)))
    assert np.array_equal(superenergy(zero).components, np.zeros((4,) * 4))
    assert np.max(np.abs(superenergy(a).components)) > 0


@pytest.mark.parametrize("degrees", [(1,), (2,), (3,), (1, 1), (2, 2), (1, 3), (2, 1, 1)])
def test_timelike_sum_rule(rng, degrees):
    f = gen.random_frame(rng, 4)
    a = gen.random_folded(rng, f, degrees)
    t = superenergy(a)
    for _ in range(3):
        basis = gen.random_orthonormal_basis(rng, f, 1.5)
        e0 = basis[:, 0]
        half_sum = 0.5 * independent_square_sum(a, basis)
        assert t(*([e0] * t.rank)) == pytest.approx(half_sum, rel=1e-12)


def test_sum_rule_is_maxwell_energy_density(mink4):
    # E along x^1, B along x^3: F = E dx0^dx1 + B dx1^dx2
    e_field, b_field = 0.7, -1.3
    f = wedge(dx(mink4, 0), dx(mink4, 1)) * e_field + wedge(dx(mink4, 1), dx(mink4, 2)) * b_field
    t = superenergy(f)
    assert t(E[0], E[0]) == pytest.approx(0.5 * (e_field**2 + b_field**2))


def test_superenergy_is_dominant(rng):
    f = gen.random_frame(rng, 4)
    for degrees in [(2,), (1, 2), (2, 2)]:
        t = superenergy(gen.random_folded(rng, f, degrees))
        v = check_dp_sampled(t, "plus", count=14, seed=3, refine=False)
        assert v.margin >= -1e-12
