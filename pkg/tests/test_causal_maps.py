from __future__ import annotations

import numpy as np
import pytest

from superenergy import generators as gen
from superenergy.causal_maps import (
    builtin_example,
    canonical_null_directions,
    check_generalized_symmetry,
    check_proper_causal,
    conformal_factor,
    pullback_metric,
)
from superenergy.cones import check_dp2_exact, check_dp_sampled
from superenergy.errors import BadParams, DegenerateCandidate, SingularJacobian, UnknownExample
from superenergy.forms import superenergy
from superenergy.lorentz import Tensor, covector, metric_tensor, minkowski, outer


def diag(frame, *d):
    return Tensor(frame, np.diag(np.array(d, dtype=float)))


# ---------------------------------------------------------------- pullbacks


def test_pullback_examples(mink4):
    g = mink4.metric
    assert np.allclose(pullback_metric(np.eye(4), g, mink4).components, g)
    j = np.diag([3.0, 1, 1, 1])
    assert np.allclose(pullback_metric(j, g, mink4).components, np.diag([-9.0, 1, 1, 1]))
    assert np.allclose(pullback_metric(2 * np.eye(4), g, mink4).components, 4 * g)
    with pytest.raises(SingularJacobian):
        pullback_metric(np.diag([1.0, 1, 0, 1]), g, mink4)


def test_pullback_matches_direct_evaluation(rng):
    base = gen.random_frame(rng, 4)
    target = gen.random_frame(rng, 4)
    j = rng.standard_normal((4, 4))
    ph = pullback_metric(j, target.metric, base)
    for _ in range(5):
        u, v = rng.standard_normal(4), rng.standard_normal(4)
        assert ph(u, v) == pytest.approx(target.g(j @ u, j @ v), rel=1e-12, abs=1e-12)


# ---------------------------------------------------------------- proper causal relation


def test_proper_causal_examples(mink4):
    v = check_proper_causal(mink4, diag(mink4, -1, 1, 1, 1))
    assert v.properly_related and v.conformal_factor == pytest.approx(1.0)
    assert v.canonical_null_count == 4
    v = check_proper_causal(mink4, diag(mink4, -4, 1, 1, 1))
    assert v.properly_related and v.canonical_null_count == 0 and v.conformal_factor is None
    v = check_proper_causal(mink4, diag(mink4, -0.25, 1, 1, 1))
    assert not v.properly_related
    k, kk = v.witness
    assert mink4.g(k, k) == pytest.approx(0.0, abs=1e-12)
    assert -diag(mink4, -0.25, 1, 1, 1)(k, kk) < 0


@pytest.mark.parametrize("q", [0.25, 0.5, 0.9, 1.0, 1.1, 2.0, 5.0])
def test_stretch_family(q):
    pt = builtin_example("minkowski_stretch", {"q": q})
    assert np.allclose(pt.candidate.components, np.diag([-q * q, 1, 1, 1]))
    v = check_proper_causal(pt.base_frame, pt.candidate, pt.jacobian, pt.target)
    assert v.properly_related == (q >= 1)
    assert v.orientation_flipped is False


def test_orientation_flip_is_reported(mink4):
    j = np.diag([-2.0, 1, 1, 1])
    ph = pullback_metric(j, mink4.metric, mink4)
    v = check_proper_causal(mink4, ph, j, mink4)
    assert v.properly_related and v.orientation_flipped is True
    assert check_proper_causal(mink4, ph).orientation_flipped is None


def test_degenerate_candidate(mink4):
    with pytest.raises(DegenerateCandidate):
        check_proper_causal(mink4, diag(mink4, -1, 1, 1, 0))


def test_canonical_null_examples(mink4):
    assert len(canonical_null_directions(mink4, diag(mink4, -4, 1, 1, 1))) == 0
    ks = canonical_null_directions(mink4, diag(mink4, -1, 1, 4, 4))
    assert len(ks) == 2
    got = sorted(tuple(np.round(k, 12)) for k in ks)
    assert got == [(1.0, -1.0, 0.0, 0.0), (1.0, 1.0, 0.0, 0.0)]
    ks = canonical_null_directions(mink4, metric_tensor(mink4) * np.exp(0.6))
    assert len(ks) == 4
    assert np.linalg.matrix_rank(np.array(ks)) == 4
    for k in ks:
        assert mink4.g(k, k) == pytest.approx(0.0, abs=1e-12)


def test_canonical_null_are_eigenvectors(rng):
    f = gen.random_frame(rng, 4)
    j, target = gen.random_accepted_pullback(rng, f)
    ph = pullback_metric(j, target.metric, f)
    for k in canonical_null_directions(f, ph):
        assert abs(f.g(k, k)) <= 1e-9 * np.dot(k, k)
        # null for the base metric and mapped to a null vector
        assert abs(target.g(j @ k, j @ k)) <= 1e-8 * np.dot(j @ k, j @ k)


def test_conformal_factor_examples(mink4):
    g = metric_tensor(mink4)
    assert conformal_factor(mink4, g * 4.0) == pytest.approx(4.0)
    assert conformal_factor(mink4, g) == pytest.approx(1.0)
    assert conformal_factor(mink4, diag(mink4, -4, 1, 1, 1)) is None


def test_composition_of_accepted_maps():
    rng = np.random.default_rng(5)
    for _ in range(30):
        g = gen.random_frame(rng, 4)
        j1, h = gen.random_accepted_pullback(rng, g)
        j2, u = gen.random_accepted_pullback(rng, h)
        assert check_proper_causal(g, pullback_metric(j1, h.metric, g)).properly_related
        assert check_proper_causal(h, pullback_metric(j2, u.metric, h)).properly_related
        comp = pullback_metric(j2 @ j1, u.metric, g)
        assert check_proper_causal(g, comp).properly_related


def test_pullback_preserves_past_causal_covectors():
    """For an accepted map J^T w is past-causal in g whenever w is past-causal in h."""
    rng = np.random.default_rng(6)
    for _ in range(20):
        g = gen.random_frame(rng, 4)
        j, h = gen.random_accepted_pullback(rng, g)
        if check_proper_causal(g, pullback_metric(j, h.metric, g), j, h).orientation_flipped:
            continue
        for _ in range(10):
            k = gen.random_future_null(rng, h) + rng.uniform(0, 1) * h.future_axis
            w = h.metric @ k  # past-causal covector: w(future) <= 0
            pulled = covector(g, j.T @ w)
            assert check_dp_sampled(pulled, "minus", count=40, refine=False).member


# ---------------------------------------------------------------- generalized symmetries


def test_rw_examples():
    pt = builtin_example("robertson_walker", {"a": 1.0, "adot": -1.0})
    assert np.allclose(pt.candidate.components, -2 * np.diag([0.0, 1, 1, 1]))
    v = check_generalized_symmetry(pt.base_frame, pt.candidate, psi=-1.0)
    assert v.feasible and v.member_at_psi
    assert v.psi_max == pytest.approx(-0.5)

    pt = builtin_example("robertson_walker", {"a": 1.0, "adot": 1.0})
    v = check_generalized_symmetry(pt.base_frame, pt.candidate)
    assert not v.feasible
    assert pt.candidate([1, 1, 0, 0], [1, 1, 0, 0]) > 0


def test_rw_formula_identity(rng):
    for _ in range(10):
        a, adot = rng.uniform(0.3, 3.0), rng.uniform(-2, 2)
        pt = builtin_example("robertson_walker", {"a": a, "adot": adot})
        f = pt.base_frame
        t_xi = superenergy(covector(f, [1.0, 0, 0, 0]))
        expected = t_xi * (2 * adot / a) + metric_tensor(f) * (adot / a)
        assert np.allclose(pt.candidate.components, expected.components, rtol=1e-14, atol=1e-14)


def test_metric_multiple_symmetry(mink4):
    c = 0.8
    lt = metric_tensor(mink4) * c
    v = check_generalized_symmetry(mink4, lt, psi=c / 2)
    assert v.member_at_psi
    assert v.psi_max == pytest.approx(c / 2)
    assert not check_generalized_symmetry(mink4, lt, psi=c / 2 + 0.1).member_at_psi


def test_kerr_schild_example(mink4):
    pt = builtin_example("kerr_schild", {"ell": [1.0, 1, 0, 0], "amplitude": -3.0})
    l = covector(mink4, [1.0, 1, 0, 0])
    assert np.allclose(pt.candidate.components, (outer(l, l) * -3.0).components)
    assert check_dp_sampled(pt.candidate, "minus").member
    v = check_generalized_symmetry(mink4, pt.candidate, psi=0.0)
    assert v.feasible and v.member_at_psi and v.method == "sampled"


def test_monotone_psi(rng):
    f = gen.random_frame(rng, 4)
    for _ in range(10):
        t, _, _ = gen.random_dp2_plus(rng, f)
        lt = t * -1.0  # parallel constraint holds for DP2- deformations
        v = check_generalized_symmetry(f, lt)
        assert v.feasible
        for psi in v.psi_max - np.array([0.0, 0.1, 1.0, 10.0]):
            assert check_generalized_symmetry(f, lt, psi=psi).member_at_psi
        assert not check_generalized_symmetry(f, lt, psi=v.psi_max + 0.05).member_at_psi


def test_psi_max_matches_bisection(rng):
    """The closed-form bound agrees with bisection on the exact DP2- decision."""
    f = gen.random_frame(rng, 4)
    lt = gen.random_symmetric(rng, f)
    v = check_generalized_symmetry(f, lt)
    if not v.parallel_ok:
        lt = Tensor(f, -gen.random_dp2_plus(rng, f)[0].components)
        v = check_generalized_symmetry(f, lt)
    lo, hi = v.psi_max - 5.0, v.psi_max + 5.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if check_dp2_exact(Tensor(f, lt.components - 2 * mid * f.metric), "minus").member:
            lo = mid
        else:
            hi = mid
    assert lo == pytest.approx(v.psi_max, abs=1e-8)


def test_builtin_errors():
    with pytest.raises(UnknownExample):
        builtin_example("schwarzschild", {})
    with pytest.raises(BadParams):
        builtin_example("robertson_walker", {"a": -1.0, "adot": 1.0})
    with pytest.raises(BadParams):
        builtin_example("kerr_schild", {"ell": [1.0, 0.5, 0, 0]})
