"""Acceptance suite: thirteen property checks at desk scale.

Each ``criterion_*`` function returns a :class:`CriterionResult`; ``run_all``
runs them in order. Seeds are fixed so the corpus is reproducible.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List

import numpy as np

from . import generators as gen
from .causal_maps import builtin_example, check_generalized_symmetry, check_proper_causal, pullback_metric
from .cones import check_dp2_exact, check_dp_sampled, decompose_dp2, square_sym2
from .errors import NotDiagonalizable, NotDominant
from .forms import (
    BlockStructure,
    FoldedForm,
    hodge_dual,
    independent_square_sum,
    superenergy,
    superenergy_pform_closed,
)
from .lorentz import Tensor, basis_covector, inner_full, metric_tensor, minkowski, outer, wedge
from .rainich import classify, is_maxwell4, pform_test
from .wavefront import conserved_integrals, jump_superenergy, lightcone_example, rescale_bundle, transport_em


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""
    seconds: float = 0.0

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.number:2d} {self.name}: {self.detail} (value {self.value:.3e}, threshold {self.threshold:.1e})"


def _rel(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(b))), 1e-300)
    return float(np.max(np.abs(a - b))) / scale


def criterion_1(seed: int = 101) -> CriterionResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(200):
        n = 4 if i % 2 == 0 else 5
        frame = gen.random_frame(rng, n)
        p = int(rng.integers(1, n))
        w = gen.random_form(rng, frame, p)
        worst = max(worst, _rel(superenergy(w).components, superenergy_pform_closed(w).components))
    return CriterionResult(1, "closed-form agreement", worst <= 1e-10, worst, 1e-10, "200 random p-forms, N in {4,5}")


def criterion_2(seed: int = 102) -> CriterionResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(100):
        frame = gen.random_frame(rng, 4)
        if i % 2 == 0:
            degrees = (int(rng.integers(1, 4)),)
        else:
            degrees = (int(rng.integers(1, 4)), int(rng.integers(1, 4)))
        a = gen.random_folded(rng, frame, degrees)
        base = superenergy(a).components
        for P in range(1, 2 ** len(degrees) + 1):
            worst = max(worst, _rel(superenergy(hodge_dual(a, P)).components, base))
    return CriterionResult(2, "duality invariance", worst <= 1e-10, worst, 1e-10, "100 single and double forms, all duals")


def criterion_3(seed: int = 103) -> CriterionResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    ratios = []
    for _ in range(100):
        frame = gen.random_frame(rng, 4)
        d1, d2 = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        w1, w2 = gen.random_form(rng, frame, d1), gen.random_form(rng, frame, d2)
        lhs = superenergy(FoldedForm(outer(w1, w2), BlockStructure.contiguous((d1, d2)))).components
        rhs = outer(superenergy(w1), superenergy(w2)).components
        worst = max(worst, _rel(lhs, rhs))
        i = np.unravel_index(int(np.argmax(np.abs(rhs))), rhs.shape)
        ratios.append(lhs[i] / rhs[i])
    detail = f"100 decomposable double forms, lhs/rhs ratio in [{min(ratios):.6f}, {max(ratios):.6f}]"
    return CriterionResult(3, "tensor-product law (no normalization factor)", worst <= 1e-10, worst, 1e-10, detail)


def constant_curvature_riemann(frame, k: float = 1.0) -> Tensor:
    g = frame.metric
    r = k * (np.einsum("ac,bd->abcd", g, g) - np.einsum("ad,bc->abcd", g, g))
    return Tensor(frame, r)


def criterion_4(seed: int = 104) -> CriterionResult:
    rng = np.random.default_rng(seed)
    worst = math.inf
    cases = 0
    frames = [gen.random_frame(rng, 4) for _ in range(4)]
    tensors = []
    for frame in frames:
        for p in (1, 2, 3):
            tensors.append(superenergy(gen.random_form(rng, frame, p)))
        for degrees in ((1, 1), (1, 2), (2, 2), (1, 3), (2, 3)):
            tensors.append(superenergy(gen.random_folded(rng, frame, degrees)))
        tensors.append(superenergy(constant_curvature_riemann(frame, rng.uniform(0.5, 2.0))))
    for t in tensors:
        v = check_dp_sampled(t, "plus", count=int(math.ceil(1e5 ** (1 / t.rank))) + 1, seed=seed, cap=10**5, refine=False)
        worst = min(worst, v.margin)
        cases += 1
    return CriterionResult(
        4, "causality of superenergy", worst >= -1e-12, worst, -1e-12,
        f"{cases} tensors incl. constant-curvature Bel tensor, 1e5 null tuples each",
    )


def criterion_5(seed: int = 105) -> CriterionResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for degrees in ((1,), (2,), (3,), (1, 1), (2, 2), (1, 2), (2, 3)):
        frame = gen.random_frame(rng, 4)
        a = gen.random_folded(rng, frame, degrees)
        t = superenergy(a)
        for _ in range(5):
            basis = gen.random_orthonormal_basis(rng, frame, max_rapidity=1.5)
            e0 = basis[:, 0]
            lhs = t(*([e0] * t.rank))
            rhs = 0.5 * independent_square_sum(a, basis)
            worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1e-300))
    return CriterionResult(5, "timelike sum rule", worst <= 1e-12, worst, 1e-12, "7 structures x 5 boosted bases")


def criterion_6() -> CriterionResult:
    frame = minkowski(4)
    f = wedge(basis_covector(frame, 0), basis_covector(frame, 1))
    t = superenergy(f)
    t2 = Tensor(frame, t.components)
    checks: Dict[str, float] = {}
    checks["T"] = float(np.max(np.abs(t.components - np.diag([0.5, -0.5, 0.5, 0.5]))))
    checks["T^2"] = float(np.max(np.abs(square_sym2(t2).components - 0.25 * frame.metric)))
    checks["trace"] = abs(float(np.trace(frame.inverse @ t.components)))
    ok, c = is_maxwell4(t2)
    checks["maxwell"] = 0.0 if ok and abs(c - 0.25) < 1e-12 else 1.0
    try:
        dec = decompose_dp2(t2)
        single = len(dec.terms) == 1 and dec.terms[0].p == 2 and abs(dec.terms[0].weight - 1.0) < 1e-12
        checks["decompose"] = 0.0 if single else 1.0
    except (NotDominant, NotDiagonalizable):
        checks["decompose"] = 1.0
    checks["pform(2T)"] = 0.0 if pform_test(t2 * 2.0) == ("+", 2) else 1.0
    worst = max(checks.values())
    bad = [k for k, v in checks.items() if v > 1e-12]
    return CriterionResult(6, "Maxwell pipeline", not bad, worst, 1e-12, "failed: " + ", ".join(bad) if bad else "all six checks")


def _maxwell_c_oracle(f: Tensor) -> float:
    # for a simple 2-form, T^2 = (F.F / 4)^2 g with F.F = F_ab F^ab
    return (inner_full(f, f) * 2.0 / 4.0) ** 2 / 4.0


def criterion_7(seed: int = 107) -> CriterionResult:
    rng = np.random.default_rng(seed)
    expected_sets = {
        "maxwell": {"maxwell"},
        "scalar_timelike": {"scalar", "perfect_fluid"},
        "scalar_spacelike": {"scalar"},
        "scalar_null": {"scalar", "maxwell"},
        "fluid": {"perfect_fluid"},
        "dust": {"dust", "perfect_fluid"},
    }
    worst = 0.0
    false_accepts = 0
    misses = 0
    total = 0

    def err(a, b):
        return abs(a - b) / max(1.0, abs(b))

    for cls, expected in expected_sets.items():
        for _ in range(100):
            frame = gen.random_frame(rng, 4)
            params_err = 0.0
            if cls == "maxwell":
                f = gen.random_simple_form(rng, frame, 2)
                t = superenergy(f)
                t = Tensor(frame, t.components)
                oracle = {"maxwell": {"c": _maxwell_c_oracle(f)}}
            elif cls.startswith("scalar"):
                kind = cls.split("_")[1]
                basis = gen.random_orthonormal_basis(rng, frame)
                w = rng.standard_normal(3)
                w /= np.linalg.norm(w)
                amp = rng.uniform(0.5, 2.0)
                if kind == "timelike":
                    vec = basis @ np.concatenate([[1.0], rng.uniform(0, 0.8) * w])
                elif kind == "spacelike":
                    vec = basis @ np.concatenate([[rng.uniform(-0.8, 0.8)], w])
                else:
                    vec = basis @ np.concatenate([[1.0], w])
                d = frame.metric @ (amp * vec)
                t = superenergy(Tensor(frame, d))
                t = Tensor(frame, t.components)
                norm = float(d @ frame.inverse @ d)
                if kind == "null":
                    oracle = {"scalar": {"beta": None, "character": "null"}}
                else:
                    beta = 2.0 if kind == "timelike" else -2.0
                    oracle = {"scalar": {"beta": beta, "character": kind, "gradient_norm_sq": norm}}
            else:
                rho = rng.uniform(0.5, 3.0)
                p = 0.0 if cls == "dust" else rng.uniform(-1.0, 1.0) * rho * 0.999
                if cls == "fluid" and abs(p) < 1e-3:
                    p = 0.5 * rho
                basis = gen.random_orthonormal_basis(rng, frame)
                from .rainich import build_em

                t = build_em(cls, {"rho": rho, "p": p, "u": basis[:, 0]}, frame)
                oracle = {"perfect_fluid": {"lambda": (rho - p) / 2, "mu": (rho + p) / 2}}
                if cls == "dust":
                    oracle["dust"] = {"rho": rho}
            result = classify(t)
            got = {k for k, _ in result.matches}
            total += 1
            if got - expected:
                false_accepts += 1
            if not expected <= got:
                misses += 1
                continue
            for kind, params in result.matches:
                for key, val in oracle.get(kind, {}).items():
                    if isinstance(val, str) or val is None:
                        params_err = max(params_err, 0.0 if params.get(key) == val else 1.0)
                    else:
                        params_err = max(params_err, err(params[key], val))
            worst = max(worst, params_err)
    passed = false_accepts == 0 and misses == 0 and worst <= 1e-9
    detail = f"{total} generated tensors, {misses} misclassified, {false_accepts} cross-class accepts"
    return CriterionResult(7, "Rainich round trips", passed, worst, 1e-9, detail)


def criterion_8(seed: int = 108) -> CriterionResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    min_alpha = math.inf
    for _ in range(200):
        frame = gen.random_frame(rng, 4)
        t, mu, p = gen.random_dp2_plus(rng, frame)
        dec = decompose_dp2(t)
        worst = max(worst, _rel(dec.reassemble().components, t.components))
        min_alpha = min(min_alpha, float(np.min(dec.weights)) / t.scale())
    mismatches = 0
    for _ in range(200):
        frame = gen.random_frame(rng, 4)
        t = gen.random_symmetric(rng, frame)
        v = check_dp2_exact(t, "plus")
        accepted = v.member and v.method == "exact_eigen"
        try:
            decompose_dp2(t)
            decomposed = True
        except (NotDominant, NotDiagonalizable):
            decomposed = False
        mismatches += accepted != decomposed
    passed = worst <= 1e-9 and min_alpha >= -1e-12 and mismatches == 0
    detail = f"min weight {min_alpha:.2e}, {mismatches} exact-test/decomposition mismatches on 200 mixed tensors"
    return CriterionResult(8, "decomposition reassembly", passed, worst, 1e-9, detail)


def criterion_9() -> CriterionResult:
    wrong = []
    for q in (0.25, 0.5, 0.9, 1.0, 1.1, 2.0, 5.0):
        pt = builtin_example("minkowski_stretch", {"q": q})
        v = check_proper_causal(pt.base_frame, pt.candidate, pt.jacobian, pt.target)
        if v.properly_related != (q >= 1):
            wrong.append(f"q={q}")
        if q == 1.0 and (v.conformal_factor is None or abs(v.conformal_factor - 1) > 1e-12 or v.canonical_null_count != 4):
            wrong.append("q=1 conformal report")
        if q == 2.0 and v.canonical_null_count != 0:
            wrong.append("q=2 null count")
    return CriterionResult(9, "stretch family", not wrong, float(len(wrong)), 0.0, ", ".join(wrong) or "accepted exactly for q >= 1")


def criterion_10() -> CriterionResult:
    wrong = []
    for a in (0.5, 1.0, 2.0):
        for adot in (-2.0, -1.0, -0.25, 0.0, 0.25, 1.0):
            pt = builtin_example("robertson_walker", {"a": a, "adot": adot})
            v = check_generalized_symmetry(pt.base_frame, pt.candidate, psi=adot / a)
            if adot <= 0:
                if not (v.feasible and v.psi_max is not None and v.psi_max >= adot / a and v.member_at_psi):
                    wrong.append(f"a={a}, adot={adot}")
            elif v.feasible:
                wrong.append(f"a={a}, adot={adot} feasible")
    for amp in (-0.5, -3.0):
        pt = builtin_example("kerr_schild", {"amplitude": amp})
        v = check_generalized_symmetry(pt.base_frame, pt.candidate, psi=0.0)
        if not (v.feasible and v.member_at_psi):
            wrong.append(f"kerr_schild {amp}")
    return CriterionResult(10, "generalized symmetry", not wrong, float(len(wrong)), 0.0, ", ".join(wrong) or "RW and Kerr-Schild as expected")


def criterion_11() -> CriterionResult:
    cuts = np.array([1.0, 2.0, 5.0])
    spread = 0.0
    law = 0.0
    rescale = 0.0
    for n in (3, 4, 5):
        bundle = lightcone_example(n, 1.0, 5.0, 100)
        for kind in ("em", "grav"):
            base = conserved_integrals(bundle, cuts, kind)
            spread = max(spread, base.spread)
            for rho in (0.5, 2.0):
                other = conserved_integrals(rescale_bundle(bundle, rho), cuts / rho, kind)
                rescale = max(rescale, _rel(other.values, base.values))
        g0 = bundle.generators[0]
        r = transport_em(g0, cuts)
        law = max(law, _rel(r.values, g0.c2_init * cuts ** (-(n - 2.0))))
    passed = spread <= 1e-8 and law <= 1e-8 and rescale <= 1e-10
    detail = f"cut spread {spread:.2e}, |c|^2 law {law:.2e}, rescaling {rescale:.2e}"
    return CriterionResult(11, "wavefront conservation", passed, max(spread, law), 1e-8, detail)


def criterion_12(seed: int = 112) -> CriterionResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(50):
        frame = gen.random_frame(rng, 4)
        res = jump_superenergy(gen.random_jump(rng, frame))
        worst = max(worst, max(v["residual"] for v in res.values()))
    return CriterionResult(12, "jump identities", worst <= 1e-12, worst, 1e-12, "50 random jump data sets")


def criterion_13(seed: int = 113) -> CriterionResult:
    rng = np.random.default_rng(seed)
    failures = 0
    for _ in range(50):
        g = gen.random_frame(rng, 4)
        j1, h = gen.random_accepted_pullback(rng, g, flip_probability=0.3)
        j2, u = gen.random_accepted_pullback(rng, h, flip_probability=0.3)
        first = check_proper_causal(g, pullback_metric(j1, h.metric, g)).properly_related
        second = check_proper_causal(h, pullback_metric(j2, u.metric, h)).properly_related
        if not (first and second):
            failures += 1
            continue
        failures += not check_proper_causal(g, pullback_metric(j2 @ j1, u.metric, g)).properly_related
    return CriterionResult(13, "composition preorder", failures == 0, float(failures), 0.0, "50 random chains")


CRITERIA: List[Callable[[], CriterionResult]] = [
    criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
    criterion_8, criterion_9, criterion_10, criterion_11, criterion_12, criterion_13,
]


def run_criterion(number: int) -> CriterionResult:
    start = time.perf_counter()
    res = CRITERIA[number - 1]()
    res.seconds = time.perf_counter() - start
    return res


def run_all(verbose: bool = False) -> List[CriterionResult]:
    out = []
    for i in range(1, len(CRITERIA) + 1):
        res = run_criterion(i)
        if verbose:
            print(res.line(), flush=True)
        out.append(res)
    return out
