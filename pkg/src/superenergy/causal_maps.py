"""Pointwise causal relations between Lorentzian metrics.

A map with Jacobian J at a point relates the base metric g to a target
metric h properly when the pullback J^T h J is in DP2-. Everything here
works in one tangent space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg

from .cones import (
    DPVerdict,
    check_dp2_exact,
    check_dp_sampled,
    refine_null_tuple,
    require_symmetric,
    sample_null,
    segre_frame,
)
from .errors import BadParams, DegenerateCandidate, SingularJacobian, UnknownExample
from .lorentz import TOL_ALG, TOL_CLASS, LorentzFrame, Tensor, covector, make_frame, minkowski, outer

CLUSTER_GAP = 1e-7


@dataclass
class PullbackPoint:
    base_frame: LorentzFrame
    candidate: Tensor
    jacobian: Optional[np.ndarray] = None
    target: Optional[LorentzFrame] = None


@dataclass
class CausalRelVerdict:
    properly_related: bool
    orientation_flipped: Optional[bool]
    canonical_null_count: int
    conformal_factor: Optional[float]
    witness: Optional[Tuple[np.ndarray, np.ndarray]] = None
    witness_value: Optional[float] = None
    margin: float = 0.0
    method: str = "exact_eigen"


@dataclass
class SymmetryVerdict:
    """Feasibility of L - 2 psi g in DP2-; feasible psi form (-inf, psi_max]."""

    feasible: bool
    psi_max: Optional[float]
    parallel_ok: bool
    method: str
    psi: Optional[float] = None
    member_at_psi: Optional[bool] = None
    verified_at_max: Optional[bool] = None
    witness: Optional[Tuple[np.ndarray, ...]] = None


def pullback_metric(jacobian, h, base: Optional[LorentzFrame] = None) -> Tensor:
    """J^T h J, expressed on the base frame (default: h's frame, or Minkowski)."""
    j = np.asarray(jacobian, dtype=float)
    hm = h.components if isinstance(h, Tensor) else np.asarray(h, dtype=float)
    n = hm.shape[0]
    if j.shape != (n, n):
        raise BadParams(f"jacobian must be {n}x{n}, got {j.shape}")
    jscale = float(np.max(np.abs(j))) if j.size else 0.0
    if jscale == 0.0 or abs(np.linalg.det(j)) <= 1e-12 * jscale**n:
        raise SingularJacobian("jacobian is singular")
    if base is None:
        base = h.frame if isinstance(h, Tensor) else minkowski(n)
    out = j.T @ hm @ j
    return Tensor(base, 0.5 * (out + out.T))


def _unit_future(frame: LorentzFrame) -> np.ndarray:
    u = frame.future_axis
    return u / math.sqrt(-frame.g(u, u))


def _future_normalize(frame: LorentzFrame, k: np.ndarray) -> np.ndarray:
    s = -frame.g(k, _unit_future(frame))
    return k / s


def _independent(vectors: List[np.ndarray], cap: int) -> List[np.ndarray]:
    kept: List[np.ndarray] = []
    for v in vectors:
        trial = np.column_stack(kept + [v])
        sv = np.linalg.svd(trial, compute_uv=False)
        if sv[-1] > 1e-8 * sv[0]:
            kept.append(v)
        if len(kept) == cap:
            break
    return kept


def canonical_null_directions(frame: LorentzFrame, phg: Tensor) -> List[np.ndarray]:
    """Null vectors that are eigenvectors of phg relative to g, future-normalized.

    Eigenvalues of the pencil (phg, g) are grouped with relative gap 1e-7; each
    real eigenspace contributes the null vectors it contains, up to N in total.
    """
    require_symmetric(phg)
    g = frame.metric
    s = phg.components
    scale = max(float(np.max(np.abs(s))), 1e-300)
    lam = scipy.linalg.eigvals(s, g)
    lscale = max(float(np.max(np.abs(lam))), 1e-300)
    real = np.sort(lam.real[np.abs(lam.imag) <= CLUSTER_GAP * lscale])
    if real.size == 0:
        return []
    clusters = [[real[0]]]
    for x in real[1:]:
        if x - clusters[-1][-1] > CLUSTER_GAP * lscale:
            clusters.append([x])
        else:
            clusters[-1].append(x)
    found: List[np.ndarray] = []
    for cl in clusters:
        lbar = float(np.mean(cl))
        _, sv, vt = np.linalg.svd(s - lbar * g)
        tol = 1e-6 * (scale + abs(lbar) * float(np.max(np.abs(g))))
        v = vt[sv <= tol].T
        if v.shape[1] == 0:
            continue
        gv = v.T @ g @ v
        d, q = np.linalg.eigh(0.5 * (gv + gv.T))
        gscale = max(float(np.max(np.abs(d))), 1e-300)
        w = v @ q
        zero = np.abs(d) <= 1e-7 * gscale
        neg = d < -1e-7 * gscale
        pos = d > 1e-7 * gscale
        if zero.any():
            cands = [w[:, i] for i in np.flatnonzero(zero)]
        elif neg.sum() == 1 and pos.sum() >= 1:
            t = w[:, np.flatnonzero(neg)[0]] / math.sqrt(-d[neg][0])
            sp = [w[:, i] / math.sqrt(d[i]) for i in np.flatnonzero(pos)]
            cands = [t + sp[0], t - sp[0]] + [t + e for e in sp[1:]]
        else:
            continue
        found.extend(_future_normalize(frame, k) for k in cands)
    return _independent(found, frame.dim)


def conformal_factor(frame: LorentzFrame, phg: Tensor, tol: float = TOL_ALG) -> Optional[float]:
    """c with phg = c g (c > 0), else None."""
    s = phg.components
    c = float(np.trace(frame.inverse @ s)) / frame.dim
    scale = max(float(np.max(np.abs(s))), 1e-300)
    if c <= 0 or float(np.max(np.abs(s - c * frame.metric))) > tol * scale:
        return None
    return c


def check_proper_causal(
    frame: LorentzFrame,
    phg: Tensor,
    jacobian=None,
    target: Optional[LorentzFrame] = None,
    tol: float = TOL_CLASS,
    seed: int = 0,
) -> CausalRelVerdict:
    """Decide phg in DP2- relative to ``frame``.

    orientation_flipped needs the Jacobian and the target frame: it is True
    when the unit future axis is mapped to a past-pointing vector. Without
    them it is None.
    """
    require_symmetric(phg)
    s = phg.components
    scale = max(float(np.max(np.abs(s))), 1e-300)
    if abs(np.linalg.det(s)) <= 1e-12 * scale**frame.dim:
        raise DegenerateCandidate("pulled-back metric is degenerate")
    cand = Tensor(frame, s) if phg.frame is not frame else phg
    verdict: DPVerdict = check_dp2_exact(cand, "minus", tol=tol, seed=seed)
    flipped = None
    if jacobian is not None and target is not None:
        image = np.asarray(jacobian, dtype=float) @ _unit_future(frame)
        flipped = bool(target.g(image, target.future_axis) > 0)
    nulls = canonical_null_directions(frame, cand)
    cf = conformal_factor(frame, cand)
    return CausalRelVerdict(
        properly_related=verdict.member,
        orientation_flipped=flipped,
        canonical_null_count=frame.dim if cf is not None else len(nulls),
        conformal_factor=cf,
        witness=verdict.witness,
        witness_value=verdict.witness_value,
        margin=verdict.margin,
        method=verdict.method,
    )


def _sampled_psi_max(frame: LorentzFrame, lm: np.ndarray, count: int, seed: int):
    ks = sample_null(frame, count, seed)
    g = frame.metric
    gk = ks @ g @ ks.T
    lk = ks @ lm @ ks.T
    norms = np.linalg.norm(ks, axis=1)
    par = -np.diag(lk)
    parallel_min = float(par.min())
    mask = gk < -1e-9 * np.outer(norms, norms)
    ratios = np.where(mask, lk / np.where(mask, 2.0 * gk, 1.0), np.inf)
    i, j = np.unravel_index(int(np.argmin(ratios)), ratios.shape)
    best = float(ratios[i, j])

    def objective(pair):
        gg = frame.g(pair[0], pair[1])
        if gg > -1e-9 * np.linalg.norm(pair[0]) * np.linalg.norm(pair[1]):
            return best
        return float(pair[0] @ lm @ pair[1]) / (2.0 * gg)

    pair, value = refine_null_tuple(frame, objective, (ks[i], ks[j]))
    return min(best, value), parallel_min, pair


def check_generalized_symmetry(
    frame: LorentzFrame,
    L: Tensor,
    psi: Optional[float] = None,
    tol: float = TOL_CLASS,
    count: int = 400,
    seed: int = 0,
) -> SymmetryVerdict:
    """Feasibility of L - 2 psi g in DP2- over scalar psi.

    For Segre type [1,1...1] with L = diag(mu_L, p_i) in an eigen-orthonormal
    frame the conditions are -mu_L >= p_i (psi independent) and
    psi <= (min p_i - mu_L)/4. Other types use sampled null pairs plus
    refinement, then verify at the estimated psi_max.
    """
    require_symmetric(L)
    lm = L.components
    g = frame.metric
    lt = Tensor(frame, lm)
    scale = max(float(np.max(np.abs(lm))), 1.0)
    sf = segre_frame(lt)
    witness = None
    if sf is not None:
        parallel_ok = bool(np.all(-sf.mu - sf.p >= -tol * scale))
        psi_max = float((np.min(sf.p) - sf.mu) / 4.0)
        method = "exact_eigen"
        verified = None
    else:
        psi_max, parallel_min, witness = _sampled_psi_max(frame, lm, count, seed)
        parallel_ok = parallel_min >= -tol * scale
        method = "sampled"
        verified = None
        if parallel_ok and math.isfinite(psi_max):
            at_max = Tensor(frame, lm - 2.0 * psi_max * g)
            verified = check_dp2_exact(at_max, "minus", tol=1e-8, seed=seed).member
    feasible = bool(parallel_ok and (verified is None or verified))
    out = SymmetryVerdict(feasible, psi_max if parallel_ok else None, parallel_ok, method, verified_at_max=verified, witness=witness)
    if psi is not None:
        out.psi = float(psi)
        out.member_at_psi = check_dp2_exact(Tensor(frame, lm - 2.0 * psi * g), "minus", tol=tol, seed=seed).member
    return out


def builtin_example(name: str, params: Optional[dict] = None, dim: int = 4) -> PullbackPoint:
    """Reference points: minkowski_stretch {q}, robertson_walker {a, adot, spatial?},
    kerr_schild {ell?, amplitude}."""
    params = dict(params or {})
    if name == "minkowski_stretch":
        q = float(params.get("q", 1.0))
        if q == 0:
            raise BadParams("q must be nonzero")
        base = minkowski(dim)
        j = np.eye(dim)
        j[0, 0] = q
        return PullbackPoint(base, pullback_metric(j, base.metric, base), j, base)
    if name == "robertson_walker":
        try:
            a = float(params.get("a", 1.0))
            adot = float(params["adot"])
        except (KeyError, TypeError, ValueError) as exc:
            raise BadParams("robertson_walker needs a and adot") from exc
        if a <= 0:
            raise BadParams("scale factor must be positive")
        spatial = np.asarray(params.get("spatial", np.eye(dim - 1)), dtype=float)
        if spatial.shape != (dim - 1, dim - 1):
            raise BadParams("spatial metric has the wrong shape")
        metric = np.zeros((dim, dim))
        metric[0, 0] = -1.0
        metric[1:, 1:] = a * a * spatial
        base = make_frame(dim, metric)
        xi = np.zeros(dim)
        xi[0] = 1.0
        lm = (2.0 * adot / a) * (metric + np.outer(xi, xi))
        return PullbackPoint(base, Tensor(base, lm))
    if name == "kerr_schild":
        base = minkowski(dim)
        ell = np.asarray(params.get("ell", [1.0, 1.0] + [0.0] * (dim - 2)), dtype=float)
        if ell.shape != (dim,):
            raise BadParams("ell has the wrong length")
        if abs(ell @ base.inverse @ ell) > 1e-12 * float(ell @ ell):
            raise BadParams("ell must be null")
        c = float(params.get("amplitude", params.get("c", -1.0)))
        lv = covector(base, ell)
        return PullbackPoint(base, outer(lv, lv) * c)
    raise UnknownExample(f"unknown example {name!r}")
