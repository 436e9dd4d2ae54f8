"""Algebraic classification of symmetric rank-2 tensors as energy-momentum tensors.

All identities are checked relative to the natural scale of each side:
quadratic identities against max|T|^2, linear ones against max|T|.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .cones import check_dp2_exact, require_symmetric, square_sym2
from .errors import BadParams, WrongDimension
from .forms import superenergy
from .lorentz import TOL_ALG, LorentzFrame, Tensor, covector, lower, metric_tensor


@dataclass
class EMClassification:
    kind: str
    params: dict = field(default_factory=dict)
    matches: List[Tuple[str, dict]] = field(default_factory=list)
    residuals: Dict[str, float] = field(default_factory=dict)


def _trace(t: Tensor) -> float:
    return float(np.trace(t.frame.inverse @ t.components))


def _sq_scale(t: Tensor) -> float:
    return max(t.scale() ** 2, 1e-300)


def _rel(x: np.ndarray, scale: float) -> float:
    return float(np.max(np.abs(x))) / scale


def _proportional_to_metric(x: np.ndarray, frame: LorentzFrame, scale: float) -> Tuple[float, float]:
    """(c, residual) for the best x = c g with c = tr x / N."""
    c = float(np.trace(frame.inverse @ x)) / frame.dim
    return c, _rel(x - c * frame.metric, scale)


def _unit_future(frame: LorentzFrame) -> np.ndarray:
    u = frame.future_axis
    return u / math.sqrt(-frame.g(u, u))


def pform_test(t: Tensor, tol: float = TOL_ALG) -> Optional[Tuple[str, int]]:
    """Recognize +-T{Omega_p} normalized so that T^2 = g.

    Returns (sign, p) with tr(sT) = N - 2p, or None.
    """
    require_symmetric(t)
    if t.scale() == 0.0:
        return None
    frame = t.frame
    sq = square_sym2(t).components
    if _rel(sq - frame.metric, max(_sq_scale(t), 1.0)) > tol:
        return None
    for sign, s in (("+", 1.0), ("-", -1.0)):
        if check_dp2_exact(t, "plus" if s > 0 else "minus", tol=tol).member:
            break
    else:
        return None
    p_real = (frame.dim - s * _trace(t)) / 2.0
    p = int(round(p_real))
    if abs(p - p_real) > tol * frame.dim or not 1 <= p <= frame.dim:
        return None
    return sign, p


def is_maxwell4(t: Tensor, tol: float = TOL_ALG) -> Tuple[bool, float]:
    """G^2 = c g with c >= 0 and tr G = 0 (four dimensions only). Returns (accepted, c)."""
    if t.dim != 4:
        raise WrongDimension("the Maxwell test is four-dimensional; use pform_test otherwise")
    require_symmetric(t)
    if t.scale() == 0.0:
        return False, 0.0
    scale = _sq_scale(t)
    c, res = _proportional_to_metric(square_sym2(t).components, t.frame, scale)
    ok = res <= tol and c >= -tol * scale and abs(_trace(t)) <= tol * t.scale()
    return bool(ok), max(c, 0.0)


def is_scalar_field(t: Tensor, tol: float = TOL_ALG) -> Optional[Tuple[Optional[float], str]]:
    """Massless scalar field test: T^2 = c g, tr T = beta sqrt(c), beta = +-(N-2).

    Returns (beta, character); beta is None for the null case. T(u, u) >= 0
    is also required for the future unit axis u, which removes -T{d phi}.
    """
    require_symmetric(t)
    if t.scale() == 0.0:
        return None
    frame = t.frame
    n = frame.dim
    scale = _sq_scale(t)
    c, res = _proportional_to_metric(square_sym2(t).components, frame, scale)
    if res > tol or c < -tol * scale:
        return None
    u = _unit_future(frame)
    if t(u, u) < -tol * t.scale():
        return None
    tr = _trace(t)
    if c <= tol * scale:
        if abs(tr) <= tol * t.scale():
            return None, "null"
        return None
    beta = tr / math.sqrt(c)
    if n == 2:
        return (0.0, "timelike") if abs(beta) <= tol else None
    if abs(beta - (n - 2)) <= tol * n:
        return float(n - 2), "timelike"
    if abs(beta + (n - 2)) <= tol * n:
        return float(2 - n), "spacelike"
    return None


def _fluid_candidates(t: Tensor) -> List[Tuple[float, float]]:
    frame = t.frame
    n = frame.dim
    mixed = frame.inverse @ t.components
    tr = float(np.trace(mixed))
    tr2 = float(np.trace(mixed @ mixed))
    if n == 2:
        lam = -tr / 2.0
        m2 = (tr2 + 2 * lam * tr) / 2.0 + lam * lam
        return [(lam, math.sqrt(m2))] if m2 >= 0 else []
    a = 4.0 * n * (n - 1)
    b = 8.0 * (n - 1) * tr
    c = n * tr * tr - (n - 2) ** 2 * tr2
    disc = b * b - 4 * a * c
    if disc < 0:
        if disc < -1e-9 * (b * b + abs(4 * a * c)):
            return []
        disc = 0.0
    root = math.sqrt(disc)
    out = []
    for lam in {(-b + root) / (2 * a), (-b - root) / (2 * a)}:
        out.append((lam, (tr + n * lam) / (n - 2)))
    return out


def is_perfect_fluid(t: Tensor, tol: float = TOL_ALG) -> List[Tuple[float, float]]:
    """All (lambda, mu) with T^2 = -2 lambda T + (mu^2 - lambda^2) g,
    tr T = (N-2) mu - N lambda, lambda >= 0 and mu > 0.

    lambda = (rho - p)/2 and mu = (rho + p)/2. Empty list on rejection.
    """
    require_symmetric(t)
    if t.scale() == 0.0:
        return []
    frame = t.frame
    n = frame.dim
    scale = _sq_scale(t)
    lin = max(t.scale(), 1e-300)
    sq = square_sym2(t).components
    tr = _trace(t)
    found = []
    for lam, mu in _fluid_candidates(t):
        if lam < -tol * lin or mu <= tol * lin:
            continue
        lam = max(lam, 0.0)
        res = _rel(sq + 2 * lam * t.components - (mu * mu - lam * lam) * frame.metric, scale)
        if res > tol or abs(tr - ((n - 2) * mu - n * lam)) > tol * lin * n:
            continue
        found.append((lam, mu))
    found.sort()
    return found


def is_dust(t: Tensor, tol: float = TOL_ALG) -> Optional[float]:
    """T^2 = (tr T) T with tr T < 0; returns rho = -tr T."""
    require_symmetric(t)
    if t.scale() == 0.0:
        return None
    tr = _trace(t)
    if tr >= -tol * t.scale():
        return None
    if _rel(square_sym2(t).components - tr * t.components, _sq_scale(t)) > tol:
        return None
    return -tr


def build_em(kind: str, params: dict, frame: LorentzFrame) -> Tensor:
    """Energy-momentum tensor of a Maxwell field, scalar field, perfect fluid or dust.

    params: maxwell {"F": 2-form Tensor or array}; scalar {"dphi": 1-form};
    fluid {"rho", "p", optional "u" vector}; dust {"rho", optional "u"}.
    """
    if kind == "maxwell":
        f = params.get("F")
        if f is None:
            raise BadParams("maxwell needs F")
        f = f if isinstance(f, Tensor) else Tensor(frame, np.asarray(f, dtype=float))
        if f.rank != 2:
            raise BadParams("F must be a 2-form")
        out = superenergy(f)
    elif kind == "scalar":
        d = params.get("dphi")
        if d is None:
            raise BadParams("scalar needs dphi")
        d = d if isinstance(d, Tensor) else covector(frame, d)
        if d.rank != 1:
            raise BadParams("dphi must be a 1-form")
        out = superenergy(d)
    elif kind in ("fluid", "dust"):
        try:
            rho = float(params["rho"])
            p = 0.0 if kind == "dust" else float(params["p"])
        except (KeyError, TypeError, ValueError) as exc:
            raise BadParams(f"{kind} needs numeric rho{'' if kind == 'dust' else ' and p'}") from exc
        if rho < abs(p):
            raise BadParams("fluid parameters need rho >= |p|")
        u = params.get("u")
        u = _unit_future(frame) if u is None else np.asarray(u, dtype=float)
        uu = frame.g(u, u)
        if uu >= 0:
            raise BadParams("fluid velocity must be timelike")
        u = u / math.sqrt(-uu)
        ul = lower(frame, u).components
        comps = (rho + p) * np.outer(ul, ul) + p * frame.metric
        return Tensor(frame, comps)
    else:
        raise BadParams(f"unknown kind {kind!r}")
    return Tensor(out.frame, out.components)


def _residuals(t: Tensor) -> Dict[str, float]:
    """Deviations of the basic algebraic identities, for reporting."""
    frame = t.frame
    scale = _sq_scale(t)
    sq = square_sym2(t).components
    tr = _trace(t)
    _, prop = _proportional_to_metric(sq, frame, scale)
    return {
        "square_vs_metric_multiple": prop,
        "square_vs_trace_times_T": _rel(sq - tr * t.components, scale),
        "trace": tr,
    }


def classify(t: Tensor, tol: float = TOL_ALG) -> EMClassification:
    """Run every classifier; ``kind`` is the first match in the order
    dust, maxwell, scalar, perfect_fluid, pform. ``matches`` lists them all.
    """
    require_symmetric(t)
    matches: List[Tuple[str, dict]] = []
    residuals = _residuals(t)
    rho = is_dust(t, tol)
    if rho is not None:
        matches.append(("dust", {"rho": rho}))
    if t.dim == 4:
        ok, c = is_maxwell4(t, tol)
        if ok:
            matches.append(("maxwell", {"c": c}))
    sc = is_scalar_field(t, tol)
    if sc is not None:
        beta, character = sc
        params = {"beta": beta, "character": character}
        if character != "null":
            # |d phi|^2 is negative for a timelike gradient
            c = float(np.trace(t.frame.inverse @ square_sym2(t).components)) / t.dim
            params["gradient_norm_sq"] = (-2.0 if character == "timelike" else 2.0) * math.sqrt(max(c, 0.0))
        matches.append(("scalar", params))
    for lam, mu in is_perfect_fluid(t, tol):
        matches.append(("perfect_fluid", {"lambda": lam, "mu": mu, "rho": lam + mu, "p": mu - lam}))
    pf = pform_test(t, tol)
    if pf is not None:
        matches.append(("pform", {"sign": pf[0], "p": pf[1]}))
    if not matches:
        return EMClassification("unknown", {}, [], residuals)
    kind, params = matches[0]
    return EMClassification(kind, params, matches, residuals)
