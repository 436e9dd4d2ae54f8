"""Dominant-property membership and the simple-form decomposition of rank-2 causal tensors."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import norm, qmc

from .errors import NotDiagonalizable, NotDominant, NotSymmetric, RankZero
from .forms import superenergy
from .lorentz import TOL_ALG, TOL_CLASS, LorentzFrame, Tensor, covector, orthonormal_basis, wedge

MAX_TUPLES = 10**6
REFINE_ITERATIONS = 50
REFINE_SWEEPS = 3
REFINE_STARTS = 3
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass
class DPVerdict:
    member: bool
    sign: str
    method: str
    margin: float
    witness: Optional[Tuple[np.ndarray, ...]] = None
    witness_value: Optional[float] = None
    samples_used: int = 0


@dataclass
class SegreFrame:
    """Eigen-orthonormal frame of a Segre [1,1...1] tensor.

    ``basis`` holds e_0 (future unit timelike) then spatial vectors as
    columns; T(e_0, e_0) = mu and T(e_i, e_i) = p[i-1], off-diagonals vanish.
    Spatial values are sorted ascending.
    """

    mu: float
    p: np.ndarray
    basis: np.ndarray


def _sign_factor(sign: str) -> float:
    if sign not in ("plus", "minus"):
        raise ValueError(f"sign must be 'plus' or 'minus', got {sign!r}")
    return 1.0 if sign == "plus" else -1.0


def require_symmetric(t: Tensor, tol: float = TOL_ALG) -> None:
    if t.rank != 2:
        raise NotSymmetric(f"expected a rank-2 tensor, got rank {t.rank}")
    a = t.components
    if np.max(np.abs(a - a.T)) > tol * max(t.scale(), 1e-300):
        raise NotSymmetric("tensor is not symmetric")


# ---------------------------------------------------------------- null sampling


def _sphere_points(count: int, dim: int, seed: int) -> np.ndarray:
    """Low-discrepancy points then a seeded pseudo-random tail on S^{dim-1}."""
    if count <= 0:
        return np.zeros((0, dim))
    if dim == 1:
        return np.where(np.arange(count) % 2 == 0, 1.0, -1.0)[:, None]
    n_qmc = count // 2
    halton = qmc.Halton(d=dim, scramble=False)
    halton.fast_forward(1)
    u = np.clip(halton.random(n_qmc), 1e-12, 1 - 1e-12)
    pts = [norm.ppf(u)]
    rng = np.random.default_rng(seed)
    pts.append(rng.standard_normal((count - n_qmc, dim)))
    w = np.vstack(pts)
    return w / np.linalg.norm(w, axis=1, keepdims=True)


def sample_null(frame: LorentzFrame, count: int, seed: int = 0) -> np.ndarray:
    """Future null vectors e_0 + w, w a unit spatial vector, one per row.

    The 2(N-1) axis directions come first, in the order +e_1, -e_1, +e_2, ...
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    basis = orthonormal_basis(frame)
    n = frame.dim
    axes = []
    for i in range(1, n):
        for s in (1.0, -1.0):
            w = np.zeros(n - 1)
            w[i - 1] = s
            axes.append(w)
    spatial = np.array(axes[:count])
    if count > len(axes):
        spatial = np.vstack([spatial, _sphere_points(count - len(axes), n - 1, seed)])
    local = np.hstack([np.ones((count, 1)), spatial])
    return local @ basis.T


def _angles_from_unit(w: np.ndarray) -> np.ndarray:
    """Hyperspherical angles of a unit vector in R^d (d-1 angles)."""
    d = w.size
    phi = np.zeros(d - 1)
    for i in range(d - 2):
        phi[i] = math.atan2(np.linalg.norm(w[i + 1:]), w[i])
    if d >= 2:
        phi[d - 2] = math.atan2(w[d - 1], w[d - 2])
    return phi


def _unit_from_angles(phi: np.ndarray) -> np.ndarray:
    sines = np.concatenate([[1.0], np.cumprod(np.sin(phi))])
    return sines * np.concatenate([np.cos(phi), [1.0]])


class _NullChart:
    """Maps spherical angles to future null vectors of one frame."""

    def __init__(self, frame: LorentzFrame):
        self.basis = orthonormal_basis(frame)
        self.n = frame.dim

    def angles(self, k: np.ndarray) -> np.ndarray:
        local = np.linalg.solve(self.basis, k)
        return _angles_from_unit(local[1:] / local[0])

    def vector(self, phi: np.ndarray) -> np.ndarray:
        local = np.concatenate([[1.0], _unit_from_angles(phi)])
        return self.basis @ local


def _golden_min(f: Callable[[float], float], lo: float, hi: float, iters: int) -> Tuple[float, float]:
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def refine_null_tuple(
    frame: LorentzFrame,
    objective: Callable[[Tuple[np.ndarray, ...]], float],
    start: Tuple[np.ndarray, ...],
    iterations: int = REFINE_ITERATIONS,
    sweeps: int = REFINE_SWEEPS,
) -> Tuple[Tuple[np.ndarray, ...], float]:
    """Coordinate-wise golden-section descent of ``objective`` over the angles of each null vector.

    Only strict improvements are kept, so the result never exceeds the start value.
    """
    chart = _NullChart(frame)
    best = objective(start)
    if frame.dim < 3:
        return start, best
    params = [chart.angles(np.asarray(k, dtype=float)) for k in start]
    vecs = [chart.vector(p) for p in params]
    width = math.pi / 2
    for _ in range(sweeps):
        for vi in range(len(params)):
            for ci in range(params[vi].size):
                base = params[vi][ci]

                def line(x, vi=vi, ci=ci):
                    trial = params[vi].copy()
                    trial[ci] = x
                    ks = list(vecs)
                    ks[vi] = chart.vector(trial)
                    return objective(tuple(ks))

                x, fx = _golden_min(line, base - width, base + width, iterations)
                if fx < best:
                    best = fx
                    params[vi][ci] = x
                    vecs[vi] = chart.vector(params[vi])
        width /= 2
    return tuple(vecs), best


def evaluate(a: np.ndarray, vectors: Sequence[np.ndarray]) -> float:
    """Full contraction a(v_1, ..., v_r) of a component array."""
    x = a
    for v in reversed(vectors):
        x = x.reshape(-1, v.size) @ v
    return float(x.reshape(()))


# ---------------------------------------------------------------- DP decisions


def _evaluate_grid(a: np.ndarray, ks: np.ndarray) -> np.ndarray:
    vals = a
    for _ in range(a.ndim):
        vals = np.tensordot(vals, ks, axes=([0], [1]))
    return vals


def _evaluate_tuples(a: np.ndarray, ks: np.ndarray, idx: np.ndarray, batch: int = 50_000) -> np.ndarray:
    n = a.shape[0]
    out = np.empty(len(idx))
    for start in range(0, len(idx), batch):
        sel = idx[start:start + batch]
        x = ks[sel[:, 0]] @ a.reshape(n, -1)
        for slot in range(1, a.ndim):
            x = x.reshape(len(sel), n, -1)
            x = np.einsum("ma,mab->mb", ks[sel[:, slot]], x)
        out[start:start + batch] = x.reshape(len(sel))
    return out


def default_sample_count(rank: int, dim: int, cap: int = MAX_TUPLES) -> int:
    per_slot = int(math.floor(cap ** (1.0 / rank) + 1e-9))
    return max(2 * (dim - 1), min(per_slot, 4096))


def check_dp_sampled(
    t: Tensor,
    sign: str = "plus",
    count: Optional[int] = None,
    seed: int = 0,
    tol: float = TOL_CLASS,
    cap: int = MAX_TUPLES,
    refine: bool = True,
) -> DPVerdict:
    """Decide ``sign * t`` in DP+ by evaluation on future null tuples.

    All tuples of the null sample are evaluated when their number fits in
    ``cap``; otherwise a full grid over a prefix of the sample plus seeded
    random tuples over the whole sample, ``cap`` evaluations in total.
    """
    r = t.rank
    if r < 1:
        raise RankZero("DP sampling needs rank >= 1")
    s = _sign_factor(sign)
    a = s * t.components
    frame = t.frame
    if count is None:
        count = default_sample_count(r, frame.dim, cap)
    ks = sample_null(frame, count, seed)
    if count**r <= cap:
        vals = _evaluate_grid(a, ks).ravel()
        tuples = None
        m = count
    else:
        m = int(math.floor((cap // 2) ** (1.0 / r) + 1e-9))
        grid = _evaluate_grid(a, ks[:m]).ravel()
        rng = np.random.default_rng(seed + 1)
        idx = rng.integers(0, count, size=(cap - m**r, r))
        vals = np.concatenate([grid, _evaluate_tuples(a, ks, idx)])
        tuples = idx
    scale = max(t.scale(), 1e-300) * float(np.max(np.abs(ks))) ** r
    i = int(np.argmin(vals))
    vmin = float(vals[i])

    def tuple_at(flat: int):
        if flat < m**r:
            return tuple(ks[j] for j in np.unravel_index(flat, (m,) * r))
        return tuple(ks[j] for j in tuples[flat - m**r])

    witness, value = tuple_at(i), vmin
    if refine:
        # local descent from the lowest few tuples catches thin violation regions
        k_starts = min(REFINE_STARTS, len(vals))
        starts = np.argpartition(vals, k_starts - 1)[:k_starts]
        for flat in starts:
            cand, cval = refine_null_tuple(frame, lambda ktup: evaluate(a, ktup), tuple_at(int(flat)))
            if cval < value:
                witness, value = cand, cval
    verdict = DPVerdict(value >= -tol * scale, sign, "sampled", float(value) / scale, samples_used=len(vals))
    if not verdict.member:
        verdict.witness = witness
        verdict.witness_value = float(value)
    return verdict


def segre_frame(t: Tensor, cluster_gap: float = 1e-7) -> Optional[SegreFrame]:
    """Eigen-orthonormal frame when the mixed form g^-1 T is real-diagonalizable
    with a timelike eigenvector; None otherwise."""
    frame = t.frame
    g = frame.metric
    s = 0.5 * (t.components + t.components.T)
    scale = t.scale()
    if scale == 0.0:
        return SegreFrame(0.0, np.zeros(frame.dim - 1), orthonormal_basis(frame))
    mixed = frame.inverse @ s
    lam = np.linalg.eigvals(mixed)
    lscale = max(float(np.max(np.abs(lam))), 1e-300)
    if np.max(np.abs(lam.imag)) > 1e-7 * lscale:
        return None
    lam = np.sort(lam.real)
    clusters = [[lam[0]]]
    for x in lam[1:]:
        if x - clusters[-1][-1] > cluster_gap * lscale:
            clusters.append([x])
        else:
            clusters[-1].append(x)
    timelike = []
    spatial = []
    for cl in clusters:
        lbar = float(np.mean(cl))
        u, sv, vt = np.linalg.svd(s - lbar * g)
        rank_tol = 1e-8 * (scale + abs(lbar) * np.max(np.abs(g)))
        null_dim = int(np.sum(sv <= rank_tol))
        if null_dim != len(cl):
            return None
        v = vt[len(sv) - null_dim:].T
        gv = v.T @ g @ v
        d, q = np.linalg.eigh(0.5 * (gv + gv.T))
        if np.min(np.abs(d)) <= 1e-8 * np.max(np.abs(d)):
            return None
        w = v @ q / np.sqrt(np.abs(d))
        for k in range(len(d)):
            (timelike if d[k] < 0 else spatial).append((lbar, w[:, k]))
    if len(timelike) != 1:
        return None
    lt, e0 = timelike[0]
    if e0 @ g @ frame.future_axis > 0:
        e0 = -e0
    spatial.sort(key=lambda pair: pair[0])
    basis = np.column_stack([e0] + [w for _, w in spatial])
    comps = basis.T @ s @ basis
    expected = np.diag([-lt] + [lw for lw, _ in spatial])
    if np.max(np.abs(comps - expected)) > 1e-8 * scale:
        return None
    return SegreFrame(float(comps[0, 0]), np.diag(comps)[1:].copy(), basis)


def check_dp2_exact(
    t: Tensor, sign: str = "plus", tol: float = TOL_CLASS, count: Optional[int] = None, seed: int = 0
) -> DPVerdict:
    """Rank-2 symmetric DP decision: mu >= |p_i| in the eigen-orthonormal frame.

    Tensors that are not of Segre type [1,1...1] fall back to sampling.
    """
    require_symmetric(t)
    sf = segre_frame(t)
    if sf is None:
        return check_dp_sampled(t, sign, count=count, seed=seed, tol=tol)
    s = _sign_factor(sign)
    mu, p = s * sf.mu, s * sf.p
    scale = max(abs(sf.mu), float(np.max(np.abs(sf.p), initial=0.0)), 1e-300)
    gaps = mu - np.abs(p)
    i = int(np.argmin(gaps))
    margin = float(gaps[i]) / scale
    verdict = DPVerdict(margin >= -tol, sign, "exact_eigen", margin)
    if not verdict.member:
        e0, ei = sf.basis[:, 0], sf.basis[:, i + 1]
        k = e0 + ei
        kk = e0 - ei if p[i] > 0 else k
        verdict.witness = (k, kk)
        verdict.witness_value = float(s * t(k, kk))
    return verdict


def square_sym2(t: Tensor) -> Tensor:
    """(T^2)_ab = T_ac g^cd T_db."""
    require_symmetric(t)
    sq = t.components @ t.frame.inverse @ t.components
    return Tensor(t.frame, 0.5 * (sq + sq.T))


# ---------------------------------------------------------------- decomposition


@dataclass
class DecompositionTerm:
    p: int
    form: Tensor
    weight: float


@dataclass
class SimpleFormDecomposition:
    terms: List[DecompositionTerm]
    eigenframe: np.ndarray
    weights: np.ndarray
    residual: float = 0.0

    def reassemble(self) -> Tensor:
        frame_dim = self.eigenframe.shape[0]
        total = None
        for term in self.terms:
            piece = superenergy(term.form)
            total = piece if total is None else total + piece
        if total is None:
            raise ValueError(f"empty decomposition in dimension {frame_dim}")
        return Tensor(total.frame, total.components)


def coframe(frame: LorentzFrame, basis: np.ndarray) -> List[Tensor]:
    """Dual 1-forms theta^a with theta^a(e_b) = delta^a_b for an orthonormal basis."""
    g = frame.metric
    out = []
    for a in range(frame.dim):
        sgn = -1.0 if a == 0 else 1.0
        out.append(covector(frame, sgn * (g @ basis[:, a])))
    return out


def is_simple(form: Tensor, tol: float = 1e-9) -> bool:
    """A nonzero p-form is simple iff its interior products span exactly p dimensions."""
    p = form.rank
    if p <= 1:
        return True
    sv = np.linalg.svd(form.components.reshape(form.dim, -1), compute_uv=False)
    return int(np.sum(sv > tol * sv[0])) == p


def decompose_dp2(t: Tensor, tol: float = TOL_CLASS) -> SimpleFormDecomposition:
    """Write a Segre [1,1...1] tensor in DP+_2 as sum_p T{Omega_p} with Omega_p simple.

    With spatial eigenvalues p_1 <= ... <= p_{N-1} and timelike value mu the
    weights are a_1 = mu + p_1, a_j = p_j - p_{j-1}, a_N = mu - p_{N-1} and
    Omega_p = sqrt(a_p) theta^0 ^ ... ^ theta^{p-1}.
    """
    require_symmetric(t)
    sf = segre_frame(t)
    if sf is None:
        raise NotDiagonalizable("tensor is not of Segre type [1,1...1]")
    verdict = check_dp2_exact(t, "plus", tol=tol)
    if not verdict.member:
        raise NotDominant(f"tensor is not in DP+ (margin {verdict.margin:.3e})")
    n = t.dim
    mu, p = sf.mu, sf.p
    alpha = np.empty(n)
    alpha[0] = mu + p[0]
    alpha[1:n - 1] = np.diff(p)
    alpha[n - 1] = mu - p[-1]
    scale = max(t.scale(), 1e-300)
    theta = coframe(t.frame, sf.basis)
    terms = []
    for k in range(n):
        if alpha[k] <= 1e-13 * scale:
            continue
        form = math.sqrt(alpha[k]) * wedge(*theta[: k + 1])
        terms.append(DecompositionTerm(k + 1, form, float(alpha[k])))
    dec = SimpleFormDecomposition(terms, sf.basis, alpha)
    if terms:
        diff = dec.reassemble().components - t.components
    else:
        diff = t.components
    dec.residual = float(np.max(np.abs(diff))) / scale
    if dec.residual > TOL_ALG:
        raise NotDiagonalizable(f"decomposition failed to reassemble (residual {dec.residual:.3e})")
    return dec


def null_factors(term: DecompositionTerm, basis: np.ndarray) -> List[Tensor]:
    """Null 1-forms k_1..k_p with k_1 ^ ... ^ k_p equal to the term's form (p >= 2).

    Uses theta^0 ^ theta^1 = -1/2 (theta^0 + theta^1) ^ (theta^0 - theta^1) and
    theta^j -> theta^j + theta^0 for the remaining factors.
    """
    if term.p < 2:
        raise ValueError("null factorization needs p >= 2")
    frame = term.form.frame
    theta = coframe(frame, basis)
    c = -0.5 * math.sqrt(term.weight)
    ks = [c * (theta[0] + theta[1]), theta[0] - theta[1]]
    ks += [theta[j] + theta[0] for j in range(2, term.p)]
    return ks


@dataclass
class NullFactors:
    coefficient: float
    factors: Tuple[Tensor, ...] = field(default_factory=tuple)


def null_factor_test(t: Tensor, tol: float = TOL_ALG) -> Optional[NullFactors]:
    """Factor T = c k_1 (x) ... (x) k_r with every k_i null, normalized k_i(e_0) = 1.

    Returns None when T is not rank-one or a factor is not null.
    """
    r = t.rank
    if r < 1:
        raise RankZero("null factor test needs rank >= 1")
    scale = t.scale()
    if scale == 0.0:
        return None
    n = t.dim
    rest = t.components
    raw = []
    for _ in range(r - 1):
        u, sv, vt = np.linalg.svd(rest.reshape(n, -1), full_matrices=False)
        if len(sv) > 1 and sv[1] > tol * sv[0]:
            return None
        raw.append(u[:, 0] * sv[0])
        rest = vt[0].reshape((n,) * (rest.ndim - 1))
    raw.append(np.asarray(rest).reshape(n))
    rebuilt = raw[0]
    for k in raw[1:]:
        rebuilt = np.multiply.outer(rebuilt, k)
    if np.max(np.abs(rebuilt - t.components)) > tol * scale:
        return None
    frame = t.frame
    axis = frame.future_axis / math.sqrt(-frame.g(frame.future_axis, frame.future_axis))
    coeff = 1.0
    factors = []
    for k in raw:
        knorm = float(k @ frame.inverse @ k)
        if abs(knorm) > tol * float(k @ k):
            return None
        ke0 = float(k @ axis)
        coeff *= ke0
        factors.append(covector(frame, k / ke0))
    return NullFactors(coeff, tuple(factors))
