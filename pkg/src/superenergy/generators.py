"""Random test data: frames, forms, causal tensors, jump data and accepted pullbacks.

Everything takes a ``numpy.random.Generator`` so corpora are reproducible.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence, Tuple

import numpy as np

from .forms import BlockStructure, FoldedForm
from .lorentz import LorentzFrame, Tensor, covector, make_frame, minkowski, orthonormal_basis, outer, wedge
from .wavefront import JumpData


def minkowski_metric(dim: int) -> np.ndarray:
    eta = np.eye(dim)
    eta[0, 0] = -1.0
    return eta


def random_rotation(rng: np.random.Generator, k: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((k, k)))
    return q * np.sign(np.diag(r))


def random_lorentz(rng: np.random.Generator, dim: int, max_rapidity: float = 1.0) -> np.ndarray:
    """Orthochronous Lorentz matrix: rotation, boost along x^1, rotation."""
    boost = np.eye(dim)
    chi = rng.uniform(-max_rapidity, max_rapidity)
    boost[0, 0] = boost[1, 1] = math.cosh(chi)
    boost[0, 1] = boost[1, 0] = math.sinh(chi)
    r1 = np.eye(dim)
    r2 = np.eye(dim)
    r1[1:, 1:] = random_rotation(rng, dim - 1)
    r2[1:, 1:] = random_rotation(rng, dim - 1)
    return r1 @ boost @ r2


def random_orthonormal_basis(rng: np.random.Generator, frame: LorentzFrame, max_rapidity: float = 1.0) -> np.ndarray:
    """Columns e_0 (future) ... e_{N-1}, orthonormal for the frame metric."""
    return orthonormal_basis(frame) @ random_lorentz(rng, frame.dim, max_rapidity)


def random_frame(rng: np.random.Generator, dim: int, general: bool = True) -> LorentzFrame:
    """Minkowski, or a well-conditioned general Lorentzian metric A^T eta A."""
    if not general:
        return minkowski(dim)
    a = np.eye(dim) + 0.3 * rng.standard_normal((dim, dim))
    while abs(np.linalg.det(a)) < 0.2:
        a = np.eye(dim) + 0.3 * rng.standard_normal((dim, dim))
    metric = a.T @ minkowski_metric(dim) @ a
    future = np.linalg.solve(a, np.eye(dim)[0])
    return make_frame(dim, 0.5 * (metric + metric.T), future_axis=future)


def random_covector(rng: np.random.Generator, frame: LorentzFrame) -> Tensor:
    return covector(frame, rng.standard_normal(frame.dim))


def random_form(rng: np.random.Generator, frame: LorentzFrame, p: int) -> Tensor:
    """Generic p-form: a sum of a few random wedge products."""
    terms = [wedge(*[random_covector(rng, frame) for _ in range(p)]) for _ in range(3)]
    out = terms[0]
    for t in terms[1:]:
        out = out + t
    return out


def random_simple_form(rng: np.random.Generator, frame: LorentzFrame, p: int) -> Tensor:
    return wedge(*[random_covector(rng, frame) for _ in range(p)])


def random_folded(rng: np.random.Generator, frame: LorentzFrame, degrees: Sequence[int], decomposable: bool = False) -> FoldedForm:
    """A block-contiguous r-fold form; decomposable ones are outer products of forms."""
    pieces = [random_form(rng, frame, d) for d in degrees]
    t = outer(*pieces)
    if not decomposable:
        t = t + outer(*[random_form(rng, frame, d) for d in degrees])
    return FoldedForm(t, BlockStructure.contiguous(tuple(degrees)))


def random_future_null(rng: np.random.Generator, frame: LorentzFrame) -> np.ndarray:
    basis = random_orthonormal_basis(rng, frame)
    w = rng.standard_normal(frame.dim - 1)
    w /= np.linalg.norm(w)
    return basis @ np.concatenate([[1.0], w]) * rng.uniform(0.5, 2.0)


def random_dp2_plus(rng: np.random.Generator, frame: LorentzFrame, max_rapidity: float = 1.0) -> Tuple[Tensor, float, np.ndarray]:
    """Symmetric T with eigen-orthonormal components diag(mu, p_i), mu >= |p_i|.

    Returns (T, mu, p).
    """
    basis = random_orthonormal_basis(rng, frame, max_rapidity)
    n = frame.dim
    mu = rng.uniform(0.5, 2.0)
    p = rng.uniform(-mu, mu, size=n - 1)
    coframe = np.linalg.inv(basis)  # rows theta^a
    comps = coframe.T @ np.diag(np.concatenate([[mu], p])) @ coframe
    return Tensor(frame, 0.5 * (comps + comps.T)), mu, p


def random_symmetric(rng: np.random.Generator, frame: LorentzFrame) -> Tensor:
    """Mix of DP+ members, DP- members and indefinite tensors, all Segre [1,1...1]."""
    basis = random_orthonormal_basis(rng, frame)
    n = frame.dim
    mu = rng.uniform(-2.0, 2.0)
    p = rng.uniform(-2.0, 2.0, size=n - 1)
    coframe = np.linalg.inv(basis)
    comps = coframe.T @ np.diag(np.concatenate([[mu], p])) @ coframe
    return Tensor(frame, 0.5 * (comps + comps.T))


def random_jump(rng: np.random.Generator, frame: LorentzFrame) -> JumpData:
    """Jump data satisfying the null-hypersurface constraints.

    B = S + n (x) v + v (x) n + kappa n (x) n with S trace-free on the
    screen and v orthogonal to n; f and c are orthogonal to n.
    """
    n_dim = frame.dim
    g = frame.metric
    basis = random_orthonormal_basis(rng, frame)
    coframe = np.linalg.inv(basis)  # rows theta^a
    nv = basis[:, 0] + basis[:, 1]
    scale = rng.uniform(0.5, 2.0)
    n = covector(frame, scale * (g @ nv))
    screen = coframe[2:]  # theta^2 ... lie in the screen

    def transverse():
        comp = rng.standard_normal(n_dim - 2) @ screen
        return comp + rng.standard_normal() * n.components

    c = covector(frame, transverse())
    f = covector(frame, transverse())
    s_small = rng.standard_normal((n_dim - 2, n_dim - 2))
    s_small = s_small + s_small.T
    s_small -= np.trace(s_small) / (n_dim - 2) * np.eye(n_dim - 2)
    s = screen.T @ s_small @ screen
    v = transverse()
    kappa = rng.standard_normal()
    nn = n.components
    b = s + np.outer(nn, v) + np.outer(v, nn) + kappa * np.outer(nn, nn)
    return JumpData(n, c, Tensor(frame, b), f)


def factor_lorentzian(m: np.ndarray) -> np.ndarray:
    """B with m = B^T eta B, time row first."""
    d, q = np.linalg.eigh(0.5 * (m + m.T))
    order = np.argsort(d)
    d, q = d[order], q[:, order]
    if d[0] >= 0 or np.any(d[1:] <= 0):
        raise ValueError("matrix is not Lorentzian")
    return np.diag(np.sqrt(np.abs(d))) @ q.T


def random_accepted_pullback(
    rng: np.random.Generator,
    base: LorentzFrame,
    target: Optional[LorentzFrame] = None,
    flip_probability: float = 0.0,
) -> Tuple[np.ndarray, LorentzFrame]:
    """Jacobian J with J^T h J in DP2- relative to the base metric.

    The pullback is built as K = diag(-mu, q_i) in a random g-orthonormal
    basis with 0 < q_i <= mu, then J = A^-1 L B where h = A^T eta A,
    K = B^T eta B and L is a random Lorentz matrix.
    """
    n = base.dim
    if target is None:
        target = random_frame(rng, n)
    basis = random_orthonormal_basis(rng, base)
    coframe = np.linalg.inv(basis)
    mu = rng.uniform(0.5, 2.0)
    q = rng.uniform(0.05, 1.0, size=n - 1) * mu
    k = coframe.T @ np.diag(np.concatenate([[-mu], q])) @ coframe
    a = factor_lorentzian(target.metric)
    b = factor_lorentzian(k)
    lam = random_lorentz(rng, n)
    if rng.uniform() < flip_probability:
        lam = -lam
    j = np.linalg.solve(a, lam @ b)
    return j, target
