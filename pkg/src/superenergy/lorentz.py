"""Dense covariant tensors over an N-dimensional Lorentzian vector space.

Signature is mostly plus, (-,+,...,+). Tensors store every slot covariant
unless an explicit :func:`metric_dual` has raised one; slot indices are
0-based throughout.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    CapExceeded,
    DegenerateMetric,
    FrameMismatch,
    NonTimelikeFutureAxis,
    RankMismatch,
    SlotOutOfRange,
    WrongSignature,
)

TOL_CLASS = 1e-10
TOL_ALG = 1e-9
MAX_RANK = 8
MAX_DIM = 6


@dataclass(frozen=True, eq=False)
class LorentzFrame:
    """Metric components plus time orientation for one tangent space."""

    dim: int
    metric: np.ndarray
    orientation: int = 1
    future_axis: Optional[np.ndarray] = None
    inverse: np.ndarray = field(init=False, repr=False)
    sqrt_det: float = field(init=False, repr=False)

    def __post_init__(self):
        n = int(self.dim)
        if n < 2:
            raise WrongSignature(f"dimension must be >= 2, got {n}")
        if n > MAX_DIM:
            raise CapExceeded(f"dimension {n} above cap {MAX_DIM}")
        g = np.array(self.metric, dtype=float)
        if g.shape != (n, n):
            raise WrongSignature(f"metric shape {g.shape} does not match dim {n}")
        scale = np.max(np.abs(g))
        if not np.allclose(g, g.T, rtol=0.0, atol=TOL_ALG * max(scale, 1.0)):
            raise WrongSignature("metric is not symmetric")
        g = 0.5 * (g + g.T)
        det = np.linalg.det(g)
        if scale == 0.0 or abs(det) <= 1e-12 * scale**n:
            raise DegenerateMetric(f"|det g| = {abs(det):.3e} is below tolerance")
        eig = np.linalg.eigvalsh(g)
        if np.sum(eig < 0) != 1 or np.sum(eig > 0) != n - 1:
            raise WrongSignature(f"metric eigenvalue signs {np.sign(eig)} are not (-,+,...,+)")
        if self.orientation not in (1, -1):
            raise ValueError("orientation must be +1 or -1")
        u = np.zeros(n) if self.future_axis is None else np.array(self.future_axis, dtype=float)
        if self.future_axis is None:
            u[0] = 1.0
        if u.shape != (n,) or u @ g @ u >= -TOL_CLASS * scale * max(np.max(np.abs(u)) ** 2, 1e-300):
            raise NonTimelikeFutureAxis(f"future axis {u} is not timelike")
        g.setflags(write=False)
        u.setflags(write=False)
        inv = np.linalg.inv(g)
        inv = 0.5 * (inv + inv.T)
        inv.setflags(write=False)
        object.__setattr__(self, "dim", n)
        object.__setattr__(self, "metric", g)
        object.__setattr__(self, "future_axis", u)
        object.__setattr__(self, "inverse", inv)
        object.__setattr__(self, "sqrt_det", math.sqrt(abs(det)))

    def same_as(self, other: "LorentzFrame") -> bool:
        return self is other or (
            self.dim == other.dim
            and self.orientation == other.orientation
            and np.array_equal(self.metric, other.metric)
            and np.array_equal(self.future_axis, other.future_axis)
        )

    def g(self, u, v) -> float:
        """Inner product of two contravariant vectors."""
        return float(np.asarray(u, dtype=float) @ self.metric @ np.asarray(v, dtype=float))


def make_frame(dim: int, metric=None, future_axis=None, orientation: int = 1) -> LorentzFrame:
    """Validated frame; Minkowski diag(-1,1,...,1) when no metric is given."""
    if metric is None:
        metric = np.diag([-1.0] + [1.0] * (int(dim) - 1))
    return LorentzFrame(dim, metric, orientation, future_axis)


def minkowski(dim: int = 4) -> LorentzFrame:
    return make_frame(dim)


@dataclass(frozen=True, eq=False)
class Tensor:
    """Dense component array with one frame; slots covariant unless ``upper`` says otherwise."""

    frame: LorentzFrame
    components: np.ndarray
    upper: tuple = ()

    def __post_init__(self):
        a = np.array(self.components, dtype=float)
        n = self.frame.dim
        if a.ndim > MAX_RANK:
            raise CapExceeded(f"rank {a.ndim} above cap {MAX_RANK}")
        if a.shape != (n,) * a.ndim:
            raise RankMismatch(f"component shape {a.shape} is not ({n},)*rank")
        a.setflags(write=False)
        up = tuple(bool(x) for x in self.upper) if self.upper else (False,) * a.ndim
        if len(up) != a.ndim:
            raise RankMismatch("variance tuple length differs from rank")
        object.__setattr__(self, "components", a)
        object.__setattr__(self, "upper", up)

    @classmethod
    def from_flat(cls, frame: LorentzFrame, flat, rank: int) -> "Tensor":
        flat = np.asarray(flat, dtype=float).ravel()
        if flat.size != frame.dim**rank:
            raise RankMismatch(f"{flat.size} components cannot form a rank-{rank} tensor in dim {frame.dim}")
        return cls(frame, flat.reshape((frame.dim,) * rank))

    @property
    def rank(self) -> int:
        return self.components.ndim

    @property
    def dim(self) -> int:
        return self.frame.dim

    @property
    def is_covariant(self) -> bool:
        return not any(self.upper)

    def scale(self) -> float:
        return float(np.max(np.abs(self.components))) if self.components.size else 0.0

    def _check(self, other: "Tensor"):
        if not self.frame.same_as(other.frame):
            raise FrameMismatch("tensors live on different frames")
        if self.rank != other.rank or self.upper != other.upper:
            raise RankMismatch(f"rank/variance mismatch: {self.rank} vs {other.rank}")

    def __add__(self, other: "Tensor") -> "Tensor":
        self._check(other)
        return Tensor(self.frame, self.components + other.components, self.upper)

    def __sub__(self, other: "Tensor") -> "Tensor":
        self._check(other)
        return Tensor(self.frame, self.components - other.components, self.upper)

    def __neg__(self) -> "Tensor":
        return Tensor(self.frame, -self.components, self.upper)

    def __mul__(self, c) -> "Tensor":
        return Tensor(self.frame, float(c) * self.components, self.upper)

    __rmul__ = __mul__

    def __truediv__(self, c) -> "Tensor":
        return Tensor(self.frame, self.components / float(c), self.upper)

    def __call__(self, *vectors) -> float:
        """Evaluate a covariant tensor on contravariant vectors."""
        if len(vectors) != self.rank:
            raise RankMismatch(f"expected {self.rank} arguments, got {len(vectors)}")
        out = self.components
        for v in vectors:
            out = np.tensordot(np.asarray(v, dtype=float), out, axes=(0, 0))
        return float(out)

    def outer(self, other: "Tensor") -> "Tensor":
        if not self.frame.same_as(other.frame):
            raise FrameMismatch("tensors live on different frames")
        return Tensor(self.frame, np.multiply.outer(self.components, other.components), self.upper + other.upper)

    def permute(self, order: Sequence[int]) -> "Tensor":
        """Tensor whose slot k is slot ``order[k]`` of this one."""
        order = tuple(order)
        return Tensor(self.frame, np.transpose(self.components, order), tuple(self.upper[i] for i in order))

    def swap(self, i: int, j: int) -> "Tensor":
        order = list(range(self.rank))
        order[i], order[j] = order[j], order[i]
        return self.permute(order)

    def allclose(self, other: "Tensor", rtol: float = TOL_ALG, atol: float = 0.0) -> bool:
        self._check(other)
        s = max(self.scale(), other.scale(), 1e-300)
        return bool(np.max(np.abs(self.components - other.components), initial=0.0) <= rtol * s + atol)

    def __repr__(self):
        return f"Tensor(rank={self.rank}, dim={self.dim}, components={self.components.tolist()!r})"


def outer(*tensors: Tensor) -> Tensor:
    out = tensors[0]
    for t in tensors[1:]:
        out = out.outer(t)
    return out


def zeros(frame: LorentzFrame, rank: int) -> Tensor:
    return Tensor(frame, np.zeros((frame.dim,) * rank))


def scalar(frame: LorentzFrame, value: float) -> Tensor:
    return Tensor(frame, np.array(float(value)))


def covector(frame: LorentzFrame, components) -> Tensor:
    return Tensor(frame, np.asarray(components, dtype=float))


def basis_covector(frame: LorentzFrame, i: int) -> Tensor:
    """The coordinate 1-form dx^i."""
    c = np.zeros(frame.dim)
    c[i] = 1.0
    return Tensor(frame, c)


def metric_tensor(frame: LorentzFrame) -> Tensor:
    return Tensor(frame, frame.metric)


def lower(frame: LorentzFrame, v) -> Tensor:
    """Covector g(v, .) of a contravariant vector."""
    return Tensor(frame, frame.metric @ np.asarray(v, dtype=float))


def raise_covector(t: Tensor) -> np.ndarray:
    """Contravariant components g^{-1}(t, .) of a 1-form."""
    if t.rank != 1:
        raise RankMismatch("raise_covector needs a rank-1 tensor")
    return t.frame.inverse @ t.components


def wedge(*forms: Tensor) -> Tensor:
    """Exterior product of 1-forms, determinant convention: (a^b)_{01} = a_0 b_1 - a_1 b_0."""
    if not forms:
        raise RankMismatch("wedge of nothing")
    frame = forms[0].frame
    for f in forms:
        if f.rank != 1:
            raise RankMismatch("wedge takes 1-forms")
        if not f.frame.same_as(frame):
            raise FrameMismatch("1-forms live on different frames")
    p = len(forms)
    out = np.zeros((frame.dim,) * p)
    for perm in itertools.permutations(range(p)):
        term = forms[perm[0]].components
        for k in perm[1:]:
            term = np.multiply.outer(term, forms[k].components)
        out += permutation_sign(perm) * term
    return Tensor(frame, out)


def permutation_sign(perm: Sequence[int]) -> int:
    perm = list(perm)
    sign = 1
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


@dataclass(frozen=True)
class CausalClass:
    kind: str  # timelike | null | spacelike | zero
    time_orientation: str  # future | past | n/a


def classify_vector(frame: LorentzFrame, v, tol: float = TOL_CLASS) -> CausalClass:
    """Causal character and time orientation of a contravariant vector."""
    v = np.asarray(v, dtype=float)
    if v.shape != (frame.dim,):
        raise RankMismatch(f"vector must have {frame.dim} components")
    vmax = np.max(np.abs(v))
    if vmax == 0.0:
        return CausalClass("zero", "n/a")
    scale = vmax**2 * np.max(np.abs(frame.metric))
    norm = float(v @ frame.metric @ v)
    if norm > tol * scale:
        return CausalClass("spacelike", "n/a")
    kind = "timelike" if norm < -tol * scale else "null"
    pairing = float(v @ frame.metric @ frame.future_axis)
    return CausalClass(kind, "future" if pairing < 0 else "past")


def metric_dual(t: Tensor, slot: int) -> Tensor:
    """Raise slot ``slot`` if it is covariant, lower it if contravariant."""
    if not 0 <= slot < t.rank:
        raise SlotOutOfRange(f"slot {slot} outside rank {t.rank}")
    m = t.frame.metric if t.upper[slot] else t.frame.inverse
    a = np.moveaxis(np.tensordot(m, t.components, axes=(1, slot)), 0, slot)
    up = list(t.upper)
    up[slot] = not up[slot]
    return Tensor(t.frame, a, tuple(up))


def _pairing(frame: LorentzFrame, up1: bool, up2: bool) -> np.ndarray:
    if up1 and up2:
        return frame.metric
    if not up1 and not up2:
        return frame.inverse
    return np.eye(frame.dim)


def contract_ij(t1: Tensor, i: int, t2: Tensor, j: int) -> Tensor:
    """Metric contraction of slot ``i`` of ``t1`` with slot ``j`` of ``t2``.

    Result slots are the remaining slots of ``t1`` followed by those of ``t2``.
    """
    if not t1.frame.same_as(t2.frame):
        raise FrameMismatch("tensors live on different frames")
    if not 0 <= i < t1.rank:
        raise SlotOutOfRange(f"slot {i} outside rank {t1.rank}")
    if not 0 <= j < t2.rank:
        raise SlotOutOfRange(f"slot {j} outside rank {t2.rank}")
    m = _pairing(t1.frame, t1.upper[i], t2.upper[j])
    left = np.moveaxis(t1.components, i, -1) @ m
    out = np.tensordot(left, t2.components, axes=(left.ndim - 1, j))
    up = t1.upper[:i] + t1.upper[i + 1:] + t2.upper[:j] + t2.upper[j + 1:]
    return Tensor(t1.frame, out, up)


def inner_full(b1: Tensor, b2: Tensor) -> float:
    """Complete contraction of two tensors, slot k against slot k."""
    if not b1.frame.same_as(b2.frame):
        raise FrameMismatch("tensors live on different frames")
    if b1.rank != b2.rank:
        raise RankMismatch(f"ranks differ: {b1.rank} vs {b2.rank}")
    a = b2.components
    for k in range(b2.rank):
        m = _pairing(b1.frame, b1.upper[k], b2.upper[k])
        a = np.moveaxis(np.tensordot(m, a, axes=(1, k)), 0, k)
    return float(np.sum(b1.components * a))


def raise_all(t: Tensor) -> np.ndarray:
    """Fully contravariant components of a covariant tensor."""
    a = t.components
    for k in range(t.rank):
        a = np.moveaxis(np.tensordot(t.frame.inverse, a, axes=(1, k)), 0, k)
    return a


def levi_civita_symbol(n: int) -> np.ndarray:
    eps = np.zeros((n,) * n)
    for perm in itertools.permutations(range(n)):
        eps[perm] = permutation_sign(perm)
    return eps


def volume_form(frame: LorentzFrame) -> Tensor:
    """Canonical volume element, eta_{01...N-1} = orientation * sqrt|det g|."""
    return Tensor(frame, frame.orientation * frame.sqrt_det * levi_civita_symbol(frame.dim))


def orthonormal_basis(frame: LorentzFrame) -> np.ndarray:
    """Columns e_0..e_{N-1}: e_0 is the unit future axis, the rest span its orthogonal complement.

    Built by Gram-Schmidt against the coordinate axes, so Minkowski frames
    return the identity.
    """
    g = frame.metric
    n = frame.dim
    u = frame.future_axis
    e0 = u / math.sqrt(-(u @ g @ u))
    basis = [e0]
    for k in range(n):
        w = np.zeros(n)
        w[k] = 1.0
        for b in basis:
            w = w - (w @ g @ b) / (b @ g @ b) * b
        norm = w @ g @ w
        if norm > 1e-8 * np.max(np.abs(g)):
            basis.append(w / math.sqrt(norm))
        if len(basis) == n:
            break
    return np.column_stack(basis)


def components_in_basis(t: Tensor, basis: np.ndarray) -> np.ndarray:
    """Values T(e_a1, ..., e_am) for the basis vectors given as columns."""
    a = t.components
    for k in range(t.rank):
        a = np.moveaxis(np.tensordot(basis, a, axes=(0, k)), 0, k)
    return a
