"""r-fold forms, their multiple Hodge duals and the basic superenergy tensor.

A rank-m tensor is viewed, after a slot permutation, as an element of
Lambda_{n_1} (x) ... (x) Lambda_{n_r}.  The superenergy tensor is

    T{A} = 1/2 * sum over the 2^r duals A_P of  A_P (.) A_P

where (.) contracts the interior products of each block, scaled by
prod 1/(n_i - 1)!.
"""

from __future__ import annotations

import math
import string
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (
    ArityMismatch,
    FoldTooLarge,
    NotAntisymmetric,
    RankZero,
    StructureMismatch,
    UnsupportedNBlock,
    ZeroTensor,
)
from .lorentz import TOL_ALG, LorentzFrame, Tensor, metric_tensor, raise_all, volume_form

MAX_FOLDS = 4


@dataclass(frozen=True)
class BlockStructure:
    """Block degrees plus the slot permutation producing the block-contiguous tensor.

    Slot k of the permuted tensor is slot ``permutation[k]`` of the original.
    """

    degrees: tuple
    permutation: tuple

    def __post_init__(self):
        object.__setattr__(self, "degrees", tuple(int(d) for d in self.degrees))
        object.__setattr__(self, "permutation", tuple(int(p) for p in self.permutation))
        if sorted(self.permutation) != list(range(len(self.permutation))):
            raise StructureMismatch(f"{self.permutation} is not a permutation")
        if sum(self.degrees) != len(self.permutation):
            raise StructureMismatch("block degrees do not sum to the rank")
        if any(d < 1 for d in self.degrees):
            raise StructureMismatch("block degrees must be >= 1")

    @classmethod
    def contiguous(cls, degrees: Sequence[int]) -> "BlockStructure":
        return cls(tuple(degrees), tuple(range(sum(degrees))))

    @property
    def r(self) -> int:
        return len(self.degrees)

    @property
    def starts(self) -> tuple:
        out, s = [], 0
        for d in self.degrees:
            out.append(s)
            s += d
        return tuple(out)

    def blocks(self) -> list:
        """Original slot indices of each block, in block order."""
        return [self.permutation[s:s + d] for s, d in zip(self.starts, self.degrees)]


@dataclass(frozen=True)
class DualIndex:
    """Which blocks are dualized: P = 1 + sum_i 2^(i-1) eps_i."""

    P: int
    bits: tuple

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "DualIndex":
        bits = tuple(int(b) for b in bits)
        if any(b not in (0, 1) for b in bits):
            raise ValueError("dual bits must be 0 or 1")
        return cls(1 + sum(b << i for i, b in enumerate(bits)), bits)

    @classmethod
    def from_index(cls, P: int, r: int) -> "DualIndex":
        if not 1 <= P <= 2**r:
            raise ValueError(f"P={P} outside 1..{2**r}")
        return cls(P, tuple(((P - 1) >> i) & 1 for i in range(r)))


def _antisymmetric_pair(a: np.ndarray, i: int, j: int, atol: float) -> bool:
    return bool(np.max(np.abs(a + np.swapaxes(a, i, j))) <= atol)


def _block_violation(a: np.ndarray, structure: BlockStructure) -> float:
    """Largest |A + A with two adjacent slots of one block swapped| in the folded layout."""
    worst = 0.0
    for s, d in zip(structure.starts, structure.degrees):
        for k in range(s, s + d - 1):
            worst = max(worst, float(np.max(np.abs(a + np.swapaxes(a, k, k + 1)))))
    return worst


@dataclass(frozen=True, eq=False)
class FoldedForm:
    tensor: Tensor
    structure: BlockStructure
    tol: Optional[float] = None
    folded: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        t, st = self.tensor, self.structure
        if t.rank == 0:
            raise RankZero("a folded form needs rank >= 1")
        if not t.is_covariant:
            raise StructureMismatch("folded forms are covariant")
        if len(st.permutation) != t.rank:
            raise StructureMismatch(f"structure covers {len(st.permutation)} slots, tensor has {t.rank}")
        if any(d > t.dim for d in st.degrees):
            raise StructureMismatch(f"block degree above dimension {t.dim}")
        a = np.transpose(t.components, st.permutation)
        tol = TOL_ALG if self.tol is None else self.tol
        if _block_violation(a, st) > tol * max(t.scale(), 1e-300):
            raise NotAntisymmetric("tensor is not antisymmetric within its blocks")
        a.setflags(write=False)
        object.__setattr__(self, "folded", a)

    @property
    def frame(self) -> LorentzFrame:
        return self.tensor.frame

    @property
    def degrees(self) -> tuple:
        return self.structure.degrees

    @property
    def r(self) -> int:
        return self.structure.r

    def folded_tensor(self) -> Tensor:
        return Tensor(self.frame, self.folded)

    @classmethod
    def contiguous(cls, tensor: Tensor, degrees: Sequence[int]) -> "FoldedForm":
        return cls(tensor, BlockStructure.contiguous(degrees))


def detect_blocks(a: Tensor, tol: Optional[float] = None, zero_ok: bool = False) -> BlockStructure:
    """Minimal antisymmetric block structure of ``a``.

    Slots i, j are joined when swapping them negates the tensor; connected
    components of that graph are the blocks.  Zero tensors raise unless
    ``zero_ok`` is set, in which case every slot is its own block.
    """
    if a.rank == 0:
        raise RankZero("rank-0 tensors have no block structure")
    scale = a.scale()
    if scale == 0.0:
        if not zero_ok:
            raise ZeroTensor("block structure of the zero tensor is ambiguous")
        return BlockStructure.contiguous((1,) * a.rank)
    atol = (1e-9 if tol is None else tol) * scale
    m = a.rank
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(m):
        for j in range(i + 1, m):
            if find(i) != find(j) and _antisymmetric_pair(a.components, i, j, atol):
                parent[find(j)] = find(i)
    groups: dict = {}
    for i in range(m):
        groups.setdefault(find(i), []).append(i)
    blocks = sorted(groups.values(), key=min)
    perm = tuple(i for b in blocks for i in b)
    return BlockStructure(tuple(len(b) for b in blocks), perm)


def fold(a: Union[Tensor, FoldedForm], structure: Optional[BlockStructure] = None) -> FoldedForm:
    if isinstance(a, FoldedForm):
        return a
    if structure is None:
        structure = detect_blocks(a, zero_ok=True)
    return FoldedForm(a, structure)


def interior_contraction(a: FoldedForm, vectors: Sequence) -> Tensor:
    """Contract vector i into the first slot of block i of the folded tensor."""
    if len(vectors) != a.r:
        raise ArityMismatch(f"{a.r} blocks need {a.r} vectors, got {len(vectors)}")
    arr = a.folded
    for s, x in reversed(list(zip(a.structure.starts, vectors))):
        arr = np.tensordot(arr, np.asarray(x, dtype=float), axes=([s], [0]))
    return Tensor(a.frame, arr)


def _eta_leading_raised(frame: LorentzFrame, n: int) -> np.ndarray:
    eta = volume_form(frame).components
    for k in range(n):
        eta = np.moveaxis(np.tensordot(frame.inverse, eta, axes=(1, k)), 0, k)
    return eta


def _dual_block(arr: np.ndarray, frame: LorentzFrame, start: int, n: int) -> np.ndarray:
    eta_up = _eta_leading_raised(frame, n)
    out = np.tensordot(arr, eta_up, axes=(list(range(start, start + n)), list(range(n))))
    out = out / math.factorial(n)
    new = frame.dim - n
    tail = list(range(out.ndim - new, out.ndim))
    return np.moveaxis(out, tail, list(range(start, start + new)))


def _dual_arrays(a: FoldedForm, bits) -> Tuple[np.ndarray, list]:
    n = a.frame.dim
    arr = a.folded
    degrees = list(a.degrees)
    starts = a.structure.starts
    for i in reversed(range(a.r)):
        if bits[i]:
            arr = _dual_block(arr, a.frame, starts[i], degrees[i])
            degrees[i] = n - degrees[i]
    if any(k == 0 for k in degrees):
        raise UnsupportedNBlock("dualizing a degree-N block leaves a scalar block")
    return arr, degrees


def hodge_dual(a: FoldedForm, P: Union[DualIndex, int]) -> FoldedForm:
    """The multiple Hodge dual A_P: every block with eps_i = 1 replaced by its dual.

    The result is returned in block-contiguous layout.
    """
    d = P if isinstance(P, DualIndex) else DualIndex.from_index(P, a.r)
    if len(d.bits) != a.r:
        raise StructureMismatch(f"dual index has {len(d.bits)} bits for {a.r} blocks")
    if d.P == 1:
        return a
    arr, degrees = _dual_arrays(a, d.bits)
    return FoldedForm(Tensor(a.frame, arr), BlockStructure.contiguous(degrees), tol=1e-7)


_LETTERS = string.ascii_letters


def _odot_arrays(frame: LorentzFrame, fa: np.ndarray, fb: np.ndarray, degrees: Sequence[int]) -> np.ndarray:
    # both arrays block-contiguous; raise every non-leading slot of each block of fb
    r = len(degrees)
    bb = fb
    s = 0
    for d in degrees:
        for k in range(s + 1, s + d):
            bb = np.moveaxis(np.tensordot(frame.inverse, bb, axes=(1, k)), 0, k)
        s += d
    letters = iter(_LETTERS)
    xs = [next(letters) for _ in range(r)]
    ys = [next(letters) for _ in range(r)]
    sub_a, sub_b = [], []
    for i, d in enumerate(degrees):
        rest = [next(letters) for _ in range(d - 1)]
        sub_a += [xs[i]] + rest
        sub_b += [ys[i]] + rest
    out_sub = "".join(x + y for x, y in zip(xs, ys))
    expr = f"{''.join(sub_a)},{''.join(sub_b)}->{out_sub}"
    out = np.einsum(expr, fa, bb, optimize=True)
    factor = 1.0
    for d in degrees:
        factor /= math.factorial(d - 1)
    return factor * out


def odot(a: FoldedForm, b: FoldedForm) -> Tensor:
    """(A . B)(x1, y1, ..., xr, yr) = prod 1/(n_i-1)! g(i_x A, i_y B)."""
    if a.degrees != b.degrees:
        raise StructureMismatch(f"block degrees differ: {a.degrees} vs {b.degrees}")
    if not a.frame.same_as(b.frame):
        raise StructureMismatch("folded forms live on different frames")
    return Tensor(a.frame, _odot_arrays(a.frame, a.folded, b.folded, a.degrees))


class SuperenergyTensor(Tensor):
    """Rank-2r tensor produced by :func:`superenergy`; ``folds`` is r."""

    def __init__(self, frame: LorentzFrame, components, folds: int):
        super().__init__(frame, components)
        object.__setattr__(self, "folds", int(folds))


def superenergy_nform(f: float, frame: LorentzFrame) -> Tensor:
    """Superenergy tensor of the N-form f * eta, namely -f^2 g / 2."""
    return Tensor(frame, -0.5 * float(f) ** 2 * frame.metric)


def superenergy(a: Union[Tensor, FoldedForm], structure: Optional[BlockStructure] = None) -> SuperenergyTensor:
    """Basic superenergy tensor T{A}, summing duals in ascending P."""
    ff = fold(a, structure)
    frame = ff.frame
    n = frame.dim
    if ff.r > MAX_FOLDS:
        raise FoldTooLarge(f"{ff.r}-fold form above the cap of {MAX_FOLDS}")
    if ff.r == 1 and ff.degrees[0] == n:
        eta0 = volume_form(frame).components[tuple(range(n))]
        f = ff.folded[tuple(range(n))] / eta0
        return SuperenergyTensor(frame, superenergy_nform(f, frame).components, 1)
    if any(d == n for d in ff.degrees):
        raise UnsupportedNBlock("degree-N blocks inside multi-fold forms are not supported")
    total = np.zeros((n,) * (2 * ff.r))
    # duals stay raw arrays: an intermediate may exceed the rank cap (three 1-blocks in N = 4)
    for P in range(1, 2**ff.r + 1):
        arr, degrees = _dual_arrays(ff, DualIndex.from_index(P, ff.r).bits)
        total += _odot_arrays(frame, arr, arr, degrees)
    return SuperenergyTensor(frame, 0.5 * total, ff.r)


def superenergy_pform_closed(omega: Tensor) -> Tensor:
    """Closed form for a single p-form:

    T(x, y) = 1/(p-1)! [ g(i_x W, i_y W) - g(W, W) g(x, y) / (2p) ].
    """
    p = omega.rank
    frame = omega.frame
    if not 1 <= p <= frame.dim:
        raise NotAntisymmetric(f"a p-form needs 1 <= p <= {frame.dim}, got rank {p}")
    FoldedForm.contiguous(omega, (p,))  # validates antisymmetry
    w = omega.components
    wr = w
    for k in range(1, p):
        wr = np.moveaxis(np.tensordot(frame.inverse, wr, axes=(1, k)), 0, k)
    inner = np.tensordot(w, wr, axes=(list(range(1, p)), list(range(1, p)))) if p > 1 else np.multiply.outer(w, w)
    norm = float(np.sum(w * raise_all(omega)))
    t = (inner - norm / (2 * p) * frame.metric) / math.factorial(p - 1)
    return Tensor(frame, t)


def independent_square_sum(a: FoldedForm, basis: Optional[np.ndarray] = None) -> float:
    """Sum of squared components over strictly increasing index tuples in each block.

    Components are taken in ``basis`` (columns) when given, else in the frame's coordinates.
    """
    arr = a.folded
    if basis is not None:
        for k in range(arr.ndim):
            arr = np.moveaxis(np.tensordot(basis, arr, axes=(0, k)), 0, k)
    mask = np.ones(arr.shape, dtype=bool)
    idx = np.indices(arr.shape)
    for s, d in zip(a.structure.starts, a.degrees):
        for k in range(s, s + d - 1):
            mask &= idx[k] < idx[k + 1]
    return float(np.sum(arr[mask] ** 2))


def metric_as_form(frame: LorentzFrame) -> FoldedForm:
    """The metric viewed as a double (1,1)-form."""
    return FoldedForm.contiguous(metric_tensor(frame), (1, 1))
