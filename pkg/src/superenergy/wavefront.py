"""Transport of field discontinuities along the generators of a null hypersurface.

Each generator carries its own geometry: the expansion theta(t), the
non-affinity Psi(t) (grad_n n = Psi n), and Killing contractions n(zeta_i)(t).
These may be sampled arrays on ``t_grid`` (linearly interpolated) or callables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np
from scipy.integrate import quad, solve_ivp, trapezoid

from .errors import BadParams, BadRange, ConstraintViolation, CutOutOfRange, NegativeInitial
from .forms import superenergy
from .lorentz import Tensor, outer, wedge

ODE_RTOL = 1e-12
Coefficient = Union[np.ndarray, Callable[[float], float]]


@dataclass
class GeneratorRecord:
    t_grid: np.ndarray
    theta: Coefficient
    psi: Coefficient
    killing: Sequence[Coefficient]
    c2_init: float = 1.0
    w_init: float = 1.0
    measure_init: float = 1.0
    # fraction of w carried by |B|^2, for the mixing report
    b_fraction: Optional[Coefficient] = None

    def __post_init__(self):
        t = np.asarray(self.t_grid, dtype=float)
        if t.ndim != 1 or t.size < 2 or np.any(np.diff(t) <= 0):
            raise BadRange("t_grid must be strictly increasing with at least two points")
        self.t_grid = t
        for name in ("theta", "psi", "b_fraction"):
            self._check_samples(name, getattr(self, name))
        for k in self.killing:
            self._check_samples("killing", k)
        if self.c2_init < 0 or self.w_init < 0:
            raise NegativeInitial("initial jump densities must be nonnegative")
        if self.measure_init <= 0:
            raise NegativeInitial("initial cut measure must be positive")

    def _check_samples(self, name, value):
        if value is None or callable(value):
            return
        arr = np.asarray(value, dtype=float)
        if arr.shape != self.t_grid.shape:
            raise BadParams(f"{name} samples must match t_grid in length")

    def coefficient(self, value: Coefficient) -> Callable[[float], float]:
        if callable(value):
            return value
        arr = np.asarray(value, dtype=float)
        grid = self.t_grid
        return lambda t: float(np.interp(t, grid, arr))

    @property
    def t0(self) -> float:
        return float(self.t_grid[0])

    @property
    def t1(self) -> float:
        return float(self.t_grid[-1])


@dataclass
class GeneratorBundle:
    generators: List[GeneratorRecord]
    dim: int = 4
    meta: dict = field(default_factory=dict)


@dataclass
class TransportResult:
    t: np.ndarray
    values: np.ndarray
    closed_form: np.ndarray
    max_rel_dev: float


def _integral_of(gen: GeneratorRecord, value: Coefficient, a: float, b: float) -> float:
    """Exact integral of a sampled (piecewise linear) coefficient, or quad for callables."""
    if callable(value):
        return quad(value, a, b, epsabs=0.0, epsrel=1e-13, limit=200)[0]
    grid = gen.t_grid
    arr = np.asarray(value, dtype=float)
    inner = (grid > a) & (grid < b)
    xs = np.concatenate([[a], grid[inner], [b]])
    return float(trapezoid(np.interp(xs, grid, arr), xs))


def _rate(gen: GeneratorRecord, psi_weight: float, sign: float) -> Callable[[float], float]:
    theta = gen.coefficient(gen.theta)
    psi = gen.coefficient(gen.psi)
    return lambda t: sign * (theta(t) + psi_weight * psi(t))


def _solve_linear(gen: GeneratorRecord, rate: Callable[[float], float], y0: float, t_eval: np.ndarray) -> np.ndarray:
    """y' = rate(t) y with an adaptive embedded 4(5) Runge-Kutta pair."""
    t_eval = np.asarray(t_eval, dtype=float)
    if y0 == 0.0:
        return np.zeros_like(t_eval)
    lo, hi = gen.t0, gen.t1
    if t_eval.min() < lo - 1e-12 * (abs(lo) + 1) or t_eval.max() > hi + 1e-12 * (abs(hi) + 1):
        raise CutOutOfRange(f"evaluation points must lie in [{lo}, {hi}]")
    t_eval = np.clip(t_eval, lo, hi)
    order = np.argsort(t_eval)
    sol = solve_ivp(
        lambda t, y: rate(t) * y,
        (lo, hi),
        [y0],
        method="RK45",
        rtol=ODE_RTOL,
        atol=1e-14 * abs(y0),
        t_eval=t_eval[order],
    )
    if not sol.success:
        raise BadParams(f"integration failed: {sol.message}")
    out = np.empty_like(t_eval)
    out[order] = sol.y[0]
    return out


def _closed_form(gen: GeneratorRecord, psi_weight: float, sign: float, y0: float, t_eval: np.ndarray) -> np.ndarray:
    vals = []
    for t in t_eval:
        integral = _integral_of(gen, gen.theta, gen.t0, t)
        if psi_weight:
            integral += psi_weight * _integral_of(gen, gen.psi, gen.t0, t)
        vals.append(y0 * math.exp(sign * integral))
    return np.array(vals)


def _transport(gen: GeneratorRecord, y0: float, psi_weight: float, sign: float, t_eval=None) -> TransportResult:
    if y0 < 0:
        raise NegativeInitial("initial value must be nonnegative")
    t = gen.t_grid if t_eval is None else np.asarray(t_eval, dtype=float)
    values = _solve_linear(gen, _rate(gen, psi_weight, sign), y0, t)
    exact = _closed_form(gen, psi_weight, sign, y0, t)
    denom = np.maximum(np.abs(exact), 1e-300)
    dev = float(np.max(np.abs(values - exact) / denom)) if y0 else 0.0
    return TransportResult(t, values, exact, dev)


def transport_em(gen: GeneratorRecord, t_eval=None) -> TransportResult:
    """|c|^2 along the generator: d|c|^2/dt = -(theta + 2 Psi) |c|^2."""
    return _transport(gen, gen.c2_init, 2.0, -1.0, t_eval)


def transport_grav(gen: GeneratorRecord, t_eval=None) -> TransportResult:
    """w = |B|^2 + |f|^2 along the generator: dw/dt = -(theta + 4 Psi) w."""
    return _transport(gen, gen.w_init, 4.0, -1.0, t_eval)


def cut_measure_evolve(gen: GeneratorRecord, t_eval=None) -> TransportResult:
    """Cut measure weight: d mu/dt = theta mu."""
    return _transport(gen, gen.measure_init, 0.0, 1.0, t_eval)


@dataclass
class CutIntegrals:
    cuts: np.ndarray
    values: np.ndarray
    spread: float
    parts: Dict[str, np.ndarray] = field(default_factory=dict)
    part_spreads: Dict[str, float] = field(default_factory=dict)


def _spread(values: np.ndarray) -> float:
    scale = float(np.max(np.abs(values)))
    if scale == 0.0:
        return 0.0
    return float((np.max(values) - np.min(values)) / scale)


def conserved_integrals(bundle: GeneratorBundle, cuts: Sequence[float], kind: str = "em") -> CutIntegrals:
    """Sum over generators of density x prod n(zeta_i) x measure at each cut.

    ``em`` uses |c|^2 and two Killing contractions, ``grav`` uses
    |B|^2 + |f|^2 and four. When generators carry ``b_fraction`` the grav
    report also lists the |B|^2-only and |f|^2-only sums.
    """
    if kind not in ("em", "grav"):
        raise BadParams(f"kind must be 'em' or 'grav', got {kind!r}")
    cuts = np.asarray(cuts, dtype=float)
    nk = 2 if kind == "em" else 4
    total = np.zeros(cuts.size)
    b_only = np.zeros(cuts.size)
    have_mix = kind == "grav" and all(g.b_fraction is not None for g in bundle.generators)
    for gen in bundle.generators:
        if len(gen.killing) < nk:
            raise BadParams(f"{kind} integrals need {nk} Killing contractions per generator")
        dens = (transport_em if kind == "em" else transport_grav)(gen, cuts).values
        meas = cut_measure_evolve(gen, cuts).values
        kill = np.ones(cuts.size)
        for k in gen.killing[:nk]:
            fk = gen.coefficient(k)
            kill = kill * np.array([fk(t) for t in cuts])
        contrib = dens * kill * meas
        total += contrib
        if have_mix:
            fb = gen.coefficient(gen.b_fraction)
            b_only += contrib * np.array([fb(t) for t in cuts])
    out = CutIntegrals(cuts, total, _spread(total))
    if have_mix:
        out.parts = {"B_only": b_only, "f_only": total - b_only}
        out.part_spreads = {k: _spread(v) for k, v in out.parts.items()}
    return out


# ---------------------------------------------------------------- jump data


@dataclass
class JumpData:
    n: Tensor
    c: Tensor
    B: Tensor
    f: Tensor

    def validate(self, tol: float = 1e-10) -> None:
        frame = self.n.frame
        gi = frame.inverse
        n = self.n.components
        c = self.c.components
        f = self.f.components
        b = self.B.components
        ns = max(float(np.max(np.abs(n))), 1e-300)
        if abs(n @ gi @ n) > tol * ns * ns:
            raise ConstraintViolation("n is not null")
        if abs(n @ gi @ c) > tol * ns * max(float(np.max(np.abs(c))), 1.0):
            raise ConstraintViolation("c is not orthogonal to n")
        if abs(n @ gi @ f) > tol * ns * max(float(np.max(np.abs(f))), 1.0):
            raise ConstraintViolation("f is not orthogonal to n")
        bs = max(float(np.max(np.abs(b))), 1.0)
        if np.max(np.abs(b - b.T)) > tol * bs:
            raise ConstraintViolation("B is not symmetric")
        lhs = b @ (gi @ n) + float(np.trace(gi @ b)) * n
        if np.max(np.abs(lhs)) > tol * bs * ns:
            raise ConstraintViolation("B(n, .) + (tr B) n does not vanish")


def screen_projector(n: Tensor) -> np.ndarray:
    """Mixed projector q^a_b onto the screen of the null form n.

    Uses the auxiliary null form l = alpha u + beta n with g^-1(n, l) = -1,
    u the unit future axis; q = delta + n^# (x) l + l^# (x) n. A covector X
    projects to q^T X.
    """
    frame = n.frame
    gi = frame.inverse
    u = frame.future_axis / math.sqrt(-frame.g(frame.future_axis, frame.future_axis))
    nv = n.components
    sigma = float(nv @ u)
    ell = -(frame.metric @ u) / sigma - nv / (2.0 * sigma**2)
    return np.eye(frame.dim) + np.outer(gi @ nv, ell) + np.outer(gi @ ell, nv)


def riemann_jump(n: Tensor, B: Tensor) -> Tensor:
    """[R]_abcd = n_a n_c B_bd - n_a n_d B_bc - n_b n_c B_ad + n_b n_d B_ac."""
    nv = n.components
    b = B.components
    r = (
        np.einsum("a,c,bd->abcd", nv, nv, b)
        - np.einsum("a,d,bc->abcd", nv, nv, b)
        - np.einsum("b,c,ad->abcd", nv, nv, b)
        + np.einsum("b,d,ac->abcd", nv, nv, b)
    )
    return Tensor(n.frame, r)


def jump_superenergy(jump: JumpData, tol: float = 1e-10) -> Dict[str, dict]:
    """Superenergy of the three jump tensors next to their closed forms.

    Returns {name: {"tensor", "expected", "residual"}} with the residual
    relative to max|expected|, or to the size of the inputs when the
    expected tensor is negligible next to them.
    """
    jump.validate(tol)
    frame = jump.n.frame
    gi = frame.inverse
    n = jump.n
    # norms are evaluated on screen projections: the n-parts drop out of the
    # norms analytically but would otherwise cancel in floating point
    q = screen_projector(n)
    cs, fs = q.T @ jump.c.components, q.T @ jump.f.components
    bs = q.T @ jump.B.components @ q
    c2 = float(cs @ gi @ cs)
    b2 = float(np.einsum("ab,ac,bd,cd->", bs, gi, gi, bs))
    f2 = float(fs @ gi @ fs)
    n2 = outer(n, n)
    n4 = outer(n, n, n, n)
    ns = n.scale()
    cases = {
        "F": (wedge(n, jump.c), n2 * c2, (ns * jump.c.scale()) ** 2),
        "R": (riemann_jump(n, jump.B), n4 * (2.0 * b2), (ns * ns * jump.B.scale()) ** 2),
        "gradF": (outer(n, wedge(n, jump.f)), n4 * (2.0 * f2), (ns * ns * jump.f.scale()) ** 2),
    }
    out = {}
    for name, (tensor, expected, input_scale) in cases.items():
        if tensor.scale() == 0.0:
            got = Tensor(frame, np.zeros_like(expected.components))
        else:
            t = superenergy(tensor)
            got = Tensor(t.frame, t.components)
        scale = expected.scale()
        # an analytically vanishing identity (e.g. [R] for N = 3) is measured against the inputs
        if scale <= 1e-10 * input_scale:
            scale = input_scale
        diff = float(np.max(np.abs(got.components - expected.components)))
        out[name] = {"tensor": got, "expected": expected, "residual": diff / scale if scale > 0 else diff}
    return out


# ---------------------------------------------------------------- examples


def sphere_area(k: int) -> float:
    """Area of the unit k-sphere."""
    return 2.0 * math.pi ** ((k + 1) / 2.0) / math.gamma((k + 1) / 2.0)


def lightcone_example(
    N: int = 4,
    r0: float = 1.0,
    r1: float = 5.0,
    steps: int = 100,
    generators: int = 8,
    parametrization: str = "affine",
    c2_init: float = 1.0,
    w_init: float = 1.0,
) -> GeneratorBundle:
    """Generators of a Minkowski light cone from r0 to r1.

    Affine: t = r, theta = (N-2)/r, Psi = 0, n(zeta) = 1 for time translation.
    Log: t = ln r, theta = N-2, Psi = 1, n(zeta) = e^t.
    Solid-angle weights are uniform over the (N-2)-sphere.
    """
    if not (0 < r0 < r1):
        raise BadRange("need 0 < r0 < r1")
    if N < 3:
        raise BadRange("the light cone example needs N >= 3")
    if steps < 2 or generators < 1:
        raise BadRange("need steps >= 2 and at least one generator")
    weight = sphere_area(N - 2) * r0 ** (N - 2) / generators
    if parametrization == "affine":
        grid = np.linspace(r0, r1, steps)
        theta = lambda t: (N - 2) / t
        psi = lambda t: 0.0
        kill = lambda t: 1.0
    elif parametrization == "log":
        grid = np.linspace(math.log(r0), math.log(r1), steps)
        theta = lambda t: float(N - 2)
        psi = lambda t: 1.0
        kill = lambda t: math.exp(t)
    else:
        raise BadParams(f"unknown parametrization {parametrization!r}")
    if parametrization == "log":
        # n = r d/dr rescales the jump data at the initial cut
        c2_init = c2_init / r0**2
        w_init = w_init / r0**4
    gens = [
        GeneratorRecord(grid.copy(), theta, psi, [kill] * 4, c2_init, w_init, weight)
        for _ in range(generators)
    ]
    return GeneratorBundle(gens, N, {"example": "lightcone", "parametrization": parametrization, "r0": r0, "r1": r1})


def _scaled(value: Coefficient, rho: float, outer_factor: float):
    if value is None:
        return None
    if callable(value):
        return lambda t, v=value: outer_factor * v(rho * t)
    return outer_factor * np.asarray(value, dtype=float)


def rescale_bundle(bundle: GeneratorBundle, rho: float) -> GeneratorBundle:
    """Constant rescaling n -> rho n: t -> t/rho, theta, Psi, n(zeta) -> rho x,
    |c|^2 -> /rho^2, w -> /rho^4. A cut at t maps to t/rho."""
    if rho <= 0:
        raise BadParams("rho must be positive")
    gens = []
    for g in bundle.generators:
        gens.append(
            replace(
                g,
                t_grid=g.t_grid / rho,
                theta=_scaled(g.theta, rho, rho),
                psi=_scaled(g.psi, rho, rho),
                killing=[_scaled(k, rho, rho) for k in g.killing],
                b_fraction=_scaled(g.b_fraction, rho, 1.0),
                c2_init=g.c2_init / rho**2,
                w_init=g.w_init / rho**4,
            )
        )
    meta = dict(bundle.meta, rescaled_by=rho)
    return GeneratorBundle(gens, bundle.dim, meta)
