"""Command-line interface: ``sek <command> [flags]``.

Inputs and reports are JSON. A tensor document looks like

    {"dim": 4, "rank": 2, "components": [...row-major...],
     "metric": [...optional...], "structure": {"degrees": [2], "permutation": [0, 1]},
     "orientation": 1, "future_axis": [...optional...]}

Exit codes: 0 computed (whatever the verdict), 1 malformed input,
2 well-formed but unsupported case.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime
import json
import math
import os
import sys
from typing import Any, Dict, List, Optional

import numpy as np

from . import __version__
from .causal_maps import builtin_example, check_generalized_symmetry, check_proper_causal, pullback_metric
from .cones import check_dp2_exact, check_dp_sampled, decompose_dp2, null_factors
from .errors import CapExceeded, SuperenergyError, Unsupported
from .forms import BlockStructure, FoldedForm, superenergy
from .lorentz import MAX_DIM, MAX_RANK, TOL_ALG, TOL_CLASS, LorentzFrame, Tensor, make_frame, minkowski
from .rainich import classify
from .wavefront import conserved_integrals, lightcone_example, rescale_bundle

COMMANDS = ("se", "dp", "classify", "decompose", "pullback", "symmetry", "wavefront", "selftest")


class InputError(ValueError):
    """Malformed document or flag value."""


# ---------------------------------------------------------------- documents


def _floats(values, name: str, size: Optional[int] = None) -> np.ndarray:
    try:
        arr = np.asarray(values, dtype=float).ravel()
    except (TypeError, ValueError) as exc:
        raise InputError(f"{name} must be an array of numbers") from exc
    if size is not None and arr.size != size:
        raise InputError(f"{name} has {arr.size} entries, expected {size}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains non-finite values")
    return arr


def frame_from_document(doc: Dict[str, Any], dim: int) -> LorentzFrame:
    metric = doc.get("metric")
    metric = None if metric is None else _floats(metric, "metric", dim * dim).reshape(dim, dim)
    axis = doc.get("future_axis")
    axis = None if axis is None else _floats(axis, "future_axis", dim)
    orientation = doc.get("orientation", 1)
    if orientation not in (1, -1):
        raise InputError("orientation must be 1 or -1")
    return make_frame(dim, metric, future_axis=axis, orientation=orientation)


def parse_tensor_document(doc: Any, frame: Optional[LorentzFrame] = None):
    """(Tensor, BlockStructure or None) from a tensor document."""
    if not isinstance(doc, dict):
        raise InputError("tensor document must be a JSON object")
    try:
        dim = int(doc["dim"])
        rank = int(doc["rank"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError("tensor document needs integer dim and rank") from exc
    if dim < 2 or rank < 0:
        raise InputError("dim must be >= 2 and rank >= 0")
    if "components" not in doc:
        raise InputError("tensor document needs components")
    if frame is None:
        frame = frame_from_document(doc, dim)
    elif frame.dim != dim:
        raise InputError("tensor dimension differs from the frame dimension")
    if dim > MAX_DIM or rank > MAX_RANK:
        raise CapExceeded(f"dimension {dim} / rank {rank} above the caps {MAX_DIM} / {MAX_RANK}")
    comps = _floats(doc["components"], "components", dim**rank)
    tensor = Tensor.from_flat(frame, comps, rank)
    if doc.get("upper") is not None:
        upper = doc["upper"]
        if not isinstance(upper, list) or len(upper) != rank:
            raise InputError("upper must list one flag per slot")
        tensor = Tensor(frame, tensor.components, tuple(bool(x) for x in upper))
    structure = None
    if doc.get("structure") is not None:
        s = doc["structure"]
        try:
            degrees = tuple(int(x) for x in s["degrees"])
            perm = tuple(int(x) for x in s.get("permutation", range(rank)))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError("structure needs integer degrees (and optional permutation)") from exc
        structure = BlockStructure(degrees, perm)
    return tensor, structure


def tensor_document(t: Tensor, structure: Optional[BlockStructure] = None) -> Dict[str, Any]:
    doc: Dict[str, Any] = {
        "dim": t.dim,
        "rank": t.rank,
        "components": [float(x) for x in t.components.ravel()],
    }
    frame = t.frame
    if not np.array_equal(frame.metric, minkowski(frame.dim).metric):
        doc["metric"] = [float(x) for x in frame.metric.ravel()]
    if not np.array_equal(frame.future_axis, make_frame(frame.dim, frame.metric).future_axis):
        doc["future_axis"] = [float(x) for x in frame.future_axis]
    if frame.orientation != 1:
        doc["orientation"] = frame.orientation
    if any(t.upper):
        doc["upper"] = list(t.upper)
    if structure is not None:
        doc["structure"] = {"degrees": list(structure.degrees), "permutation": list(structure.permutation)}
    return doc


def to_jsonable(obj: Any) -> Any:
    if isinstance(obj, Tensor):
        return tensor_document(obj)
    if isinstance(obj, LorentzFrame):
        return {"dim": obj.dim, "metric": [float(x) for x in obj.metric.ravel()]}
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return obj


def _load_json(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc.msg}") from exc


def _require(args, name: str):
    value = getattr(args, name, None)
    if value is None:
        raise InputError(f"--{name.replace('_', '-')} is required")
    return value


def _floats_flag(text: str, name: str) -> List[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise InputError(f"--{name} must be a comma-separated list of numbers") from exc


# ---------------------------------------------------------------- commands


def cmd_se(args) -> Dict[str, Any]:
    tensor, structure = parse_tensor_document(_load_json(_require(args, "inp")))
    ff = FoldedForm(tensor, structure) if structure is not None else tensor
    t = superenergy(ff)
    return {"tensor": tensor_document(Tensor(t.frame, t.components)), "folds": t.folds}


def cmd_dp(args) -> Dict[str, Any]:
    tensor, _ = parse_tensor_document(_load_json(_require(args, "inp")))
    if args.exact:
        verdict = check_dp2_exact(tensor, args.sign, count=args.samples, seed=args.seed)
    else:
        verdict = check_dp_sampled(tensor, args.sign, count=args.samples, seed=args.seed)
    return {"verdict": to_jsonable(verdict)}


def cmd_classify(args) -> Dict[str, Any]:
    tensor, _ = parse_tensor_document(_load_json(_require(args, "inp")))
    return {"classification": to_jsonable(classify(tensor))}


def cmd_decompose(args) -> Dict[str, Any]:
    tensor, _ = parse_tensor_document(_load_json(_require(args, "inp")))
    dec = decompose_dp2(tensor)
    terms = []
    for term in dec.terms:
        entry = {"p": term.p, "weight": term.weight, "form": tensor_document(term.form)}
        if term.p >= 2:
            entry["null_factors"] = [to_jsonable(k.components) for k in null_factors(term, dec.eigenframe)]
        terms.append(entry)
    return {
        "decomposition": {
            "terms": terms,
            "eigenframe": to_jsonable(dec.eigenframe),
            "weights": to_jsonable(dec.weights),
            "residual": dec.residual,
        }
    }


def _jacobian_points(doc: Any, dim: int) -> List[np.ndarray]:
    if isinstance(doc, dict) and "points" in doc:
        raw = doc["points"]
    elif isinstance(doc, dict) and "jacobian" in doc:
        raw = [doc["jacobian"]]
    else:
        raw = [doc]
    if not isinstance(raw, list) or not raw:
        raise InputError("jacobian file needs a matrix, {'jacobian': ...} or {'points': [...]}")
    return [_floats(m, "jacobian", dim * dim).reshape(dim, dim) for m in raw]


def cmd_pullback(args) -> Dict[str, Any]:
    points = []
    if args.q is not None:
        for q in _floats_flag(args.q, "q"):
            pt = builtin_example("minkowski_stretch", {"q": q}, dim=args.dim)
            v = check_proper_causal(pt.base_frame, pt.candidate, pt.jacobian, pt.target, seed=args.seed)
            points.append({"q": q, "pullback": tensor_document(pt.candidate), "verdict": to_jsonable(v)})
        return {"points": points}
    target_doc = _load_json(_require(args, "target_metric"))
    target_tensor, _ = parse_tensor_document(target_doc)
    h = target_tensor.components
    target = make_frame(target_tensor.dim, h)
    base = parse_tensor_document(_load_json(args.inp))[0].frame if args.inp else minkowski(target.dim)
    if base.dim != target.dim:
        raise InputError("base and target dimensions differ")
    for j in _jacobian_points(_load_json(_require(args, "jacobian")), target.dim):
        phg = pullback_metric(j, h, base)
        v = check_proper_causal(base, phg, j, target, seed=args.seed)
        points.append({"jacobian": to_jsonable(j), "pullback": tensor_document(phg), "verdict": to_jsonable(v)})
    return {"points": points}


def cmd_symmetry(args) -> Dict[str, Any]:
    if args.inp:
        tensor, _ = parse_tensor_document(_load_json(args.inp))
        frame, L = tensor.frame, tensor
    else:
        name = args.example or "robertson_walker"
        params: Dict[str, Any] = {}
        if name == "robertson_walker":
            params = {"a": args.a, "adot": args.adot}
        elif name == "kerr_schild":
            params = {"amplitude": args.amplitude}
        pt = builtin_example(name, params, dim=args.dim)
        frame, L = pt.base_frame, pt.candidate
    v = check_generalized_symmetry(frame, L, psi=args.psi, seed=args.seed)
    interval = {"lower": "-inf", "upper": v.psi_max} if v.feasible else None
    return {"deformation": tensor_document(L), "symmetry": to_jsonable(v), "psi_interval": to_jsonable(interval)}


def cmd_wavefront(args) -> Dict[str, Any]:
    bundle = lightcone_example(args.N, args.r0, args.r1, args.steps, parametrization=args.parametrization)
    cuts = np.array(_floats_flag(args.cuts, "cuts"))
    if args.parametrization == "log":
        if np.any(cuts <= 0):
            raise InputError("cuts are radii and must be positive")
        cuts = np.log(cuts)
    kinds = ("em", "grav") if args.kind == "both" else (args.kind,)
    rhos = _floats_flag(args.rescale, "rescale") if args.rescale else []
    table = []
    for kind in kinds:
        res = conserved_integrals(bundle, cuts, kind)
        row = {"kind": kind, "cuts": to_jsonable(cuts), "values": to_jsonable(res.values), "spread": res.spread}
        rescaled = []
        for rho in rhos:
            other = conserved_integrals(rescale_bundle(bundle, rho), cuts / rho, kind)
            dev = float(np.max(np.abs(other.values - res.values)) / np.max(np.abs(res.values)))
            rescaled.append({"rho": rho, "values": to_jsonable(other.values), "max_rel_dev": dev})
        if rescaled:
            row["rescaled"] = rescaled
        table.append(row)
    return {"integrals": table}


def cmd_selftest(args) -> Dict[str, Any]:
    from .acceptance import CRITERIA, run_criterion

    wanted = [int(x) for x in _floats_flag(args.only, "only")] if args.only else range(1, len(CRITERIA) + 1)
    results = []
    for i in wanted:
        if not 1 <= i <= len(CRITERIA):
            raise InputError(f"criterion {i} does not exist")
        res = run_criterion(i)
        print(res.line(), file=sys.stderr, flush=True)
        entry = to_jsonable(res)
        if args.no_meta:
            entry.pop("seconds", None)
        results.append(entry)
    return {"criteria": results, "passed": sum(r["passed"] for r in results), "total": len(results)}


HANDLERS = {
    "se": cmd_se,
    "dp": cmd_dp,
    "classify": cmd_classify,
    "decompose": cmd_decompose,
    "pullback": cmd_pullback,
    "symmetry": cmd_symmetry,
    "wavefront": cmd_wavefront,
    "selftest": cmd_selftest,
}


# ---------------------------------------------------------------- parser


def _default_seed() -> int:
    raw = os.environ.get("SEK_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise InputError("SEK_SEED must be an integer")


class _Parser(argparse.ArgumentParser):
    """Usage errors are malformed input (exit 1); argparse would exit 2."""

    def error(self, message):
        raise InputError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sek", description="Superenergy tensors, causal cones and causal maps.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON file with flag values (command-line flags win)")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--seed", type=int, default=None, help="sampling seed (default: $SEK_SEED or 0)")
    common.add_argument("--no-meta", action="store_true", help="omit timestamps and timings")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        return sub.add_parser(name, parents=[common], help=help_text)

    p = add("se", "superenergy tensor of a tensor document")
    p.add_argument("--in", dest="inp")
    p = add("dp", "dominant-property verdict")
    p.add_argument("--in", dest="inp")
    p.add_argument("--sign", choices=("plus", "minus"), default="plus")
    p.add_argument("--samples", type=int, default=None, help="null directions per slot")
    p.add_argument("--exact", action="store_true", help="eigenvalue test for symmetric rank-2 input")
    p = add("classify", "energy-momentum classification of a symmetric rank-2 tensor")
    p.add_argument("--in", dest="inp")
    p = add("decompose", "simple-form decomposition of a rank-2 causal tensor")
    p.add_argument("--in", dest="inp")
    p = add("pullback", "proper causal relation at one or more points")
    p.add_argument("--q", help="built-in stretch map x0 -> q x0; comma-separated values allowed")
    p.add_argument("--dim", type=int, default=4)
    p.add_argument("--jacobian", help="JSON matrix, {'jacobian': ...} or {'points': [...]}")
    p.add_argument("--target-metric", dest="target_metric", help="tensor document of the target metric")
    p.add_argument("--in", dest="inp", help="tensor document whose metric is the base metric")
    p = add("symmetry", "feasible psi for a deformation L - 2 psi g in DP2-")
    p.add_argument("--in", dest="inp", help="tensor document of L")
    p.add_argument("--example", choices=("robertson_walker", "kerr_schild"))
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--adot", type=float, default=-1.0)
    p.add_argument("--amplitude", type=float, default=-1.0)
    p.add_argument("--psi", type=float, default=None)
    p.add_argument("--dim", type=int, default=4)
    p = add("wavefront", "conserved cut integrals on the light-cone example")
    p.add_argument("--N", type=int, default=4)
    p.add_argument("--r0", type=float, default=1.0)
    p.add_argument("--r1", type=float, default=5.0)
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--cuts", default="1,2,5")
    p.add_argument("--kind", choices=("em", "grav", "both"), default="both")
    p.add_argument("--rescale", default="", help="comma-separated rho values")
    p.add_argument("--parametrization", choices=("affine", "log"), default="affine")
    p = add("selftest", "run the acceptance suite")
    p.add_argument("--only", default="", help="comma-separated criterion numbers")
    parser._subparsers_map = sub.choices  # type: ignore[attr-defined]
    return parser


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        config = _load_json(args.config)
        if not isinstance(config, dict):
            raise InputError("config file must hold a JSON object")
        subparser = parser._subparsers_map[args.command]  # type: ignore[attr-defined]
        known = {a.dest for a in subparser._actions}
        unknown = sorted(set(config) - known - {"command"})
        if unknown:
            raise InputError(f"unknown config keys: {', '.join(unknown)}")
        defaults = {k.replace("-", "_"): v for k, v in config.items() if k != "command"}
        subparser.set_defaults(**defaults)
        args = parser.parse_args(argv)
    if args.seed is None:
        args.seed = _default_seed()
    return args


def _provenance(args) -> Dict[str, Any]:
    flags = {k: to_jsonable(v) for k, v in sorted(vars(args).items()) if k not in ("command", "out")}
    prov = {
        "command": args.command,
        "flags": flags,
        "seed": args.seed,
        "tolerances": {"tol_class": TOL_CLASS, "tol_alg": TOL_ALG},
        "version": __version__,
    }
    if not args.no_meta:
        prov["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    return prov


def _emit(report: Dict[str, Any], path: Optional[str]) -> None:
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv: Optional[List[str]] = None) -> int:
    args = None
    try:
        args = parse_args(argv)
        body = HANDLERS[args.command](args)
        report = {"provenance": _provenance(args), **body}
        _emit(report, args.out)
        return 0
    except Unsupported as exc:
        code, err = 2, exc
    except (InputError, SuperenergyError, ValueError, np.linalg.LinAlgError) as exc:
        code, err = 1, exc
    report = {"error": {"type": type(err).__name__, "message": str(err), "exit_code": code}}
    if args is not None:
        report["provenance"] = _provenance(args)
    _emit(report, getattr(args, "out", None))
    return code


def main(argv: Optional[List[str]] = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
