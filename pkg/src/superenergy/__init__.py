"""Superenergy tensors of r-fold forms, causal tensor cones and causal maps.

Conventions: signature (-, +, ..., +); slots are 0-based; the volume form
has eta_{0...N-1} = orientation * sqrt|det g|.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .causal_maps import (
    CausalRelVerdict,
    PullbackPoint,
    builtin_example,
    canonical_null_directions,
    check_generalized_symmetry,
    check_proper_causal,
    conformal_factor,
    pullback_metric,
)
from .cones import (
    DPVerdict,
    SimpleFormDecomposition,
    check_dp2_exact,
    check_dp_sampled,
    decompose_dp2,
    null_factor_test,
    sample_null,
    square_sym2,
)
from .errors import SuperenergyError, Unsupported
from .forms import (
    BlockStructure,
    DualIndex,
    FoldedForm,
    detect_blocks,
    hodge_dual,
    interior_contraction,
    odot,
    superenergy,
    superenergy_nform,
    superenergy_pform_closed,
)
from .lorentz import (
    LorentzFrame,
    Tensor,
    classify_vector,
    contract_ij,
    covector,
    inner_full,
    make_frame,
    metric_dual,
    metric_tensor,
    minkowski,
    outer,
    volume_form,
    wedge,
)
from .rainich import (
    EMClassification,
    build_em,
    classify,
    is_dust,
    is_maxwell4,
    is_perfect_fluid,
    is_scalar_field,
    pform_test,
)
from .wavefront import (
    GeneratorBundle,
    GeneratorRecord,
    JumpData,
    conserved_integrals,
    cut_measure_evolve,
    jump_superenergy,
    lightcone_example,
    rescale_bundle,
    transport_em,
    transport_grav,
)
