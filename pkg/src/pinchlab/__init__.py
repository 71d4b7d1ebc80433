"""Curvature invariants and pinching checks for immersed submanifolds."""

from .expr import DomainError, ExprAst, Jet2Scalar, ParseError, eval_jet2, parse, to_source
from .jets import (
    SFF,
    AmbientSpace,
    Axis,
    Chart,
    Domain,
    FramedPoint,
    Invariants,
    Jet2,
    MJet,
    RankError,
    fd_jet,
    frames_at,
    invariants,
    second_fundamental_form,
    sff_at,
    shape_operator,
)
from .curvature import (
    AdaptedFrame,
    BWMatrix,
    CurvTensor,
    DupinResult,
    NormalCurv,
    RicciData,
    adapted_frame,
    bw_adapted_closed_form,
    bw_from_sff,
    bw_operator,
    dupin_decomposition,
    gauss_curvature,
    hodge_split,
    isotropic_curvature,
    isotropic_min,
    normal_curvature,
    ricci_scalar,
)
from .frameopt import FrameProblem, FrameResult, min_eigenpair, minimize_over_frames
from .pinching import (
    LSReport,
    PinchReport,
    lemp_gap,
    ls_min,
    ls_quantity,
    pinch_bound,
    pinch_check,
    propu_harness,
    sample_sff,
)
from .catalog import (
    MODEL_INFO,
    ModelSpec,
    build_model,
    clifford_torus,
    cp2_veronese,
    curve_from_components,
    ellipsoid,
    ovaloid_margin,
    product_with_curve,
    rotational,
    rotational_strict_check,
    round_sphere,
    sphere_product,
)

__version__ = "0.1.0"
