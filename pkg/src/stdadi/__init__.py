"""Dual affine differential invariant features for 3D joint trajectories."""

from .enumeration import count_summary, enumerate_specs, independence_rank, match_stdadi
from .invariants import (
    STDADI_NAMES,
    STDADI_SPECS,
    InvalidSpecError,
    InvariantConfig,
    MonomialSpec,
    OrderError,
    augment_channels,
    det_m,
    rational_invariant,
    squash,
    stdadi8,
    stdadi_features,
)
from .pipeline import PipelineConfig, featurize_file, featurize_sequence
from .skeleton_io import (
    FeatureTensor,
    SkeletonParseError,
    SkeletonSequence,
    parse_skeleton_file,
    read_feature_tensor,
    read_skeleton_file,
    write_feature_tensor,
)
from .spline import (
    DerivativeStack,
    JointTrajectory,
    TrajectoryError,
    TrajectoryModel,
    derivative_stacks,
    differentiate_analytic,
    fit_and_differentiate,
)
from .transforms import DualAffine, apply_dual_affine, push_forward_stack, random_transform
from .verify import InvarianceReport, check_invariance_analytic, check_invariance_spline, negative_control

__version__ = "0.1.0"
