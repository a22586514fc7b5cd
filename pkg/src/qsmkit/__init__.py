"""qsmkit: forward dipole modeling, field preprocessing, classical dipole
inversion, and training-data tooling for quantitative susceptibility mapping.

Volumes are float32 voxel grids with explicit geometry (dimensions, voxel
size, field direction) and a semantic kind; everything numeric runs in
float64 and is deterministic for a fixed seed.
"""

from .augment import (
    AugmentPlan,
    DatasetManifest,
    ManifestEntry,
    NormStats,
    ScalingSpec,
    build_training_set,
    load_manifest,
    make_orientations,
    save_manifest,
    scale_map,
    sign_invert,
    verify_symmetry,
)
from .dipole import (
    DipoleKernel,
    build_kernel,
    forward_field,
    rotate_volume,
    rotation_from_euler,
)
from .fieldprep import (
    GYROMAGNETIC_RATIO_HZ_PER_T,
    PrepParams,
    laplacian_unwrap,
    phase_to_ppm,
    smv_background_removal,
)
from .invert import InversionParams, cosmos, tikhonov, tkd
from .lossmetrics import (
    LossBreakdown,
    Metrics,
    RegressionResult,
    linear_regression,
    loss_gradient,
    loss_l1,
    loss_model,
    quality_metrics,
    sweep_rmse,
    total_loss,
)
from .patches import (
    PatchIndex,
    compute_norm_stats,
    denormalize,
    export_dataset,
    extract_patches,
    normalize,
    patch_origins,
    read_shard_record,
)
from .phantom import (
    LesionSpec,
    SweepReport,
    lesion_sweep,
    make_lesion_mask,
    save_sweep_report,
    simulate_lesion,
)
from .volume import (
    Grid3,
    Histogram,
    Volume,
    histogram,
    load_volume,
    masked_stats,
    masked_values,
    mirror_asymmetry,
    save_volume,
    volume_like,
)

__version__ = "0.1.0"

__all__ = [
    "AugmentPlan",
    "DatasetManifest",
    "DipoleKernel",
    "Grid3",
    "GYROMAGNETIC_RATIO_HZ_PER_T",
    "Histogram",
    "InversionParams",
    "LesionSpec",
    "LossBreakdown",
    "ManifestEntry",
    "Metrics",
    "NormStats",
    "PatchIndex",
    "PrepParams",
    "RegressionResult",
    "ScalingSpec",
    "SweepReport",
    "Volume",
    "build_kernel",
    "build_training_set",
    "compute_norm_stats",
    "cosmos",
    "denormalize",
    "export_dataset",
    "extract_patches",
    "forward_field",
    "histogram",
    "laplacian_unwrap",
    "lesion_sweep",
    "linear_regression",
    "load_manifest",
    "load_volume",
    "loss_gradient",
    "loss_l1",
    "loss_model",
    "make_lesion_mask",
    "make_orientations",
    "masked_stats",
    "masked_values",
    "mirror_asymmetry",
    "normalize",
    "patch_origins",
    "phase_to_ppm",
    "quality_metrics",
    "read_shard_record",
    "rotate_volume",
    "rotation_from_euler",
    "save_manifest",
    "save_sweep_report",
    "save_volume",
    "scale_map",
    "sign_invert",
    "simulate_lesion",
    "smv_background_removal",
    "sweep_rmse",
    "tikhonov",
    "tkd",
    "total_loss",
    "verify_symmetry",
    "volume_like",
]
