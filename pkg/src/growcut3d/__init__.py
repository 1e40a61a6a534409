"""Interactive 3D GrowCut segmentation toolkit."""

from .engine import (
    AutomatonState,
    GrowCutConfig,
    Roi,
    SegmentationResult,
    attack_strength,
    compute_roi,
    init_state,
    run,
    sphere_seed,
    step,
)
from .phantom import ellipsoid_phantom
from .volume import (
    LabelVolume,
    ScalarVolume,
    SlicePlane,
    extract_slice,
    load_nrrd,
    resample_isotropic,
    resample_labels,
    save_nrrd,
)

__version__ = "0.1.0"

__all__ = [
    "AutomatonState",
    "GrowCutConfig",
    "LabelVolume",
    "Roi",
    "ScalarVolume",
    "SegmentationResult",
    "SlicePlane",
    "attack_strength",
    "compute_roi",
    "ellipsoid_phantom",
    "extract_slice",
    "init_state",
    "load_nrrd",
    "resample_isotropic",
    "resample_labels",
    "run",
    "save_nrrd",
    "sphere_seed",
    "step",
    "__version__",
]
