"""Exception types shared across the package."""


class GrowCutError(Exception):
    """Base class for all errors raised by this package."""


class InputValidationError(GrowCutError):
    """Bad parameters or inconsistent input data (CLI exit code 2)."""


class NrrdFormatError(InputValidationError):
    """Malformed or unsupported NRRD content."""


class GeometryError(InputValidationError):
    """Volumes that must share dims/spacing/origin do not."""


class NoSeedsError(InputValidationError):
    """A seed volume without the required labeled voxels."""


class DegenerateTargetError(InputValidationError):
    """Resampling target spacing would collapse an axis to zero voxels."""


class EmptyMaskError(InputValidationError):
    """A metric that needs nonempty masks received an empty one."""


class NotConvergedError(GrowCutError):
    """Segmentation hit the iteration cap before reaching a fixpoint."""


class SegmentationTimeout(GrowCutError):
    """A deadline-limited segmentation run exceeded its time budget."""
