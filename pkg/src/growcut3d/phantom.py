"""Synthetic ellipsoid phantoms: desk-scale stand-ins for real scans."""

from __future__ import annotations

import numpy as np

from .errors import InputValidationError
from .volume import LabelVolume, ScalarVolume


def ellipsoid_phantom(
    dims: tuple[int, int, int],
    semi_axes: tuple[float, float, float],
    inside: float = 100.0,
    outside: float = 50.0,
    noise_sigma: float = 0.0,
    seed: int = 0,
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0),
) -> tuple[ScalarVolume, LabelVolume]:
    """Two-intensity ellipsoid image plus its analytic truth mask.

    The ellipsoid is centered in the volume; a voxel at index (x, y, z) is
    inside when ((x-cx)/a)^2 + ((y-cy)/b)^2 + ((z-cz)/c)^2 <= 1. Gaussian
    noise from a seeded generator is added when ``noise_sigma > 0``; the same
    seed always yields identical voxels.
    """
    nx, ny, nz = dims
    a, b, c = (float(s) for s in semi_axes)
    if min(a, b, c) <= 0:
        raise InputValidationError(f"semi-axes must be positive, got {semi_axes}")
    cx, cy, cz = (nx - 1) / 2.0, (ny - 1) / 2.0, (nz - 1) / 2.0
    if a > cx + 0.5 or b > cy + 0.5 or c > cz + 0.5:
        raise InputValidationError(
            f"ellipsoid semi-axes {semi_axes} do not fit in dims {dims}"
        )

    zz = ((np.arange(nz, dtype=np.float64) - cz) / c)[:, None, None] ** 2
    yy = ((np.arange(ny, dtype=np.float64) - cy) / b)[None, :, None] ** 2
    xx = ((np.arange(nx, dtype=np.float64) - cx) / a)[None, None, :] ** 2
    inside_mask = (zz + yy + xx) <= 1.0

    image = np.where(inside_mask, np.float64(inside), np.float64(outside))
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        image = image + rng.normal(0.0, noise_sigma, size=image.shape)

    return (
        ScalarVolume(data=image.astype(np.float32), spacing=spacing),
        LabelVolume(data=inside_mask.astype(np.uint8), spacing=spacing),
    )
