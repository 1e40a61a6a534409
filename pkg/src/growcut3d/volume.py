"""Volumetric data containers, NRRD subset I/O, resampling, slice extraction.

Volume arrays are C-contiguous with shape ``(nz, ny, nx)`` so the flat memory
layout is x-fastest: voxel ``(i, j, k)`` lives at linear index
``i + nx*(j + ny*k)`` and is addressed as ``data[k, j, i]``.

Axis convention (fixed across the package and its HTTP API):

    axial    -> fixed z, in-plane axes (x, y)
    sagittal -> fixed x, in-plane axes (y, z)
    coronal  -> fixed y, in-plane axes (x, z)

Physical coordinates: the center of voxel ``(i, j, k)`` sits at
``origin + (i*sx, j*sy, k*sz)`` millimeters.

The NRRD support is a deliberate subset: 3-D, raw or gzip encoding, attached
data, diagonal geometry only. Files are written as NRRD0004, raw,
little-endian; scalars as ``float``, labels as ``uint8``.
"""

from __future__ import annotations

import gzip
import math
import re
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateTargetError, GeometryError, NrrdFormatError

Vec3 = tuple[float, float, float]

AXES = ("axial", "sagittal", "coronal")

# grid axis fixed by each plane: axial holds z, sagittal holds x, coronal holds y
_PLANE_FIXED_AXIS = {"axial": 2, "sagittal": 0, "coronal": 1}  # index into (x, y, z)


def _check_geometry_fields(data: np.ndarray, spacing: Vec3) -> None:
    if data.ndim != 3:
        raise ValueError(f"volume data must be 3-D, got ndim={data.ndim}")
    if min(data.shape) < 1:
        raise ValueError(f"all dims must be >= 1, got shape {data.shape}")
    if len(spacing) != 3 or any(s <= 0 for s in spacing):
        raise ValueError(f"all spacings must be > 0, got {spacing}")


@dataclass(eq=False)
class ScalarVolume:
    """3-D grid of intensities with physical spacing.

    ``data`` holds float32 regardless of the source file type; int16 MRI
    values are exactly representable.
    """

    data: np.ndarray
    spacing: Vec3 = (1.0, 1.0, 1.0)
    origin: Vec3 = (0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        self.data = np.ascontiguousarray(self.data, dtype=np.float32)
        self.spacing = tuple(float(s) for s in self.spacing)
        self.origin = tuple(float(o) for o in self.origin)
        _check_geometry_fields(self.data, self.spacing)

    @property
    def dims(self) -> tuple[int, int, int]:
        """(nx, ny, nz) voxel counts."""
        nz, ny, nx = self.data.shape
        return (nx, ny, nz)


@dataclass(eq=False)
class LabelVolume:
    """Same-geometry grid of small-integer labels.

    0 = unlabeled, 1 = foreground, 2 = background by convention.
    """

    data: np.ndarray
    spacing: Vec3 = (1.0, 1.0, 1.0)
    origin: Vec3 = (0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        data = np.asarray(self.data)
        if data.dtype != np.uint8:
            if data.size and (data.min() < 0 or data.max() > 255):
                raise ValueError("labels must lie in 0..255")
            data = data.astype(np.uint8)
        self.data = np.ascontiguousarray(data)
        self.spacing = tuple(float(s) for s in self.spacing)
        self.origin = tuple(float(o) for o in self.origin)
        _check_geometry_fields(self.data, self.spacing)

    @property
    def dims(self) -> tuple[int, int, int]:
        nz, ny, nx = self.data.shape
        return (nx, ny, nz)


Volume = ScalarVolume | LabelVolume


@dataclass(frozen=True)
class SlicePlane:
    """A cross-section: plane name plus voxel index along its fixed axis."""

    axis: str
    index: int

    def __post_init__(self) -> None:
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")


class Slice2D(NamedTuple):
    """Extracted plane; ``values`` has shape (height, width)."""

    width: int
    height: int
    values: np.ndarray


def same_geometry(a: Volume, b: Volume, tol: float = 1e-9) -> bool:
    """True when dims, spacing and origin all match (spacing/origin within tol)."""
    return (
        a.dims == b.dims
        and all(abs(x - y) <= tol for x, y in zip(a.spacing, b.spacing))
        and all(abs(x - y) <= tol for x, y in zip(a.origin, b.origin))
    )


def require_same_geometry(a: Volume, b: Volume, what: str = "volumes") -> None:
    if not same_geometry(a, b):
        raise GeometryError(
            f"{what} must share geometry: "
            f"dims {a.dims} vs {b.dims}, spacing {a.spacing} vs {b.spacing}, "
            f"origin {a.origin} vs {b.origin}"
        )


def empty_labels_like(v: Volume) -> LabelVolume:
    """All-zero LabelVolume with the geometry of ``v``."""
    return LabelVolume(
        data=np.zeros(v.data.shape, dtype=np.uint8), spacing=v.spacing, origin=v.origin
    )


# ---------------------------------------------------------------------------
# NRRD subset I/O
# ---------------------------------------------------------------------------

_MAGIC_RE = re.compile(r"^NRRD000[1-5]$")

# accepted on read; written canonically as "float" / "uint8"
_TYPE_ALIASES = {
    "uchar": "u1", "unsigned char": "u1", "uint8": "u1", "uint8_t": "u1",
    "short": "i2", "short int": "i2", "signed short": "i2",
    "signed short int": "i2", "int16": "i2", "int16_t": "i2",
    "ushort": "u2", "unsigned short": "u2", "unsigned short int": "u2",
    "uint16": "u2", "uint16_t": "u2",
    "float": "f4", "float32": "f4",
}


def _parse_vector(text: str, line: str) -> tuple[float, ...]:
    m = re.fullmatch(r"\(([^)]*)\)", text.strip())
    if not m:
        raise NrrdFormatError(f"expected '(a,b,c)' vector in header line: {line!r}")
    try:
        return tuple(float(part) for part in m.group(1).split(","))
    except ValueError as exc:
        raise NrrdFormatError(f"bad vector component in header line: {line!r}") from exc


def _read_header(f) -> tuple[dict[str, str], list[str]]:
    magic = f.readline()
    try:
        magic_text = magic.decode("ascii").rstrip("\r\n")
    except UnicodeDecodeError as exc:
        raise NrrdFormatError("first line is not ASCII; not a NRRD file") from exc
    if not _MAGIC_RE.match(magic_text):
        raise NrrdFormatError(f"bad magic line {magic_text!r}; expected NRRD0001..NRRD0005")

    fields: dict[str, str] = {}
    raw_lines: list[str] = []
    while True:
        raw = f.readline()
        if raw == b"":
            raise NrrdFormatError("header ended without the blank separator line")
        line = raw.decode("ascii", errors="replace").rstrip("\r\n")
        if line == "":
            break
        raw_lines.append(line)
        if line.startswith("#"):
            continue
        if ":=" in line:  # key/value metadata, not a field; skip
            continue
        if ": " not in line and not line.endswith(":"):
            raise NrrdFormatError(f"malformed header line (missing ': '): {line!r}")
        key, _, value = line.partition(":")
        fields[key.strip().lower()] = value.strip()
    return fields, raw_lines


def _spacing_from_fields(fields: dict[str, str]) -> Vec3:
    if "spacings" in fields:
        parts = fields["spacings"].split()
        if len(parts) != 3:
            raise NrrdFormatError(f"'spacings' must have 3 entries: {fields['spacings']!r}")
        spacing = tuple(float(p) for p in parts)
    elif "space directions" in fields:
        vecs = []
        for token in re.findall(r"\([^)]*\)|none", fields["space directions"]):
            if token == "none":
                raise NrrdFormatError("non-domain axes in 'space directions' are unsupported")
            vecs.append(_parse_vector(token, fields["space directions"]))
        if len(vecs) != 3 or any(len(v) != 3 for v in vecs):
            raise NrrdFormatError(
                f"'space directions' must hold three 3-vectors: {fields['space directions']!r}"
            )
        for i, v in enumerate(vecs):
            for j, comp in enumerate(v):
                if i != j and abs(comp) > 1e-9 * max(1.0, abs(v[i])):
                    raise NrrdFormatError(
                        "unsupported geometry: 'space directions' is not diagonal"
                    )
        spacing = tuple(abs(v[i]) for i, v in enumerate(vecs))
    else:
        raise NrrdFormatError("header defines neither 'spacings' nor 'space directions'")
    if any(s <= 0 for s in spacing):
        raise NrrdFormatError(f"spacings must be positive, got {spacing}")
    return spacing


def load_nrrd(path, *, labels: bool = False) -> Volume:
    """Read a NRRD file (subset: 3-D, raw/gzip, attached, diagonal geometry).

    Returns a :class:`ScalarVolume` (float32) or, with ``labels=True``, a
    :class:`LabelVolume` (uint8; values are checked to fit).
    """
    with open(path, "rb") as f:
        fields, _ = _read_header(f)

        if "data file" in fields or "datafile" in fields:
            raise NrrdFormatError("detached data files are unsupported")

        for required in ("type", "dimension", "sizes", "encoding"):
            if required not in fields:
                raise NrrdFormatError(f"missing required header field '{required}'")

        if fields["dimension"].strip() != "3":
            raise NrrdFormatError(f"only 3-D volumes supported, got dimension {fields['dimension']!r}")

        type_key = fields["type"].strip().lower()
        if type_key not in _TYPE_ALIASES:
            raise NrrdFormatError(f"unsupported type {fields['type']!r}")
        kind = _TYPE_ALIASES[type_key]

        sizes_parts = fields["sizes"].split()
        if len(sizes_parts) != 3:
            raise NrrdFormatError(f"'sizes' must have 3 entries: {fields['sizes']!r}")
        try:
            nx, ny, nz = (int(p) for p in sizes_parts)
        except ValueError as exc:
            raise NrrdFormatError(f"non-integer entry in 'sizes': {fields['sizes']!r}") from exc
        if min(nx, ny, nz) < 1:
            raise NrrdFormatError(f"'sizes' entries must be >= 1: {fields['sizes']!r}")

        spacing = _spacing_from_fields(fields)

        origin = (0.0, 0.0, 0.0)
        if "space origin" in fields:
            vec = _parse_vector(fields["space origin"], fields["space origin"])
            if len(vec) != 3:
                raise NrrdFormatError(f"'space origin' must be a 3-vector: {fields['space origin']!r}")
            origin = vec

        endian = fields.get("endian", "little").strip().lower()
        if endian not in ("little", "big"):
            raise NrrdFormatError(f"unsupported endian {fields['endian']!r}")
        dtype = np.dtype(("<" if endian == "little" else ">") + kind)

        encoding = fields["encoding"].strip().lower()
        nbytes = nx * ny * nz * dtype.itemsize
        payload = f.read()
        if encoding in ("gzip", "gz"):
            try:
                payload = gzip.decompress(payload)
            except (OSError, EOFError) as exc:
                raise NrrdFormatError(f"gzip payload could not be decompressed: {exc}") from exc
        elif encoding != "raw":
            raise NrrdFormatError(f"unsupported encoding {fields['encoding']!r}")
        if len(payload) != nbytes:
            raise NrrdFormatError(
                f"truncated or oversized data: expected {nbytes} bytes, got {len(payload)}"
            )

    flat = np.frombuffer(payload, dtype=dtype)
    data = flat.reshape(nz, ny, nx)  # x-fastest on disk -> (z, y, x) in memory

    if labels:
        as_int = data.astype(np.int64)
        if not np.array_equal(as_int, data) or as_int.min() < 0 or as_int.max() > 255:
            raise NrrdFormatError("label volume holds values outside 0..255")
        return LabelVolume(data=as_int.astype(np.uint8), spacing=spacing, origin=origin)
    return ScalarVolume(data=data.astype(np.float32), spacing=spacing, origin=origin)


def save_nrrd(volume: Volume, path) -> None:
    """Write NRRD0004, raw encoding, little-endian, attached data.

    ``load_nrrd(save_nrrd(v))`` reproduces ``v`` bit-exactly.
    """
    if isinstance(volume, LabelVolume):
        type_name, dtype = "uint8", np.dtype("u1")
    else:
        type_name, dtype = "float", np.dtype("<f4")
    nx, ny, nz = volume.dims
    sx, sy, sz = volume.spacing
    ox, oy, oz = volume.origin
    header = (
        "NRRD0004\n"
        f"type: {type_name}\n"
        "dimension: 3\n"
        f"sizes: {nx} {ny} {nz}\n"
        f"spacings: {sx!r} {sy!r} {sz!r}\n"
        f"space origin: ({ox!r},{oy!r},{oz!r})\n"
        "endian: little\n"
        "encoding: raw\n"
        "\n"
    )
    try:
        with open(path, "wb") as f:
            f.write(header.encode("ascii"))
            f.write(np.ascontiguousarray(volume.data, dtype=dtype).tobytes())
    except OSError as exc:
        raise OSError(f"could not write NRRD to {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Resampling
# ---------------------------------------------------------------------------


def _output_dims(dims: tuple[int, int, int], spacing: Vec3, target: float) -> tuple[int, int, int]:
    if target <= 0:
        raise DegenerateTargetError(f"target spacing must be > 0, got {target}")
    out = []
    for n, s in zip(dims, spacing):
        raw = n * s / target
        rounded = math.floor(raw + 0.5)  # round half away from zero (raw > 0)
        if rounded == 0:
            raise DegenerateTargetError(
                f"target spacing {target} collapses an axis of extent {n}x{s}mm to zero voxels"
            )
        out.append(max(1, rounded))
    return tuple(out)


def _sample_coords(out_n: int, target: float, spacing: float, in_n: int) -> np.ndarray:
    # output voxel i center = origin + i*target  ->  input continuous index
    u = np.arange(out_n, dtype=np.float64) * (target / spacing)
    return np.clip(u, 0.0, float(in_n - 1))  # out-of-bounds samples clamp to the edge


def resample_isotropic(v: ScalarVolume, target: float, interp: str = "trilinear") -> ScalarVolume:
    """Resample to isotropic ``target`` mm spacing.

    Output dims are ``round(dim*spacing/target)`` (half away from zero, min 1);
    samples are taken at voxel-center physical coordinates, so resampling to
    the source spacing reproduces the source values.
    """
    if interp not in ("trilinear", "nearest"):
        raise ValueError(f"interp must be 'trilinear' or 'nearest', got {interp!r}")
    out_dims = _output_dims(v.dims, v.spacing, target)
    if interp == "nearest":
        data = _gather_nearest(v.data, v.dims, v.spacing, target, out_dims)
        return ScalarVolume(data=data, spacing=(target,) * 3, origin=v.origin)

    nx, ny, nz = v.dims
    ux = _sample_coords(out_dims[0], target, v.spacing[0], nx)
    uy = _sample_coords(out_dims[1], target, v.spacing[1], ny)
    uz = _sample_coords(out_dims[2], target, v.spacing[2], nz)

    src = v.data.astype(np.float64)
    out = np.zeros((out_dims[2], out_dims[1], out_dims[0]), dtype=np.float64)
    lo = [np.clip(np.floor(u).astype(np.int64), 0, n - 1) for u, n in zip((uz, uy, ux), (nz, ny, nx))]
    hi = [np.minimum(l + 1, n - 1) for l, n in zip(lo, (nz, ny, nx))]
    frac = [u - l for u, l in zip((uz, uy, ux), lo)]
    for dz in (0, 1):
        wz = frac[0] if dz else 1.0 - frac[0]
        iz = hi[0] if dz else lo[0]
        for dy in (0, 1):
            wy = frac[1] if dy else 1.0 - frac[1]
            iy = hi[1] if dy else lo[1]
            for dx in (0, 1):
                wx = frac[2] if dx else 1.0 - frac[2]
                ix = hi[2] if dx else lo[2]
                w = wz[:, None, None] * wy[None, :, None] * wx[None, None, :]
                out += w * src[np.ix_(iz, iy, ix)]
    return ScalarVolume(data=out.astype(np.float32), spacing=(target,) * 3, origin=v.origin)


def _gather_nearest(data, dims, spacing, target, out_dims):
    nx, ny, nz = dims
    idx = []
    for out_n, s, n in zip(out_dims, spacing, dims):
        u = _sample_coords(out_n, target, s, n)
        idx.append(np.clip(np.floor(u + 0.5).astype(np.int64), 0, n - 1))
    return data[np.ix_(idx[2], idx[1], idx[0])]


def resample_labels(v: LabelVolume, target: float) -> LabelVolume:
    """Nearest-neighbor isotropic resampling; never invents labels."""
    out_dims = _output_dims(v.dims, v.spacing, target)
    data = _gather_nearest(v.data, v.dims, v.spacing, target, out_dims)
    return LabelVolume(data=data, spacing=(target,) * 3, origin=v.origin)


# ---------------------------------------------------------------------------
# Slice extraction
# ---------------------------------------------------------------------------


def slice_shape(v: Volume, axis: str) -> tuple[int, int]:
    """(width, height) of a cross-section of ``v`` along ``axis``."""
    nx, ny, nz = v.dims
    if axis == "axial":
        return nx, ny
    if axis == "sagittal":
        return ny, nz
    if axis == "coronal":
        return nx, nz
    raise ValueError(f"axis must be one of {AXES}, got {axis!r}")


def slice_count(v: Volume, axis: str) -> int:
    """Number of slices along ``axis``."""
    return v.dims[_PLANE_FIXED_AXIS[axis]]


def extract_slice(v: Volume, plane: SlicePlane) -> Slice2D:
    """Pure read of one cross-section; ``values[v_row, u_col]`` indexing.

    In-plane axis order: axial -> (x, y), sagittal -> (y, z), coronal -> (x, z).
    """
    n_slices = slice_count(v, plane.axis)
    if not 0 <= plane.index < n_slices:
        raise IndexError(
            f"{plane.axis} index {plane.index} out of range [0, {n_slices})"
        )
    if plane.axis == "axial":
        values = v.data[plane.index, :, :]
    elif plane.axis == "sagittal":
        values = v.data[:, :, plane.index]
    else:  # coronal
        values = v.data[:, plane.index, :]
    width, height = slice_shape(v, plane.axis)
    return Slice2D(width=width, height=height, values=np.ascontiguousarray(values))
