"""Volume container, raw binary I/O, and masked statistics.

Volumes are stored as float32, x-fastest on disk, with a JSON sidecar
describing geometry (`<name>.f32` + `<name>.json`).  Everything in this
module is deterministic and round-trips bit-exactly, which the rest of
the package leans on for reproducibility checks.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

KINDS = ("chi", "field", "phase", "magnitude", "mask")


@dataclass(frozen=True)
class Grid3:
    """Sampling geometry: dims, voxel size in mm, and the B0 unit direction."""

    dims: tuple[int, int, int]
    voxel_size_mm: tuple[float, float, float] = (1.0, 1.0, 1.0)
    b0_dir: tuple[float, float, float] = (0.0, 0.0, 1.0)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        vox = tuple(float(v) for v in self.voxel_size_mm)
        if len(dims) != 3 or any(d < 1 for d in dims):
            raise ValueError(f"dims must be three integers >= 1, got {self.dims}")
        if len(vox) != 3 or any(v <= 0 for v in vox):
            raise ValueError(f"voxel sizes must be > 0, got {self.voxel_size_mm}")
        b0 = np.asarray(self.b0_dir, dtype=float)
        norm = float(np.linalg.norm(b0))
        if b0.shape != (3,) or norm == 0.0:
            raise ValueError(f"b0_dir must be a nonzero triple, got {self.b0_dir}")
        if abs(norm - 1.0) > 1e-12:  # keep already-unit vectors bit-stable
            b0 = b0 / norm
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "voxel_size_mm", vox)
        object.__setattr__(self, "b0_dir", (float(b0[0]), float(b0[1]), float(b0[2])))

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.dims

    @property
    def voxel_count(self) -> int:
        nx, ny, nz = self.dims
        return nx * ny * nz

    def same_geometry(self, other: "Grid3") -> bool:
        """True when dims and voxel sizes agree (b0_dir may differ)."""
        return self.dims == other.dims and self.voxel_size_mm == other.voxel_size_mm


def _check_geometry(a: "Volume", b: "Volume", what: str = "volumes") -> None:
    if not a.grid.same_geometry(b.grid):
        raise ValueError(
            f"grid mismatch between {what}: {a.grid.dims}/{a.grid.voxel_size_mm} "
            f"vs {b.grid.dims}/{b.grid.voxel_size_mm}"
        )


@dataclass(frozen=True)
class Volume:
    """A scalar 3D map on a Grid3.

    Data is kept as float32 (the on-disk precision) and marked read-only;
    operations return new Volumes.  chi/field are in ppm, phase in radians,
    magnitude/mask dimensionless.  Masks may contain only 0 and 1.
    """

    grid: Grid3
    kind: str
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown volume kind {self.kind!r}; expected one of {KINDS}")
        arr = np.array(self.data, dtype=np.float32, copy=True, order="C")
        if arr.shape != self.grid.dims:
            raise ValueError(f"data shape {arr.shape} does not match grid dims {self.grid.dims}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("volume contains NaN or Inf values")
        if self.kind == "mask" and not _is_binary(arr):
            raise ValueError("mask volume contains values outside {0, 1}")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    def astype64(self) -> np.ndarray:
        """Float64 working copy for numerics."""
        return self.data.astype(np.float64)


def _is_binary(arr: np.ndarray) -> bool:
    return bool(np.all((arr == 0.0) | (arr == 1.0)))


def volume_like(ref: Volume, data: np.ndarray, kind: str | None = None) -> Volume:
    """New Volume on ref's grid (kind defaults to ref's)."""
    return Volume(grid=ref.grid, kind=kind if kind is not None else ref.kind, data=data)


# ---------------------------------------------------------------------------
# binary I/O: <name>.f32 payload (little-endian float32, x fastest) + sidecar
# ---------------------------------------------------------------------------

def _paths_for(path: str | Path) -> tuple[Path, Path]:
    p = Path(path)
    if p.suffix == ".f32":
        stem = p.with_suffix("")
    elif p.suffix == ".json":
        stem = p.with_suffix("")
    else:
        stem = p
    return stem.with_suffix(".f32"), stem.with_suffix(".json")


def save_volume(v: Volume, path: str | Path) -> None:
    """Write payload and sidecar; load_volume inverts this bit-exactly."""
    payload_path, sidecar_path = _paths_for(path)
    header = {
        "dims": list(v.grid.dims),
        "voxel_size_mm": list(v.grid.voxel_size_mm),
        "b0_dir": list(v.grid.b0_dir),
        "kind": v.kind,
    }
    # x-fastest layout: Fortran-order ravel of the (nx, ny, nz) array
    raw = np.ascontiguousarray(v.data.ravel(order="F")).astype("<f4")
    payload_path.parent.mkdir(parents=True, exist_ok=True)
    payload_path.write_bytes(raw.tobytes())
    sidecar_path.write_text(json.dumps(header, indent=2) + "\n")


def load_volume(path: str | Path) -> Volume:
    """Read a volume written by save_volume.

    Raises FileNotFoundError for missing files and ValueError for a payload
    that disagrees with its sidecar (size, non-finite values, bad mask).
    """
    payload_path, sidecar_path = _paths_for(path)
    if not sidecar_path.exists():
        raise FileNotFoundError(f"missing sidecar header {sidecar_path}")
    if not payload_path.exists():
        raise FileNotFoundError(f"missing volume payload {payload_path}")
    header = json.loads(sidecar_path.read_text())
    try:
        dims = tuple(int(d) for d in header["dims"])
        vox = tuple(float(x) for x in header["voxel_size_mm"])
        b0 = tuple(float(x) for x in header["b0_dir"])
        kind = str(header["kind"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"sidecar {sidecar_path} is malformed: {exc}") from exc
    raw = np.frombuffer(payload_path.read_bytes(), dtype="<f4")
    expected = dims[0] * dims[1] * dims[2]
    if raw.size != expected:
        raise ValueError(
            f"{payload_path}: payload has {raw.size} elements, header dims {dims} "
            f"require {expected}"
        )
    data = raw.reshape(dims, order="F")
    grid = Grid3(dims=dims, voxel_size_mm=vox, b0_dir=b0)
    return Volume(grid=grid, kind=kind, data=data)


# ---------------------------------------------------------------------------
# masked statistics and histograms
# ---------------------------------------------------------------------------

def masked_values(v: Volume, m: Volume) -> np.ndarray:
    """Float64 vector of v's samples where the mask is 1."""
    if m.kind != "mask":
        raise ValueError(f"expected a mask volume, got kind {m.kind!r}")
    _check_geometry(v, m)
    sel = m.data > 0
    if not sel.any():
        raise ValueError("mask is empty")
    return v.data[sel].astype(np.float64)


def _nearest_rank(sorted_vals: np.ndarray, pct: float) -> float:
    """Nearest-rank percentile of an ascending array."""
    n = sorted_vals.size
    rank = max(1, math.ceil(pct / 100.0 * n))
    return float(sorted_vals[min(rank, n) - 1])


def masked_stats(v: Volume, m: Volume) -> dict[str, float]:
    """Mean, population std, min/max, and 1st/99th nearest-rank percentiles
    over in-mask voxels."""
    vals = np.sort(masked_values(v, m))
    return {
        "mean": float(vals.mean()),
        "std": float(vals.std()),  # population convention (divide by N)
        "min": float(vals[0]),
        "max": float(vals[-1]),
        "p01": _nearest_rank(vals, 1.0),
        "p99": _nearest_rank(vals, 99.0),
    }


@dataclass(frozen=True)
class Histogram:
    """Fixed-width histogram with 0 ppm on a bin edge."""

    bin_width: float
    bin_edges: np.ndarray
    counts: np.ndarray
    total: int
    pct_bounds: dict[float, float]


def _bin_indices(vals: np.ndarray, bin_width: float) -> np.ndarray:
    # Edges sit at integer multiples of bin_width; a value in [k*w, (k+1)*w)
    # lands in bin k, so 0 ppm is always exactly on an edge.
    return np.floor(vals / bin_width).astype(np.int64)


def histogram(v: Volume, m: Volume, bin_width: float) -> Histogram:
    """Histogram of in-mask values with bins anchored so 0 ppm is an edge."""
    if bin_width <= 0:
        raise ValueError(f"bin_width must be > 0, got {bin_width}")
    vals = masked_values(v, m)
    idx = _bin_indices(vals, bin_width)
    k_lo = int(idx.min())
    k_hi = int(idx.max())
    counts = np.bincount(idx - k_lo, minlength=k_hi - k_lo + 1)
    edges = (np.arange(k_lo, k_hi + 2, dtype=np.float64)) * bin_width
    svals = np.sort(vals)
    pct_bounds = {1.0: _nearest_rank(svals, 1.0), 99.0: _nearest_rank(svals, 99.0)}
    return Histogram(
        bin_width=float(bin_width),
        bin_edges=edges,
        counts=counts,
        total=int(vals.size),
        pct_bounds=pct_bounds,
    )


def mirror_asymmetry(vals: np.ndarray, bin_width: float) -> int:
    """Max |counts(b) - counts(-b)| between a sample and its negation.

    Mirror counts are obtained by binning the negated sample with the same
    edge rule, so a sample that is exactly sign-symmetric as a multiset
    reports 0 even when values (e.g. 0.0) sit exactly on bin edges.
    """
    vals = np.asarray(vals, dtype=np.float64)
    if vals.size == 0:
        raise ValueError("empty sample")
    idx_pos = _bin_indices(vals, bin_width)
    idx_neg = _bin_indices(-vals, bin_width)
    k_lo = int(min(idx_pos.min(), idx_neg.min()))
    k_hi = int(max(idx_pos.max(), idx_neg.max()))
    n = k_hi - k_lo + 1
    c_pos = np.bincount(idx_pos - k_lo, minlength=n)
    c_neg = np.bincount(idx_neg - k_lo, minlength=n)
    return int(np.abs(c_pos - c_neg).max())
