"""Patch extraction and export for external trainers: pooled normalization
statistics, overlapping 3-D patch grids, and float32 shard files."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .augment import DatasetManifest, NormStats, _entry_volumes
from .volume import Volume, masked_values

DEFAULT_PATCH_SIZE = 64
DEFAULT_OVERLAP = 0.66


@dataclass(frozen=True)
class PatchIndex:
    patch_size: int
    stride: int
    origins: tuple[tuple[tuple[int, int, int], ...], ...]  # per source volume
    counts: tuple[int, ...]


def compute_norm_stats(manifest: DatasetManifest) -> NormStats:
    """Pooled in-mask mean/std of the chi and field channels.

    Accumulates first and second moments across every manifest entry and
    writes the result back into the manifest object.  The manifest file on
    disk is left untouched; exported patch indexes carry the stats.
    """
    if not manifest.entries:
        raise ValueError("manifest has no entries")
    sums = {"chi": 0.0, "field": 0.0}
    sq_sums = {"chi": 0.0, "field": 0.0}
    n = 0
    for entry in manifest.entries:
        chi, field, mask = _entry_volumes(manifest, entry)
        cv = masked_values(chi, mask)
        fv = masked_values(field, mask)
        sums["chi"] += float(cv.sum())
        sq_sums["chi"] += float((cv * cv).sum())
        sums["field"] += float(fv.sum())
        sq_sums["field"] += float((fv * fv).sum())
        n += cv.size
    chi_mean = sums["chi"] / n
    field_mean = sums["field"] / n
    chi_var = sq_sums["chi"] / n - chi_mean**2
    field_var = sq_sums["field"] / n - field_mean**2
    if chi_var <= 0.0 or field_var <= 0.0:
        raise ValueError("zero variance over the pooled in-mask voxels")
    stats = NormStats(
        chi_mean=chi_mean,
        chi_std=math.sqrt(chi_var),
        field_mean=field_mean,
        field_std=math.sqrt(field_var),
    )
    manifest.norm_stats = stats
    return stats


def _stats_for(stats: NormStats, which: str) -> tuple[float, float]:
    if which == "chi":
        return stats.chi_mean, stats.chi_std
    if which == "field":
        return stats.field_mean, stats.field_std
    raise ValueError(f"channel must be 'chi' or 'field', got {which!r}")


def normalize(v: Volume, stats: NormStats, which: str) -> Volume:
    mean, std = _stats_for(stats, which)
    return Volume(grid=v.grid, kind=v.kind, data=(v.astype64() - mean) / std)


def denormalize(v: Volume, stats: NormStats, which: str) -> Volume:
    mean, std = _stats_for(stats, which)
    return Volume(grid=v.grid, kind=v.kind, data=v.astype64() * std + mean)


def patch_stride(patch_size: int, overlap: float) -> int:
    return max(1, math.floor(patch_size * (1.0 - overlap)))


def _axis_origins(dim: int, patch_size: int, stride: int) -> list[int]:
    last = dim - patch_size
    origins = list(range(0, last + 1, stride))
    if origins[-1] != last:
        origins.append(last)  # snap a final patch to the far face
    return origins


def patch_origins(dims, patch_size: int, overlap: float) -> list[tuple[int, int, int]]:
    """Sorted grid of patch origins covering every voxel of the volume."""
    if not 0.0 <= overlap < 1.0:
        raise ValueError(f"overlap must be in [0, 1), got {overlap}")
    if any(d < patch_size for d in dims):
        raise ValueError(f"dims {tuple(dims)} smaller than patch size {patch_size}")
    stride = patch_stride(patch_size, overlap)
    per_axis = [_axis_origins(d, patch_size, stride) for d in dims]
    return [(x, y, z) for x in per_axis[0] for y in per_axis[1] for z in per_axis[2]]


def extract_patches(
    chi: Volume,
    field: Volume,
    mask: Volume,
    stats: NormStats,
    patch_size: int = DEFAULT_PATCH_SIZE,
    overlap: float = DEFAULT_OVERLAP,
) -> list[tuple[np.ndarray, np.ndarray, np.ndarray, tuple[int, int, int]]]:
    """Normalized (chi, field, mask, origin) patches; empty-mask patches dropped.

    Normalization happens in float64 so denormalizing a patch recovers the
    source voxels to full double precision (the float32 rounding happens only
    when shards are written).
    """
    chi_n = (chi.astype64() - stats.chi_mean) / stats.chi_std
    field_n = (field.astype64() - stats.field_mean) / stats.field_std
    m = mask.astype64()
    out = []
    for origin in patch_origins(chi.grid.dims, patch_size, overlap):
        sl = tuple(slice(o, o + patch_size) for o in origin)
        mp = m[sl]
        if not (mp > 0).any():
            continue
        out.append((chi_n[sl], field_n[sl], mp, origin))
    return out


def export_dataset(
    manifest: DatasetManifest,
    out_dir: Path,
    patch_size: int = DEFAULT_PATCH_SIZE,
    overlap: float = DEFAULT_OVERLAP,
) -> PatchIndex:
    """Write patch shards plus a `patches.json` index.

    One shard file per manifest entry; each record is the chi, field, and
    mask patch in that order, float32 little-endian, C-order voxels
    (3 * patch_size^3 values per record).
    """
    if manifest.norm_stats is None:
        raise ValueError("manifest has no normalization stats; compute them first")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stats = manifest.norm_stats

    all_origins: list[tuple[tuple[int, int, int], ...]] = []
    counts: list[int] = []
    shards: list[dict] = []
    for i, entry in enumerate(manifest.entries):
        chi, field, mask = _entry_volumes(manifest, entry)
        patches = extract_patches(chi, field, mask, stats, patch_size, overlap)
        shard_name = f"shard_{i:03d}.bin"
        with open(out_dir / shard_name, "wb") as fh:
            for chi_p, field_p, mask_p, _ in patches:
                for arr in (chi_p, field_p, mask_p):
                    fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())
        origins = tuple(p[3] for p in patches)
        all_origins.append(origins)
        counts.append(len(origins))
        shards.append(
            {
                "file": shard_name,
                "source_chi": entry.chi_path,
                "origins": [list(o) for o in origins],
                "count": len(origins),
            }
        )

    index = PatchIndex(
        patch_size=patch_size,
        stride=patch_stride(patch_size, overlap),
        origins=tuple(all_origins),
        counts=tuple(counts),
    )
    doc = {
        "patch_size": patch_size,
        "overlap": overlap,
        "stride": index.stride,
        "record_layout": "chi,field,mask float32 little-endian C-order",
        "norm_stats": {
            "chi_mean": stats.chi_mean,
            "chi_std": stats.chi_std,
            "field_mean": stats.field_mean,
            "field_std": stats.field_std,
        },
        "meta": manifest.meta,
        "shards": shards,
    }
    with open(out_dir / "patches.json", "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    return index


def read_shard_record(
    shard_path: Path, record_index: int, patch_size: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Read one (chi, field, mask) record back from a shard file."""
    voxels = patch_size**3
    record_bytes = 3 * voxels * 4
    with open(shard_path, "rb") as fh:
        fh.seek(record_index * record_bytes)
        buf = fh.read(record_bytes)
    if len(buf) != record_bytes:
        raise ValueError(f"shard {shard_path} has no record {record_index}")
    flat = np.frombuffer(buf, dtype="<f4")
    shape = (patch_size,) * 3
    return (
        flat[:voxels].reshape(shape).astype(np.float64),
        flat[voxels : 2 * voxels].reshape(shape).astype(np.float64),
        flat[2 * voxels :].reshape(shape).astype(np.float64),
    )
