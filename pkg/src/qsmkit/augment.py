"""Training-set assembly: susceptibility scaling, sign inversion, extra head
orientations, and a manifest of physically self-consistent chi/field pairs."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .dipole import build_kernel, forward_field, rotation_from_euler, rotate_volume
from .volume import Volume, load_volume, masked_values, mirror_asymmetry, save_volume

REGION_RULES = ("positive_only", "all_voxels")
BRANCHES = ("original", "scaled", "inverted", "scaled_inverted")

# Training hyperparameters recorded in every manifest for downstream trainers.
TRAINING_META = {
    "patch_size": 64,
    "overlap": 0.66,
    "epochs": 25,
    "learning_rate": 1e-3,
    "lr_decay": 0.95,
    "lr_decay_steps": 600,
    "batch_size": 12,
    "loss_weights": [0.5, 1.0, 0.1],
}


@dataclass(frozen=True)
class ScalingSpec:
    """Voxel-wise susceptibility scaling: multiply by `factor` inside the
    selected region (positive voxels by default), leave the rest untouched."""

    factor: float = 4.0
    region_rule: str = "positive_only"

    def __post_init__(self):
        if self.factor < 1.0:
            raise ValueError(f"scaling factor must be >= 1, got {self.factor}")
        if self.region_rule not in REGION_RULES:
            raise ValueError(f"region_rule must be one of {REGION_RULES}, got {self.region_rule!r}")


@dataclass(frozen=True)
class AugmentPlan:
    n_orientations: int = 5
    angle_range_deg: tuple[float, float] = (-30.0, 30.0)
    scaling: ScalingSpec = ScalingSpec()
    include_sign_inverted: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_orientations < 1:
            raise ValueError(f"n_orientations must be >= 1, got {self.n_orientations}")
        lo, hi = self.angle_range_deg
        if not lo < hi:
            raise ValueError(f"angle range must satisfy lo < hi, got ({lo}, {hi})")


@dataclass(frozen=True)
class NormStats:
    """Pooled in-mask mean/std used to normalize chi and field channels."""

    chi_mean: float
    chi_std: float
    field_mean: float
    field_std: float

    def __post_init__(self):
        if self.chi_std <= 0 or self.field_std <= 0:
            raise ValueError("normalization std values must be > 0")


@dataclass(frozen=True)
class ManifestEntry:
    chi_path: str
    field_path: str
    mask_path: str
    branch: str
    rotation: tuple[tuple[float, float, float], ...]
    lambda_applied: float


@dataclass
class DatasetManifest:
    entries: list[ManifestEntry]
    norm_stats: NormStats | None = None
    meta: dict = dc_field(default_factory=lambda: dict(TRAINING_META))
    base_dir: Path | None = None  # directory the entry paths are relative to


def scale_map(chi: Volume, spec: ScalingSpec) -> Volume:
    """Multiply the selected voxels by the scaling factor.

    positive_only leaves non-positive voxels bit-identical; factor 1 is the
    identity for any input.
    """
    if chi.kind != "chi":
        raise ValueError(f"expected a chi volume, got kind {chi.kind!r}")
    d = chi.data
    f = np.float32(spec.factor)
    if spec.region_rule == "positive_only":
        out = np.where(d > 0, f * d, d)
    else:
        out = f * d
    return Volume(grid=chi.grid, kind="chi", data=out)


def sign_invert(chi: Volume) -> Volume:
    if chi.kind != "chi":
        raise ValueError(f"expected a chi volume, got kind {chi.kind!r}")
    return Volume(grid=chi.grid, kind="chi", data=-chi.data)


def make_orientations(
    chi: Volume, mask: Volume, plan: AugmentPlan
) -> list[tuple[Volume, Volume, np.ndarray]]:
    """Original plus n-1 randomly rotated copies of a chi/mask pair.

    Per-axis rotation angles (applied z, then y, then x) are drawn uniformly
    from the plan's angle range with the plan's seed, so the rotation set is
    reproducible and shared by every branch derived from this input.
    """
    rng = np.random.default_rng(plan.seed)
    out: list[tuple[Volume, Volume, np.ndarray]] = [(chi, mask, np.eye(3))]
    lo, hi = plan.angle_range_deg
    for _ in range(plan.n_orientations - 1):
        z_deg, y_deg, x_deg = rng.uniform(lo, hi, size=3)
        rot = rotation_from_euler(z_deg, y_deg, x_deg)
        out.append((rotate_volume(chi, rot), rotate_volume(mask, rot), rot))
    return out


def _branch_chis(chi_masked: Volume, plan: AugmentPlan) -> list[tuple[str, Volume, float]]:
    factor = plan.scaling.factor
    branches = [("original", chi_masked, 1.0)]
    scaled = scale_map(chi_masked, plan.scaling) if factor > 1.0 else None
    if scaled is not None:
        branches.append(("scaled", scaled, factor))
    if plan.include_sign_inverted:
        branches.append(("inverted", sign_invert(chi_masked), 1.0))
        if scaled is not None:
            branches.append(("scaled_inverted", sign_invert(scaled), factor))
    return branches


def build_training_set(
    cosmos_maps: list[tuple[Volume, Volume]], plan: AugmentPlan, out_dir: Path
) -> DatasetManifest:
    """Expand (chi, mask) inputs into the oriented/scaled/inverted dataset.

    Every emitted chi map is masked, and its field is synthesized with the
    dipole forward model, so each pair is physically consistent by
    construction.  Entry order is input, then orientation, then branch.
    """
    if not cosmos_maps:
        raise ValueError("need at least one (chi, mask) input map")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    # independent, reproducible rotation seed per input map
    map_seeds = np.random.SeedSequence(plan.seed).generate_state(len(cosmos_maps))

    entries: list[ManifestEntry] = []
    for i, (chi, mask) in enumerate(cosmos_maps):
        if chi.kind != "chi" or mask.kind != "mask":
            raise ValueError(f"input {i} must be a (chi, mask) pair")
        map_plan = dataclasses.replace(plan, seed=int(map_seeds[i]))
        for j, (chi_rot, mask_rot, rot) in enumerate(make_orientations(chi, mask, map_plan)):
            kernel = build_kernel(chi_rot.grid)
            chi_masked = Volume(
                grid=chi_rot.grid, kind="chi", data=chi_rot.astype64() * mask_rot.astype64()
            )
            mask_name = f"map{i:02d}_o{j}_mask"
            save_volume(mask_rot, out_dir / mask_name)
            for branch, chi_b, lam in _branch_chis(chi_masked, map_plan):
                field = forward_field(chi_b, kernel)
                chi_name = f"map{i:02d}_o{j}_{branch}_chi"
                field_name = f"map{i:02d}_o{j}_{branch}_field"
                save_volume(chi_b, out_dir / chi_name)
                save_volume(field, out_dir / field_name)
                entries.append(
                    ManifestEntry(
                        chi_path=chi_name + ".f32",
                        field_path=field_name + ".f32",
                        mask_path=mask_name + ".f32",
                        branch=branch,
                        rotation=tuple(tuple(float(x) for x in row) for row in rot),
                        lambda_applied=float(lam),
                    )
                )

    manifest = DatasetManifest(entries=entries, base_dir=out_dir)
    save_manifest(manifest, out_dir / "manifest.json")
    return manifest


def save_manifest(manifest: DatasetManifest, path: Path) -> None:
    path = Path(path)
    doc = {
        "entries": [
            {
                "chi_path": e.chi_path,
                "field_path": e.field_path,
                "mask_path": e.mask_path,
                "branch": e.branch,
                "rotation": [list(row) for row in e.rotation],
                "lambda_applied": e.lambda_applied,
            }
            for e in manifest.entries
        ],
        "norm_stats": None
        if manifest.norm_stats is None
        else {
            "chi_mean": manifest.norm_stats.chi_mean,
            "chi_std": manifest.norm_stats.chi_std,
            "field_mean": manifest.norm_stats.field_mean,
            "field_std": manifest.norm_stats.field_std,
        },
        "meta": manifest.meta,
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_manifest(path: Path) -> DatasetManifest:
    path = Path(path)
    with open(path) as fh:
        doc = json.load(fh)
    try:
        entries = [
            ManifestEntry(
                chi_path=e["chi_path"],
                field_path=e["field_path"],
                mask_path=e["mask_path"],
                branch=e["branch"],
                rotation=tuple(tuple(float(x) for x in row) for row in e["rotation"]),
                lambda_applied=float(e["lambda_applied"]),
            )
            for e in doc["entries"]
        ]
        stats = doc.get("norm_stats")
        norm_stats = None if stats is None else NormStats(**stats)
        meta = doc.get("meta", {})
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed manifest {path}: {exc}") from exc
    return DatasetManifest(entries=entries, norm_stats=norm_stats, meta=meta, base_dir=path.parent)


def _entry_volumes(manifest: DatasetManifest, entry: ManifestEntry) -> tuple[Volume, Volume, Volume]:
    if manifest.base_dir is None:
        raise ValueError("manifest has no base directory; load it from disk first")
    base = Path(manifest.base_dir)
    chi = load_volume(base / entry.chi_path)
    field = load_volume(base / entry.field_path)
    mask = load_volume(base / entry.mask_path)
    return chi, field, mask


def verify_symmetry(manifest: DatasetManifest, bin_width: float) -> dict:
    """Histogram mirror check of the pooled in-mask chi values.

    Exact sign-inverted branches make the pooled value multiset symmetric
    about 0, so the maximum bin-count asymmetry must be 0.
    """
    if not any(e.branch in ("inverted", "scaled_inverted") for e in manifest.entries):
        raise ValueError("manifest has no sign-inverted branches to balance the histogram")
    pooled: list[np.ndarray] = []
    for entry in manifest.entries:
        chi, _, mask = _entry_volumes(manifest, entry)
        pooled.append(masked_values(chi, mask))
    values = np.concatenate(pooled)
    if values.size == 0:
        raise ValueError("no in-mask voxels across the manifest")
    return {"max_bin_asymmetry": int(mirror_asymmetry(values, bin_width))}
