"""Synthetic ellipsoidal lesions and the assigned-vs-measured susceptibility
sweep used to quantify reconstruction linearity."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dipole import DipoleKernel, forward_field
from .invert import InversionParams, tikhonov, tkd
from .lossmetrics import RegressionResult, linear_regression, sweep_rmse
from .volume import Grid3, Volume, _check_geometry

DEFAULT_SWEEP_PPM = tuple(round(0.2 * (i - 7), 1) for i in range(15))  # -1.4 .. 1.4
BUILTIN_METHODS = ("tkd", "tikhonov")


@dataclass(frozen=True)
class LesionSpec:
    center_vox: tuple[int, int, int]
    radii_vox: tuple[float, float, float]
    chi_assigned_ppm: float = 1.0
    noise_seed: int = 0

    def __post_init__(self):
        if any(r <= 0 for r in self.radii_vox):
            raise ValueError(f"radii must be > 0, got {self.radii_vox}")


@dataclass(frozen=True)
class SweepReport:
    assigned_ppm: tuple[float, ...]
    measured_ppm: dict[str, tuple[float, ...]]
    rmse_ppm: dict[str, float]
    regression: dict[str, RegressionResult]


def make_lesion_mask(grid: Grid3, spec: LesionSpec) -> Volume:
    """Binary ellipsoid: 1 where sum(((x - c) / r)^2) <= 1."""
    for c, r, n in zip(spec.center_vox, spec.radii_vox, grid.dims):
        if c - r < 0 or c + r > n - 1:
            raise ValueError(
                f"ellipsoid (center {spec.center_vox}, radii {spec.radii_vox}) "
                f"exceeds grid dims {grid.dims}"
            )
    axes = [
        ((np.arange(n, dtype=np.float64) - c) / r) ** 2
        for n, c, r in zip(grid.dims, spec.center_vox, spec.radii_vox)
    ]
    ax, ay, az = np.meshgrid(*axes, indexing="ij")
    return Volume(grid=grid, kind="mask", data=(ax + ay + az <= 1.0).astype(np.float64))


def simulate_lesion(
    base_field: Volume,
    lesion_mask: Volume,
    chi_ppm: float,
    kernel: DipoleKernel,
    seed: int,
    noise_enabled: bool = True,
) -> Volume:
    """Add the dipole field of a noisy ellipsoidal lesion to a base field.

    Lesion susceptibility is chi_ppm plus per-voxel Gaussian noise of
    standard deviation |chi_ppm|/2 (zero noise when disabled or chi_ppm = 0).
    """
    if lesion_mask.kind != "mask":
        raise ValueError(f"expected a mask volume, got kind {lesion_mask.kind!r}")
    _check_geometry(base_field, lesion_mask)
    m = lesion_mask.data > 0
    chi = np.zeros(base_field.grid.dims, dtype=np.float64)
    std = abs(chi_ppm) / 2.0 if noise_enabled else 0.0
    rng = np.random.default_rng(seed)
    values = np.full(int(m.sum()), float(chi_ppm))
    if std > 0.0:
        values += rng.normal(0.0, std, size=values.size)
    chi[m] = values
    lesion_field = forward_field(Volume(grid=base_field.grid, kind="chi", data=chi), kernel)
    return Volume(
        grid=base_field.grid,
        kind="field",
        data=base_field.astype64() + lesion_field.astype64(),
    )


def lesion_sweep(
    base_field: Volume,
    lesion_mask: Volume,
    kernel: DipoleKernel,
    methods: list[str],
    values_ppm=DEFAULT_SWEEP_PPM,
    params: InversionParams = InversionParams(),
    seed: int = 0,
    noise_enabled: bool = True,
    external: dict[str, list[Volume]] | None = None,
) -> SweepReport:
    """Assigned-vs-measured sweep over a list of lesion susceptibilities.

    For each assigned value the lesion is simulated (fresh seed per value),
    reconstructed with every requested method, and summarized by the ROI mean
    inside the lesion mask.  External reconstructions (one volume per
    assigned value, produced by any method outside this package) join the
    report under their own method names.
    """
    values = [float(v) for v in values_ppm]
    if not values:
        raise ValueError("values_ppm is empty")
    external = external or {}
    for name in methods:
        if name not in BUILTIN_METHODS and name not in external:
            raise ValueError(
                f"unknown method {name!r}: expected one of {list(BUILTIN_METHODS)} "
                "or a supplied external reconstruction"
            )
    for name, vols in external.items():
        if len(vols) != len(values):
            raise ValueError(
                f"external method {name!r} supplies {len(vols)} volumes "
                f"for {len(values)} assigned values"
            )

    m = lesion_mask.data > 0
    value_seeds = np.random.SeedSequence(seed).generate_state(len(values))
    measured: dict[str, list[float]] = {name: [] for name in methods}
    for i, v in enumerate(values):
        field = simulate_lesion(
            base_field, lesion_mask, v, kernel, int(value_seeds[i]), noise_enabled
        )
        for name in methods:
            if name == "tkd":
                recon = tkd(field, kernel, params)
            elif name == "tikhonov":
                recon = tikhonov(field, kernel, params)
            else:
                recon = external[name][i]
                _check_geometry(recon, lesion_mask)
            measured[name].append(float(recon.astype64()[m].mean()))

    # regression is undefined for a single (or constant) assigned list
    can_regress = len(values) >= 2 and max(values) > min(values)
    return SweepReport(
        assigned_ppm=tuple(values),
        measured_ppm={k: tuple(vs) for k, vs in measured.items()},
        rmse_ppm={k: sweep_rmse(values, vs) for k, vs in measured.items()},
        regression=(
            {k: linear_regression(values, vs) for k, vs in measured.items()}
            if can_regress
            else {}
        ),
    )


def save_sweep_report(report: SweepReport, out_dir: Path) -> tuple[Path, Path]:
    """Write the sweep as JSON (full report) and CSV (assigned,method,measured)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / "sweep.json"
    csv_path = out_dir / "sweep.csv"
    doc = {
        "assigned_ppm": list(report.assigned_ppm),
        "measured_ppm": {k: list(v) for k, v in report.measured_ppm.items()},
        "rmse_ppm": report.rmse_ppm,
        "regression": {
            k: {"slope": r.slope, "intercept": r.intercept, "r_squared": r.r_squared}
            for k, r in report.regression.items()
        },
    }
    with open(json_path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["assigned", "method", "measured"])
        for method in report.measured_ppm:
            for a, m in zip(report.assigned_ppm, report.measured_ppm[method]):
                writer.writerow([a, method, m])
    return json_path, csv_path
