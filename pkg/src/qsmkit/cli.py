"""Command-line pipeline front end.

Every subcommand accepts a JSON config file plus flag overrides (flags win),
rejects unknown config keys, and writes a resolved-config copy next to its
outputs so any run can be reproduced exactly from that file.  Exit codes:
0 success, 1 validation error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .augment import AugmentPlan, ScalingSpec, build_training_set, load_manifest
from .dipole import build_kernel, forward_field
from .fieldprep import PrepParams, laplacian_unwrap, phase_to_ppm, smv_background_removal
from .figures import render_histogram, render_sweep
from .invert import InversionParams, cosmos, tikhonov, tkd
from .lossmetrics import quality_metrics, total_loss
from .patches import (
    DEFAULT_OVERLAP,
    DEFAULT_PATCH_SIZE,
    compute_norm_stats,
    export_dataset,
)
from .phantom import (
    DEFAULT_SWEEP_PPM,
    LesionSpec,
    lesion_sweep,
    make_lesion_mask,
    save_sweep_report,
)
from .volume import Grid3, Volume, histogram, load_volume, masked_stats, save_volume

INVERT_METHODS = ("tkd", "tikhonov", "cosmos")


class CliError(Exception):
    """Invalid invocation or configuration (exit code 1)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); we map usage errors to 1
        raise CliError(message)


def _load_config(path: str | None, allowed: set[str]) -> dict:
    if path is None:
        return {}
    with open(path) as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CliError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise CliError(f"config {path} must be a JSON object")
    unknown = sorted(set(cfg) - allowed)
    if unknown:
        raise CliError(f"unknown config keys {unknown}; allowed keys: {sorted(allowed)}")
    return cfg


def _pick(cfg: dict, key: str, flag_value, default=None):
    if flag_value is not None:
        return flag_value
    return cfg.get(key, default)


def _require(value, name: str):
    if value is None:
        raise CliError(f"missing required parameter {name!r} (flag or config key)")
    return value


def _write_resolved(out_dir: Path, command: str, resolved: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{command}_config.json"
    with open(path, "w") as fh:
        json.dump(resolved, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _floats(text: str, n: int | None = None, name: str = "value list"):
    try:
        vals = tuple(float(p) for p in text.split(","))
    except ValueError as exc:
        raise CliError(f"{name} must be comma-separated numbers, got {text!r}") from exc
    if n is not None and len(vals) != n:
        raise CliError(f"{name} must have {n} components, got {len(vals)}")
    return vals


def _print_table(rows: dict[str, float]) -> None:
    width = max(len(k) for k in rows)
    for key, value in rows.items():
        print(f"{key:<{width}}  {value:.9g}")


# ---------------------------------------------------------------- subcommands


def _cmd_forward(args) -> int:
    allowed = {"chi", "out", "b0_dir"}
    cfg = _load_config(args.config, allowed)
    chi_path = _require(_pick(cfg, "chi", args.chi), "chi")
    out_path = Path(_require(_pick(cfg, "out", args.out), "out"))
    b0_flag = _floats(args.b0_dir, 3, "--b0-dir") if args.b0_dir else None
    b0 = _pick(cfg, "b0_dir", b0_flag)

    chi = load_volume(chi_path)
    kernel = build_kernel(chi.grid, None if b0 is None else tuple(b0))
    field = forward_field(chi, kernel)
    save_volume(field, out_path)
    _write_resolved(
        out_path.parent,
        "forward",
        {"chi": str(chi_path), "out": str(out_path), "b0_dir": None if b0 is None else list(b0)},
    )
    print(f"wrote {out_path}")
    return 0


def _cmd_prep(args) -> int:
    allowed = {"phase", "mask", "out_dir", "te_s", "b0_t", "smv_radii_mm", "tsvd_threshold"}
    cfg = _load_config(args.config, allowed)
    phase_path = _require(_pick(cfg, "phase", args.phase), "phase")
    mask_path = _require(_pick(cfg, "mask", args.mask), "mask")
    out_dir = Path(_require(_pick(cfg, "out_dir", args.out_dir), "out_dir"))
    radii_flag = _floats(args.smv_radii, name="--smv-radii") if args.smv_radii else None
    defaults = PrepParams()
    params = PrepParams(
        te_s=_pick(cfg, "te_s", args.te_s, defaults.te_s),
        b0_t=_pick(cfg, "b0_t", args.b0_t, defaults.b0_t),
        smv_radii_mm=tuple(_pick(cfg, "smv_radii_mm", radii_flag, defaults.smv_radii_mm)),
        tsvd_threshold=_pick(cfg, "tsvd_threshold", args.tsvd_threshold, defaults.tsvd_threshold),
    )

    phase = load_volume(phase_path)
    mask = load_volume(mask_path)
    unwrapped = laplacian_unwrap(phase, mask)
    field_ppm = phase_to_ppm(unwrapped, params)
    local, reliable = smv_background_removal(field_ppm, mask, params)
    save_volume(local, out_dir / "local_field")
    save_volume(reliable, out_dir / "reliability_mask")
    _write_resolved(
        out_dir,
        "prep",
        {
            "phase": str(phase_path),
            "mask": str(mask_path),
            "out_dir": str(out_dir),
            "te_s": params.te_s,
            "b0_t": params.b0_t,
            "smv_radii_mm": list(params.smv_radii_mm),
            "tsvd_threshold": params.tsvd_threshold,
        },
    )
    kept = int(np.count_nonzero(reliable.data))
    print(f"wrote {out_dir / 'local_field.f32'} ({kept} reliable voxels)")
    return 0


def _cmd_augment(args) -> int:
    allowed = {
        "maps",
        "out_dir",
        "n_orientations",
        "angle_range_deg",
        "factor",
        "region_rule",
        "include_sign_inverted",
        "seed",
    }
    cfg = _load_config(args.config, allowed)
    out_dir = Path(_require(_pick(cfg, "out_dir", args.out_dir), "out_dir"))
    if args.chi or args.mask:
        if not args.chi or not args.mask or len(args.chi) != len(args.mask):
            raise CliError("--chi and --mask must be given the same number of times")
        maps = [{"chi": c, "mask": m} for c, m in zip(args.chi, args.mask)]
    else:
        maps = cfg.get("maps")
    if not maps:
        raise CliError("no input maps: pass --chi/--mask pairs or a 'maps' config list")

    angle_flag = _floats(args.angle_range, 2, "--angle-range") if args.angle_range else None
    include = cfg.get("include_sign_inverted", True)
    if args.no_sign_inverted:
        include = False
    plan = AugmentPlan(
        n_orientations=int(_pick(cfg, "n_orientations", args.n_orientations, 5)),
        angle_range_deg=tuple(_pick(cfg, "angle_range_deg", angle_flag, (-30.0, 30.0))),
        scaling=ScalingSpec(
            factor=float(_pick(cfg, "factor", args.factor, 4.0)),
            region_rule=_pick(cfg, "region_rule", args.region_rule, "positive_only"),
        ),
        include_sign_inverted=bool(include),
        seed=int(_pick(cfg, "seed", args.seed, 0)),
    )

    loaded = [(load_volume(m["chi"]), load_volume(m["mask"])) for m in maps]
    manifest = build_training_set(loaded, plan, out_dir)
    _write_resolved(
        out_dir,
        "augment",
        {
            "maps": [{"chi": str(m["chi"]), "mask": str(m["mask"])} for m in maps],
            "out_dir": str(out_dir),
            "n_orientations": plan.n_orientations,
            "angle_range_deg": list(plan.angle_range_deg),
            "factor": plan.scaling.factor,
            "region_rule": plan.scaling.region_rule,
            "include_sign_inverted": plan.include_sign_inverted,
            "seed": plan.seed,
        },
    )
    print(f"wrote {len(manifest.entries)} chi/field pairs to {out_dir}")
    return 0


def _cmd_histogram(args) -> int:
    allowed = {"volume", "mask", "bin_width", "out_dir"}
    cfg = _load_config(args.config, allowed)
    vol_path = _require(_pick(cfg, "volume", args.volume), "volume")
    mask_path = _require(_pick(cfg, "mask", args.mask), "mask")
    bin_width = float(_require(_pick(cfg, "bin_width", args.bin_width), "bin_width"))
    out_dir = Path(_require(_pick(cfg, "out_dir", args.out_dir), "out_dir"))

    vol = load_volume(vol_path)
    mask = load_volume(mask_path)
    hist = histogram(vol, mask, bin_width)
    stats = masked_stats(vol, mask)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "histogram.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_lo", "bin_hi", "count"])
        for lo, hi, count in zip(hist.bin_edges[:-1], hist.bin_edges[1:], hist.counts):
            writer.writerow([lo, hi, int(count)])
    doc = {
        "bin_width": hist.bin_width,
        "total": hist.total,
        "pct_bounds": {"p01": hist.pct_bounds[1.0], "p99": hist.pct_bounds[99.0]},
        "stats": stats,
    }
    with open(out_dir / "histogram.json", "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    render_histogram(hist, out_dir / "histogram.png")
    _write_resolved(
        out_dir,
        "histogram",
        {
            "volume": str(vol_path),
            "mask": str(mask_path),
            "bin_width": bin_width,
            "out_dir": str(out_dir),
        },
    )
    print(f"{hist.total} voxels in {hist.counts.size} bins -> {out_dir / 'histogram.csv'}")
    return 0


def _invert_params(cfg: dict, args) -> InversionParams:
    defaults = InversionParams()
    return InversionParams(
        tkd_threshold=float(_pick(cfg, "tkd_threshold", args.tkd_threshold, defaults.tkd_threshold)),
        tikhonov_alpha=float(_pick(cfg, "tikhonov_alpha", args.alpha, defaults.tikhonov_alpha)),
        cosmos_threshold=float(
            _pick(cfg, "cosmos_threshold", args.cosmos_threshold, defaults.cosmos_threshold)
        ),
    )


def _cmd_invert(args) -> int:
    allowed = {"method", "fields", "out", "tkd_threshold", "tikhonov_alpha", "cosmos_threshold"}
    cfg = _load_config(args.config, allowed)
    method = _require(_pick(cfg, "method", args.method), "method")
    if method not in INVERT_METHODS:
        raise CliError(f"unknown method {method!r}: valid methods are {', '.join(INVERT_METHODS)}")
    field_paths = args.field or cfg.get("fields")
    if not field_paths:
        raise CliError("no input fields: pass --field (repeatable) or a 'fields' config list")
    out_path = Path(_require(_pick(cfg, "out", args.out), "out"))
    params = _invert_params(cfg, args)

    fields = [load_volume(p) for p in field_paths]
    kernels = [build_kernel(f.grid) for f in fields]
    if method == "cosmos":
        chi = cosmos(fields, kernels, params)
    else:
        if len(fields) != 1:
            raise CliError(f"method {method!r} takes exactly one field, got {len(fields)}")
        fn = tkd if method == "tkd" else tikhonov
        chi = fn(fields[0], kernels[0], params)
    save_volume(chi, out_path)
    _write_resolved(
        out_path.parent,
        "invert",
        {
            "method": method,
            "fields": [str(p) for p in field_paths],
            "out": str(out_path),
            "tkd_threshold": params.tkd_threshold,
            "tikhonov_alpha": params.tikhonov_alpha,
            "cosmos_threshold": params.cosmos_threshold,
        },
    )
    print(f"wrote {out_path}")
    return 0


def _cmd_lesion_sweep(args) -> int:
    allowed = {
        "grid",
        "base_field",
        "lesion",
        "methods",
        "values_ppm",
        "seed",
        "noise_enabled",
        "tkd_threshold",
        "tikhonov_alpha",
        "cosmos_threshold",
        "external",
        "out_dir",
    }
    cfg = _load_config(args.config, allowed)
    out_dir = Path(_require(_pick(cfg, "out_dir", args.out_dir), "out_dir"))

    base_path = cfg.get("base_field")
    if base_path is not None:
        base = load_volume(base_path)
        grid = base.grid
    else:
        grid_cfg = cfg.get("grid", {})
        unknown = sorted(set(grid_cfg) - {"dims", "voxel_size_mm", "b0_dir"})
        if unknown:
            raise CliError(f"unknown grid config keys {unknown}")
        grid = Grid3(
            dims=tuple(int(d) for d in grid_cfg.get("dims", (64, 64, 64))),
            voxel_size_mm=tuple(float(v) for v in grid_cfg.get("voxel_size_mm", (1.0, 1.0, 1.0))),
            b0_dir=tuple(float(b) for b in grid_cfg.get("b0_dir", (0.0, 0.0, 1.0))),
        )
        base = Volume(grid=grid, kind="field", data=np.zeros(grid.dims))

    lesion_cfg = cfg.get("lesion", {})
    unknown = sorted(set(lesion_cfg) - {"center_vox", "radii_vox"})
    if unknown:
        raise CliError(f"unknown lesion config keys {unknown}")
    center = tuple(int(c) for c in lesion_cfg.get("center_vox", tuple(d // 2 for d in grid.dims)))
    radii = tuple(float(r) for r in lesion_cfg.get("radii_vox", (6.0, 6.0, 6.0)))
    spec = LesionSpec(center_vox=center, radii_vox=radii)
    lesion_mask = make_lesion_mask(grid, spec)
    kernel = build_kernel(grid)

    values_flag = _floats(args.values, name="--values") if args.values else None
    values = list(_pick(cfg, "values_ppm", values_flag, DEFAULT_SWEEP_PPM))
    methods = list(_pick(cfg, "methods", args.method or None, ["tkd", "tikhonov"]))
    seed = int(_pick(cfg, "seed", args.seed, 0))
    noise_enabled = bool(cfg.get("noise_enabled", True))
    if args.no_noise:
        noise_enabled = False
    params = _invert_params(cfg, args)
    external_cfg = cfg.get("external", {})
    external = {
        name: [load_volume(p) for p in paths] for name, paths in external_cfg.items()
    }

    report = lesion_sweep(
        base,
        lesion_mask,
        kernel,
        methods,
        values,
        params,
        seed=seed,
        noise_enabled=noise_enabled,
        external=external,
    )
    save_sweep_report(report, out_dir)
    render_sweep(report, out_dir / "sweep.png")
    _write_resolved(
        out_dir,
        "lesion_sweep",
        {
            "grid": {
                "dims": list(grid.dims),
                "voxel_size_mm": list(grid.voxel_size_mm),
                "b0_dir": list(grid.b0_dir),
            },
            "base_field": None if base_path is None else str(base_path),
            "lesion": {"center_vox": list(center), "radii_vox": list(radii)},
            "methods": methods,
            "values_ppm": values,
            "seed": seed,
            "noise_enabled": noise_enabled,
            "tkd_threshold": params.tkd_threshold,
            "tikhonov_alpha": params.tikhonov_alpha,
            "cosmos_threshold": params.cosmos_threshold,
            "external": {k: [str(p) for p in v] for k, v in external_cfg.items()},
            "out_dir": str(out_dir),
        },
    )
    for method in methods:
        reg = report.regression[method]
        print(
            f"{method}: slope {reg.slope:.4f}, intercept {reg.intercept:.4f}, "
            f"r2 {reg.r_squared:.4f}, rmse {report.rmse_ppm[method]:.4f} ppm"
        )
    return 0


def _cmd_metrics(args) -> int:
    allowed = {"recon", "reference", "mask", "out_dir"}
    cfg = _load_config(args.config, allowed)
    recon_path = _require(_pick(cfg, "recon", args.recon), "recon")
    ref_path = _require(_pick(cfg, "reference", args.reference), "reference")
    mask_path = _require(_pick(cfg, "mask", args.mask), "mask")
    out_dir = Path(_pick(cfg, "out_dir", args.out_dir, "."))

    m = quality_metrics(load_volume(recon_path), load_volume(ref_path), load_volume(mask_path))
    rows = {"psnr_db": m.psnr_db, "nrmse": m.nrmse, "hfen": m.hfen, "ssim": m.ssim}
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "metrics.json", "w") as fh:
        json.dump(rows, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_resolved(
        out_dir,
        "metrics",
        {
            "recon": str(recon_path),
            "reference": str(ref_path),
            "mask": str(mask_path),
            "out_dir": str(out_dir),
        },
    )
    _print_table(rows)
    return 0


def _cmd_loss(args) -> int:
    allowed = {"chi", "label", "field", "mask", "out_dir"}
    cfg = _load_config(args.config, allowed)
    chi_path = _require(_pick(cfg, "chi", args.chi), "chi")
    label_path = _require(_pick(cfg, "label", args.label), "label")
    field_path = _require(_pick(cfg, "field", args.field), "field")
    mask_path = _require(_pick(cfg, "mask", args.mask), "mask")
    out_dir = Path(_pick(cfg, "out_dir", args.out_dir, "."))

    chi = load_volume(chi_path)
    breakdown = total_loss(
        chi,
        load_volume(label_path),
        load_volume(field_path),
        load_volume(mask_path),
        build_kernel(chi.grid),
    )
    rows = {
        "model": breakdown.model,
        "l1": breakdown.l1,
        "gradient": breakdown.gradient,
        "total": breakdown.total,
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "loss.json", "w") as fh:
        json.dump({**rows, "weights": list(breakdown.weights)}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_resolved(
        out_dir,
        "loss",
        {
            "chi": str(chi_path),
            "label": str(label_path),
            "field": str(field_path),
            "mask": str(mask_path),
            "out_dir": str(out_dir),
        },
    )
    _print_table(rows)
    return 0


def _cmd_patches(args) -> int:
    allowed = {"manifest", "out_dir", "patch_size", "overlap"}
    cfg = _load_config(args.config, allowed)
    manifest_path = _require(_pick(cfg, "manifest", args.manifest), "manifest")
    out_dir = Path(_require(_pick(cfg, "out_dir", args.out_dir), "out_dir"))
    patch_size = int(_pick(cfg, "patch_size", args.patch_size, DEFAULT_PATCH_SIZE))
    overlap = float(_pick(cfg, "overlap", args.overlap, DEFAULT_OVERLAP))

    manifest = load_manifest(manifest_path)
    compute_norm_stats(manifest)
    index = export_dataset(manifest, out_dir, patch_size, overlap)
    _write_resolved(
        out_dir,
        "patches",
        {
            "manifest": str(manifest_path),
            "out_dir": str(out_dir),
            "patch_size": patch_size,
            "overlap": overlap,
        },
    )
    print(f"wrote {sum(index.counts)} patches ({len(index.counts)} shards) to {out_dir}")
    return 0


# -------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="qsmkit",
        description="Susceptibility-mapping pipeline: forward dipole model, field "
        "preprocessing, training-set augmentation, classical inversions, and reports.",
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=1,
        help="worker cap for parallel stages (the current implementation runs serially)",
    )
    sub = parser.add_subparsers(dest="command", metavar="command")

    def add(name: str, func, help_text: str):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file; flags override its keys")
        p.set_defaults(func=func)
        return p

    p = add("forward", _cmd_forward, "compute the dipole field of a susceptibility map")
    p.add_argument("--chi", help="input chi volume (.f32 + sidecar)")
    p.add_argument("--out", help="output field volume path")
    p.add_argument("--b0-dir", help="override field direction, e.g. 0,0,1")

    p = add("prep", _cmd_prep, "wrapped phase -> unwrapped, ppm-scaled local field")
    p.add_argument("--phase", help="wrapped phase volume")
    p.add_argument("--mask", help="binary mask volume")
    p.add_argument("--out-dir", help="output directory")
    p.add_argument("--te-s", type=float, help="echo time in seconds")
    p.add_argument("--b0-t", type=float, help="field strength in tesla")
    p.add_argument("--smv-radii", help="descending kernel radii in mm, e.g. 25,24,...,1")
    p.add_argument("--tsvd-threshold", type=float, help="deconvolution truncation threshold")

    p = add("augment", _cmd_augment, "build the oriented/scaled/inverted training set")
    p.add_argument("--chi", action="append", help="input chi volume (repeat per map)")
    p.add_argument("--mask", action="append", help="input mask volume (repeat per map)")
    p.add_argument("--out-dir", help="output directory")
    p.add_argument("--n-orientations", type=int, help="orientations per input map")
    p.add_argument("--angle-range", help="rotation angle range in degrees, e.g. -30,30")
    p.add_argument("--factor", type=float, help="susceptibility scaling factor (>= 1)")
    p.add_argument("--region-rule", choices=["positive_only", "all_voxels"])
    p.add_argument("--no-sign-inverted", action="store_true", help="skip inverted branches")
    p.add_argument("--seed", type=int, help="rotation seed")

    p = add("histogram", _cmd_histogram, "in-mask value histogram (CSV, JSON, PNG)")
    p.add_argument("--volume", help="volume to histogram")
    p.add_argument("--mask", help="binary mask volume")
    p.add_argument("--bin-width", type=float, help="bin width in volume units")
    p.add_argument("--out-dir", help="output directory")

    p = add("invert", _cmd_invert, "reconstruct susceptibility from local field(s)")
    p.add_argument("--method", choices=list(INVERT_METHODS))
    p.add_argument("--field", action="append", help="input field volume (repeat for cosmos)")
    p.add_argument("--out", help="output chi volume path")
    p.add_argument("--tkd-threshold", type=float)
    p.add_argument("--alpha", type=float, help="tikhonov regularization weight")
    p.add_argument("--cosmos-threshold", type=float)

    p = add("lesion-sweep", _cmd_lesion_sweep, "assigned-vs-measured linearity sweep")
    p.add_argument("--out-dir", help="output directory")
    p.add_argument("--method", action="append", help="method to sweep (repeatable)")
    p.add_argument("--values", help="assigned ppm values, e.g. -1.4,-1.2,...,1.4")
    p.add_argument("--seed", type=int, help="lesion noise seed")
    p.add_argument("--no-noise", action="store_true", help="disable lesion noise")
    p.add_argument("--tkd-threshold", type=float)
    p.add_argument("--alpha", type=float, help="tikhonov regularization weight")
    p.add_argument("--cosmos-threshold", type=float)

    p = add("metrics", _cmd_metrics, "pSNR/NRMSE/HFEN/SSIM against a reference")
    p.add_argument("--recon", help="reconstruction volume")
    p.add_argument("--reference", help="reference volume")
    p.add_argument("--mask", help="binary mask volume")
    p.add_argument("--out-dir", help="output directory (default: current)")

    p = add("loss", _cmd_loss, "training loss breakdown for a chi/label/field triple")
    p.add_argument("--chi", help="predicted chi volume")
    p.add_argument("--label", help="label chi volume")
    p.add_argument("--field", help="measured field volume")
    p.add_argument("--mask", help="binary mask volume")
    p.add_argument("--out-dir", help="output directory (default: current)")

    p = add("patches", _cmd_patches, "normalize and export training patches")
    p.add_argument("--manifest", help="manifest.json from the augment step")
    p.add_argument("--out-dir", help="output directory")
    p.add_argument("--patch-size", type=int)
    p.add_argument("--overlap", type=float)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.threads < 1:
            raise CliError(f"--threads must be >= 1, got {args.threads}")
        if not hasattr(args, "func"):
            parser.print_usage(sys.stderr)
            print("error: a subcommand is required", file=sys.stderr)
            return 1
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
