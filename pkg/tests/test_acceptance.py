"""End-to-end checks of the package's headline guarantees.

Every test in this module measures one guarantee at its stated tolerance and
emits a single PASS/FAIL summary line (collected by conftest and printed
after the run), so the whole contract is auditable at a glance.
"""

import json
import math
import time

import numpy as np

from conftest import record_criterion
from qsmkit import (
    AugmentPlan,
    InversionParams,
    LesionSpec,
    NormStats,
    ScalingSpec,
    Volume,
    build_kernel,
    build_training_set,
    cosmos,
    extract_patches,
    forward_field,
    laplacian_unwrap,
    lesion_sweep,
    load_manifest,
    load_volume,
    loss_gradient,
    loss_l1,
    loss_model,
    make_lesion_mask,
    masked_values,
    quality_metrics,
    save_volume,
    scale_map,
    smv_background_removal,
    tikhonov,
    tkd,
    total_loss,
    verify_symmetry,
)
from qsmkit.cli import main as cli_main
from qsmkit.fieldprep import PrepParams
from helpers import (
    analytic_sphere_field,
    ball_mask,
    cosmos_triad_case,
    cube_grid,
    ones_mask,
    radius_from,
    rel_l2,
    smooth_chi,
    sphere_chi,
)


def _report(num: int, label: str, checks: list[tuple[bool, str]]) -> None:
    ok = all(passed for passed, _ in checks)
    verdict = "PASS" if ok else "FAIL"
    line = f"criterion {num:02d} {verdict} ({label}): " + "; ".join(d for _, d in checks)
    record_criterion(line)
    assert ok, line


def test_criterion_01_sphere_forward():
    g = cube_grid(64)
    center, a = (32.0, 32.0, 32.0), 10.0
    chi = sphere_chi(g, center, a)
    kernel = build_kernel(g)
    t0 = time.perf_counter()
    field = forward_field(chi, kernel)
    elapsed = time.perf_counter() - t0
    expected = analytic_sphere_field(g, center, a)
    r = radius_from(g.dims, center)
    # outer cap keeps the comparison clear of wrap-around neighbor images
    annulus = (r >= a + 2.0) & (r <= 24.0)
    ext = rel_l2(field.astype64()[annulus], expected[annulus])
    interior = float(np.abs(field.astype64()[r <= a - 2.0]).mean())
    _report(
        1,
        "uniform-sphere forward field",
        [
            (ext < 0.05, f"exterior rel L2 {ext:.4f} < 0.05"),
            (interior < 0.02, f"interior mean |field| {interior:.5f} ppm < 0.02"),
            (elapsed < 1.0, f"forward runtime {elapsed:.3f} s < 1 s"),
        ],
    )


def test_criterion_02_multi_orientation_exactness():
    chi, fields, kernels = cosmos_triad_case()
    rec = cosmos(fields, kernels)
    nrmse = rel_l2(rec.astype64(), chi.astype64())
    _report(
        2,
        "three-orientation reconstruction",
        [(nrmse < 0.01, f"NRMSE {nrmse:.5f} < 0.01")],
    )


def test_criterion_03_linearity_sweep():
    g = cube_grid(64)
    kernel = build_kernel(g)
    mask = make_lesion_mask(
        g, LesionSpec(center_vox=(32, 32, 32), radii_vox=(6.0, 6.0, 6.0))
    )
    base = Volume(grid=g, kind="field", data=np.zeros(g.dims))
    params = InversionParams(tikhonov_alpha=1e-4)
    clean = lesion_sweep(
        base, mask, kernel, ["tikhonov"], params=params, noise_enabled=False
    )
    noisy = lesion_sweep(
        base, mask, kernel, ["tikhonov"], params=params, seed=0, noise_enabled=True
    )
    creg = clean.regression["tikhonov"]
    nreg = noisy.regression["tikhonov"]
    crmse = clean.rmse_ppm["tikhonov"]
    _report(
        3,
        "assigned-vs-measured linearity",
        [
            (0.9 <= creg.slope <= 1.1, f"noiseless slope {creg.slope:.4f} in [0.9, 1.1]"),
            (creg.r_squared > 0.99, f"noiseless r2 {creg.r_squared:.5f} > 0.99"),
            (crmse < 0.1, f"noiseless rmse {crmse:.4f} ppm < 0.1"),
            (0.85 <= nreg.slope <= 1.15, f"noisy slope {nreg.slope:.4f} in [0.85, 1.15]"),
        ],
    )


def test_criterion_04_scaling_exactness(tmp_path):
    g = cube_grid(16)
    chi = smooth_chi(g, seed=21)
    out = scale_map(chi, ScalingSpec(factor=4.0))
    pos = chi.data > 0
    pos_exact = bool(np.array_equal(out.data[pos], (np.float32(4.0) * chi.data)[pos]))
    neg_exact = bool(np.array_equal(out.data[~pos], chi.data[~pos]))
    identity = bool(
        np.array_equal(scale_map(chi, ScalingSpec(factor=1.0)).data, chi.data)
    )
    plan = AugmentPlan(n_orientations=2, seed=6)
    manifest = build_training_set(
        [(chi, ball_mask(g, (7.5, 7.5, 7.5), 6.0))], plan, tmp_path
    )
    asym = verify_symmetry(manifest, bin_width=0.01)["max_bin_asymmetry"]
    _report(
        4,
        "susceptibility scaling exactness",
        [
            (pos_exact, "positive voxels scaled by the exact float product"),
            (neg_exact, "non-positive voxels bit-identical"),
            (identity, "factor 1 is the identity"),
            (asym == 0, f"pooled histogram asymmetry {asym} == 0"),
        ],
    )


def test_criterion_05_dataset_consistency(tmp_path):
    g = cube_grid(16)
    maps = [
        (smooth_chi(g, seed=30 + i), ball_mask(g, (7.5, 7.5, 7.5), 6.5))
        for i in range(5)
    ]
    plan = AugmentPlan(n_orientations=5, seed=3)
    build_training_set(maps, plan, tmp_path)
    manifest = load_manifest(tmp_path / "manifest.json")
    n_entries = len(manifest.entries)
    n_scaled = sum(1 for e in manifest.entries if e.branch == "scaled")
    worst = 0.0
    for e in manifest.entries:
        chi = load_volume(tmp_path / e.chi_path)
        field = load_volume(tmp_path / e.field_path)
        redo = forward_field(chi, build_kernel(chi.grid))
        scale = float(np.abs(field.astype64()).max())
        err = float(np.abs(field.astype64() - redo.astype64()).max())
        worst = max(worst, err / scale if scale > 0.0 else math.inf)
    _report(
        5,
        "training-set physical consistency",
        [
            (n_entries == 100, f"5 maps x 5 orientations x 4 branches = {n_entries} entries (want 100)"),
            (n_scaled == 25, f"{n_scaled} scaled entries (want 25)"),
            (worst < 1e-6, f"worst max|field - forward(chi)| / max|field| = {worst:.2e} < 1e-6"),
        ],
    )


def _naive_loss_oracles(chi, label, field, mask, kernel):
    x = chi.astype64()
    y = label.astype64()
    f = field.astype64()
    m = mask.astype64()
    predicted = forward_field(chi, kernel).astype64()
    nx, ny, nz = x.shape

    model_terms = []
    l1_terms = []
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                model_terms.append(abs(m[i, j, k] * (f[i, j, k] - predicted[i, j, k])))
                l1_terms.append(abs(x[i, j, k] - y[i, j, k]))
    model = math.fsum(model_terms) / (nx * ny * nz)
    l1 = math.fsum(l1_terms) / (nx * ny * nz)

    grad = 0.0
    for axis in range(3):
        terms = []
        for i in range(nx):
            for j in range(ny):
                for k in range(nz):
                    idx = [i, j, k]
                    nxt = list(idx)
                    nxt[axis] += 1
                    if nxt[axis] >= x.shape[axis]:
                        dx = 0.0
                        dy = 0.0
                    else:
                        dx = x[tuple(nxt)] - x[i, j, k]
                        dy = y[tuple(nxt)] - y[i, j, k]
                    terms.append(abs(abs(dx) - abs(dy)))
        grad += math.fsum(terms) / (nx * ny * nz)
    return model, l1, grad


def test_criterion_06_loss_correctness():
    g = cube_grid(16)
    kernel = build_kernel(g)
    label = smooth_chi(g, seed=40)
    field = forward_field(label, kernel)
    mask = ball_mask(g, (7.5, 7.5, 7.5), 6.0)
    self_zero = loss_model(label, field, mask, kernel)

    chi = smooth_chi(g, seed=41)
    got = total_loss(chi, label, field, mask, kernel)
    weights_exact = got.total == 0.5 * got.model + 1.0 * got.l1 + 0.1 * got.gradient

    n_model, n_l1, n_grad = _naive_loss_oracles(chi, label, field, mask, kernel)

    def rel(a, b):
        return abs(a - b) / abs(b)

    d_model = rel(loss_model(chi, field, mask, kernel), n_model)
    d_l1 = rel(loss_l1(chi, label), n_l1)
    d_grad = rel(loss_gradient(chi, label), n_grad)
    worst = max(d_model, d_l1, d_grad)
    _report(
        6,
        "loss functional correctness",
        [
            (self_zero == 0.0, f"self-consistent pair model loss {self_zero} == 0"),
            (weights_exact, "total == 0.5*model + 1*l1 + 0.1*gradient exactly"),
            (worst <= 1e-12, f"worst naive-oracle rel err {worst:.2e} <= 1e-12"),
        ],
    )


def _naive_conv(a, kern):
    size = kern.shape[0]
    half = size // 2
    padded = np.pad(a, half)
    out = np.zeros_like(a)
    nx, ny, nz = a.shape
    for i in range(size):
        for j in range(size):
            for k in range(size):
                w = kern[i, j, k]
                out += w * padded[i : i + nx, j : j + ny, k : k + nz]
    return out


def _naive_metrics(recon, reference, mask):
    m = mask.data > 0
    x = recon.astype64()
    y = reference.astype64()
    xv, yv = x[m], y[m]
    value_range = float(yv.max() - yv.min())
    mse = float(np.mean((xv - yv) ** 2))
    psnr = 300.0 if mse == 0.0 else 10.0 * math.log10(value_range**2 / mse)
    nrmse = math.sqrt(float(np.sum((xv - yv) ** 2))) / math.sqrt(float(np.sum(yv * yv)))

    half = 7
    ax = np.arange(-half, half + 1, dtype=np.float64)
    gx, gy, gz = np.meshgrid(ax, ax, ax, indexing="ij")
    r2 = gx * gx + gy * gy + gz * gz
    sigma = 1.5
    w = np.exp(-r2 / (2.0 * sigma**2))
    w /= w.sum()
    log = w * (r2 - 3.0 * sigma**2) / sigma**4
    log -= log.mean()
    xm = x * m
    ym = y * m
    hx = _naive_conv(xm, log)
    hy = _naive_conv(ym, log)
    hfen = math.sqrt(float(np.sum((hx[m] - hy[m]) ** 2))) / math.sqrt(
        float(np.sum(hy[m] ** 2))
    )

    half = 6
    ax = np.arange(-half, half + 1, dtype=np.float64)
    gx, gy, gz = np.meshgrid(ax, ax, ax, indexing="ij")
    win = np.exp(-(gx * gx + gy * gy + gz * gz) / (2.0 * sigma**2))
    win /= win.sum()
    c1 = (0.01 * value_range) ** 2
    c2 = (0.03 * value_range) ** 2
    mu_x = _naive_conv(xm, win)
    mu_y = _naive_conv(ym, win)
    var_x = _naive_conv(xm * xm, win) - mu_x * mu_x
    var_y = _naive_conv(ym * ym, win) - mu_y * mu_y
    cov = _naive_conv(xm * ym, win) - mu_x * mu_y
    ssim_map = ((2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)) / (
        (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    )
    ssim = float(min(1.0, max(0.0, ssim_map[m].mean())))
    return psnr, nrmse, hfen, ssim


def test_criterion_07_metric_suite():
    g = cube_grid(32)
    rng = np.random.default_rng(50)
    x = Volume(grid=g, kind="chi", data=rng.normal(0.0, 0.1, size=g.dims))
    y = Volume(grid=g, kind="chi", data=rng.normal(0.0, 0.1, size=g.dims))
    mask = ball_mask(g, (15.5, 15.5, 15.5), 14.0)

    ident = quality_metrics(x, x, mask)
    identity_ok = (
        ident.psnr_db == 300.0
        and ident.nrmse == 0.0
        and ident.hfen == 0.0
        and ident.ssim == 1.0
    )

    gg = cube_grid(16)
    ref_data = (np.random.default_rng(51).random(gg.dims) > 0.5).astype(np.float64)
    ref = Volume(grid=gg, kind="chi", data=ref_data)
    recon = Volume(grid=gg, kind="chi", data=ref_data + 0.1)
    psnr20 = quality_metrics(recon, ref, ones_mask(gg)).psnr_db

    got = quality_metrics(x, y, mask)
    naive = _naive_metrics(x, y, mask)
    pairs = list(zip((got.psnr_db, got.nrmse, got.hfen, got.ssim), naive))
    worst = max(abs(a - b) / max(1.0, abs(b)) for a, b in pairs)
    _report(
        7,
        "image quality metrics",
        [
            (identity_ok, "identical inputs -> (300 dB, 0, 0, 1) exactly"),
            (abs(psnr20 - 20.0) < 1e-5, f"range 1 / MSE 0.01 -> pSNR {psnr20:.6f} dB (want 20)"),
            (worst <= 1e-9, f"worst naive-reimplementation rel err {worst:.2e} <= 1e-9"),
        ],
    )


def test_criterion_08_inversion_linearity():
    g = cube_grid(32)
    kz = build_kernel(g)
    kx = build_kernel(g, b0_dir=(1.0, 0.0, 0.0))
    chi = smooth_chi(g, seed=60)
    fz = forward_field(chi, kz)
    fx = forward_field(chi, kx)
    worst = {"tkd": 0.0, "tikhonov": 0.0, "cosmos": 0.0}
    for a in (-2.0, 0.5, 4.0):
        saz = Volume(grid=g, kind="field", data=np.float32(a) * fz.data)
        sax = Volume(grid=g, kind="field", data=np.float32(a) * fx.data)
        cases = {
            "tkd": (tkd(saz, kz), tkd(fz, kz)),
            "tikhonov": (tikhonov(saz, kz), tikhonov(fz, kz)),
            "cosmos": (cosmos([saz, sax], [kz, kx]), cosmos([fz, fx], [kz, kx])),
        }
        for name, (lhs, rhs) in cases.items():
            scaled = a * rhs.astype64()
            err = float(np.linalg.norm(lhs.astype64() - scaled) / np.linalg.norm(scaled))
            worst[name] = max(worst[name], err)
    _report(
        8,
        "inversion linearity",
        [
            (worst[name] <= 1e-9, f"{name} worst rel err {worst[name]:.2e} <= 1e-9")
            for name in ("tkd", "tikhonov", "cosmos")
        ],
    )


def test_criterion_09_field_preparation():
    g = cube_grid(64)
    r = radius_from(g.dims, (32.0, 32.0, 32.0))
    true_phase = 6.0 * np.pi * np.maximum(0.0, 1.0 - (r / 24.0) ** 2)
    wrapped = np.angle(np.exp(1j * true_phase))
    unwrapped = laplacian_unwrap(
        Volume(grid=g, kind="phase", data=wrapped), ones_mask(g)
    ).astype64()
    core = r <= 14.0
    diff = unwrapped[core] - true_phase[core]
    diff -= diff.mean()
    unwrap_rmse = float(np.sqrt(np.mean(diff**2)))

    mask = ball_mask(g, (32.0, 32.0, 32.0), 28.0)
    params = PrepParams(smv_radii_mm=(12.0, 10.0, 8.0, 6.0, 4.0, 2.0, 1.0))
    background = 8.0 * analytic_sphere_field(g, (32.0, 32.0, 63.0), 3.0)
    field = Volume(grid=g, kind="field", data=background * (mask.data > 0))
    local, reliable = smv_background_removal(field, mask, params)
    rel = reliable.data > 0
    residual = float(
        np.linalg.norm(local.astype64()[rel]) / np.linalg.norm(field.astype64()[rel])
    )
    _report(
        9,
        "phase unwrapping and background removal",
        [
            (unwrap_rmse < 1e-2, f"6-pi quadratic unwrap interior RMSE {unwrap_rmse:.2e} rad < 1e-2"),
            (residual < 0.05, f"external-source residual {residual:.4f} < 0.05"),
        ],
    )


def test_criterion_10_patch_pipeline():
    g = cube_grid(128)
    chi = smooth_chi(g, seed=70, sigma=3.0)
    field = forward_field(chi, build_kernel(g))
    mask = ones_mask(g)
    cv = masked_values(chi, mask)
    fv = masked_values(field, mask)
    stats = NormStats(
        chi_mean=float(cv.mean()),
        chi_std=float(cv.std()),
        field_mean=float(fv.mean()),
        field_std=float(fv.std()),
    )
    patches = extract_patches(chi, field, mask, stats)  # 64 / 0.66 defaults
    count = len(patches)
    coverage = np.zeros(g.dims, dtype=np.int16)
    chi64 = chi.astype64()
    scale = float(np.abs(chi64).max())
    worst = 0.0
    for chi_p, _, _, origin in patches:
        sl = tuple(slice(o, o + 64) for o in origin)
        coverage[sl] += 1
        back = chi_p * stats.chi_std + stats.chi_mean
        worst = max(worst, float(np.abs(back - chi64[sl]).max()))
    roundtrip = worst / scale
    min_cover = int(coverage.min())
    _report(
        10,
        "patch extraction and normalization",
        [
            (count == 125, f"patch count {count} (want 125)"),
            (min_cover >= 1, f"minimum voxel coverage {min_cover} >= 1"),
            (roundtrip < 1e-9, f"denormalization max rel err {roundtrip:.2e} < 1e-9"),
        ],
    )


def _snapshot(root):
    return {
        p.relative_to(root).as_posix(): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


def test_criterion_11_cli_determinism(tmp_path):
    g = cube_grid(12)
    save_volume(smooth_chi(g, seed=80), tmp_path / "in_chi")
    save_volume(ball_mask(g, (5.5, 5.5, 5.5), 5.0), tmp_path / "in_mask")
    data_dir = tmp_path / "data"
    aug = [
        "augment",
        "--chi", str(tmp_path / "in_chi.f32"),
        "--mask", str(tmp_path / "in_mask.f32"),
        "--out-dir", str(data_dir),
        "--n-orientations", "2",
        "--seed", "7",
    ]
    assert cli_main(aug) == 0
    snap_a1 = _snapshot(data_dir)
    assert cli_main(aug) == 0
    snap_a2 = _snapshot(data_dir)

    patch_dir = tmp_path / "patches"
    pat = [
        "patches",
        "--manifest", str(data_dir / "manifest.json"),
        "--out-dir", str(patch_dir),
        "--patch-size", "8",
        "--overlap", "0.5",
    ]
    assert cli_main(pat) == 0
    snap_p1 = _snapshot(patch_dir)
    assert cli_main(pat) == 0
    snap_p2 = _snapshot(patch_dir)

    sweep_dir = tmp_path / "sweep"
    cfg = tmp_path / "sweep_cfg.json"
    cfg.write_text(
        json.dumps(
            {
                "grid": {"dims": [32, 32, 32]},
                "lesion": {"center_vox": [16, 16, 16], "radii_vox": [4.0, 4.0, 4.0]},
                "values_ppm": [-1.0, 0.0, 1.0],
                "methods": ["tkd"],
                "seed": 0,
                "out_dir": str(sweep_dir),
            }
        )
    )
    sweep = ["lesion-sweep", "--config", str(cfg)]
    assert cli_main(sweep) == 0
    snap_s1 = _snapshot(sweep_dir)
    assert cli_main(sweep) == 0
    snap_s2 = _snapshot(sweep_dir)

    _report(
        11,
        "pipeline rerun determinism",
        [
            (snap_a1 == snap_a2, f"augment rerun byte-identical ({len(snap_a1)} files)"),
            (snap_p1 == snap_p2, f"patches rerun byte-identical ({len(snap_p1)} files)"),
            (snap_s1 == snap_s2, f"lesion-sweep rerun byte-identical ({len(snap_s1)} files)"),
        ],
    )
