import csv
import json

import numpy as np
import pytest

from qsmkit import (
    InversionParams,
    LesionSpec,
    Volume,
    build_kernel,
    lesion_sweep,
    make_lesion_mask,
    save_sweep_report,
    simulate_lesion,
)
from qsmkit.phantom import DEFAULT_SWEEP_PPM
from helpers import cube_grid, rel_l2, smooth_chi


def _zero_field(g):
    return Volume(grid=g, kind="field", data=np.zeros(g.dims))


def test_lesion_spec_validation():
    with pytest.raises(ValueError):
        LesionSpec(center_vox=(8, 8, 8), radii_vox=(0.0, 1.0, 1.0))
    spec = LesionSpec(center_vox=(8, 8, 8), radii_vox=(2.0, 2.0, 2.0))
    assert spec.chi_assigned_ppm == 1.0


def test_lesion_mask_voxel_counts():
    g = cube_grid(64)
    # unit radius: center plus the six face neighbors
    tiny = make_lesion_mask(g, LesionSpec(center_vox=(32, 32, 32), radii_vox=(1.0, 1.0, 1.0)))
    assert int(tiny.data.sum()) == 7
    # sub-voxel radius: only the center voxel survives
    dot = make_lesion_mask(g, LesionSpec(center_vox=(32, 32, 32), radii_vox=(0.4, 0.4, 0.4)))
    assert int(dot.data.sum()) == 1
    # r=10 ball occupies ~ 4/3 pi r^3 voxels
    ball = make_lesion_mask(g, LesionSpec(center_vox=(32, 32, 32), radii_vox=(10.0, 10.0, 10.0)))
    count = int(ball.data.sum())
    assert abs(count - 4.0 / 3.0 * np.pi * 1000.0) / (4.0 / 3.0 * np.pi * 1000.0) < 0.02


def test_lesion_mask_bounds_check():
    g = cube_grid(16)
    with pytest.raises(ValueError):
        make_lesion_mask(g, LesionSpec(center_vox=(2, 8, 8), radii_vox=(3.0, 3.0, 3.0)))
    with pytest.raises(ValueError):
        make_lesion_mask(g, LesionSpec(center_vox=(8, 8, 14), radii_vox=(3.0, 3.0, 3.0)))


def test_simulate_zero_chi_returns_base():
    g = cube_grid(32)
    k = build_kernel(g)
    base = Volume(grid=g, kind="field", data=smooth_chi(g, seed=1).astype64() * 0.01)
    mask = make_lesion_mask(g, LesionSpec(center_vox=(16, 16, 16), radii_vox=(4.0, 4.0, 4.0)))
    out = simulate_lesion(base, mask, 0.0, k, seed=0)
    assert np.array_equal(out.data, base.data)


def test_simulate_seeded_and_noise_toggle():
    g = cube_grid(32)
    k = build_kernel(g)
    base = _zero_field(g)
    mask = make_lesion_mask(g, LesionSpec(center_vox=(16, 16, 16), radii_vox=(4.0, 4.0, 4.0)))
    a = simulate_lesion(base, mask, 0.8, k, seed=5)
    b = simulate_lesion(base, mask, 0.8, k, seed=5)
    assert np.array_equal(a.data, b.data)
    c = simulate_lesion(base, mask, 0.8, k, seed=6)
    assert not np.array_equal(a.data, c.data)
    # with noise off the seed is irrelevant
    d = simulate_lesion(base, mask, 0.8, k, seed=5, noise_enabled=False)
    e = simulate_lesion(base, mask, 0.8, k, seed=99, noise_enabled=False)
    assert np.array_equal(d.data, e.data)


def test_simulate_adds_to_base():
    g = cube_grid(32)
    k = build_kernel(g)
    base = Volume(grid=g, kind="field", data=smooth_chi(g, seed=2).astype64() * 0.05)
    mask = make_lesion_mask(g, LesionSpec(center_vox=(16, 16, 16), radii_vox=(4.0, 4.0, 4.0)))
    on_zero = simulate_lesion(_zero_field(g), mask, 0.6, k, seed=3)
    on_base = simulate_lesion(base, mask, 0.6, k, seed=3)
    assert rel_l2(on_base.astype64(), on_zero.astype64() + base.astype64()) < 1e-6
    with pytest.raises(ValueError):
        simulate_lesion(base, base, 0.6, k, seed=3)


def test_sweep_defaults_span():
    assert len(DEFAULT_SWEEP_PPM) == 15
    assert DEFAULT_SWEEP_PPM[0] == -1.4
    assert DEFAULT_SWEEP_PPM[-1] == 1.4
    assert 0.0 in DEFAULT_SWEEP_PPM


def test_sweep_single_zero_value():
    g = cube_grid(32)
    k = build_kernel(g)
    mask = make_lesion_mask(g, LesionSpec(center_vox=(16, 16, 16), radii_vox=(4.0, 4.0, 4.0)))
    report = lesion_sweep(_zero_field(g), mask, k, ["tkd"], values_ppm=[0.0])
    assert report.measured_ppm["tkd"] == (0.0,)
    assert report.rmse_ppm["tkd"] == 0.0
    assert report.regression == {}  # one point defines no line


def test_sweep_noiseless_linearity():
    g = cube_grid(64)
    k = build_kernel(g)
    mask = make_lesion_mask(g, LesionSpec(center_vox=(32, 32, 32), radii_vox=(6.0, 6.0, 6.0)))
    params = InversionParams(tkd_threshold=0.1, tikhonov_alpha=1e-4)
    report = lesion_sweep(
        _zero_field(g),
        mask,
        k,
        ["tkd", "tikhonov"],
        params=params,
        noise_enabled=False,
    )
    tik = report.regression["tikhonov"]
    assert 0.9 <= tik.slope <= 1.1
    assert tik.r_squared > 0.99
    assert report.rmse_ppm["tikhonov"] < 0.1
    tkd_reg = report.regression["tkd"]
    assert 0.85 <= tkd_reg.slope <= 1.15


def test_sweep_unknown_method():
    g = cube_grid(16)
    k = build_kernel(g)
    mask = make_lesion_mask(g, LesionSpec(center_vox=(8, 8, 8), radii_vox=(2.0, 2.0, 2.0)))
    with pytest.raises(ValueError):
        lesion_sweep(_zero_field(g), mask, k, ["medi"], values_ppm=[0.0, 1.0])


def test_sweep_external_reconstructions():
    g = cube_grid(16)
    k = build_kernel(g)
    mask = make_lesion_mask(g, LesionSpec(center_vox=(8, 8, 8), radii_vox=(2.0, 2.0, 2.0)))
    values = [-1.0, 0.0, 1.0]
    perfect = [
        Volume(grid=g, kind="chi", data=float(v) * mask.astype64()) for v in values
    ]
    report = lesion_sweep(
        _zero_field(g),
        mask,
        k,
        ["net"],
        values_ppm=values,
        external={"net": perfect},
    )
    reg = report.regression["net"]
    assert reg.slope == pytest.approx(1.0, abs=1e-6)
    assert reg.intercept == pytest.approx(0.0, abs=1e-6)
    assert report.rmse_ppm["net"] < 1e-6
    with pytest.raises(ValueError):
        lesion_sweep(
            _zero_field(g), mask, k, ["net"], values_ppm=values, external={"net": perfect[:2]}
        )


def test_save_sweep_report(tmp_path):
    g = cube_grid(32)
    k = build_kernel(g)
    mask = make_lesion_mask(g, LesionSpec(center_vox=(16, 16, 16), radii_vox=(4.0, 4.0, 4.0)))
    report = lesion_sweep(
        _zero_field(g), mask, k, ["tkd"], values_ppm=[-0.5, 0.0, 0.5], noise_enabled=False
    )
    json_path, csv_path = save_sweep_report(report, tmp_path)
    doc = json.loads(json_path.read_text())
    assert doc["assigned_ppm"] == [-0.5, 0.0, 0.5]
    assert "tkd" in doc["regression"]
    with open(csv_path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["assigned", "method", "measured"]
    assert len(rows) == 1 + 3
