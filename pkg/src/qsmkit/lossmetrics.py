"""Training loss functionals, image-quality metrics, and regression helpers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import convolve as _spatial_convolve

from .dipole import DipoleKernel, forward_field
from .volume import Volume, _check_geometry

LOSS_WEIGHTS = (0.5, 1.0, 0.1)  # (model, l1, gradient)


@dataclass(frozen=True)
class LossBreakdown:
    model: float
    l1: float
    gradient: float
    total: float
    weights: tuple[float, float, float] = LOSS_WEIGHTS


@dataclass(frozen=True)
class Metrics:
    psnr_db: float
    nrmse: float
    hfen: float
    ssim: float


@dataclass(frozen=True)
class RegressionResult:
    slope: float
    intercept: float
    r_squared: float


def _require_kind(v: Volume, kind: str, name: str) -> None:
    if v.kind != kind:
        raise ValueError(f"{name} must have kind {kind!r}, got {v.kind!r}")


def loss_model(chi: Volume, field: Volume, mask: Volume, kernel: DipoleKernel) -> float:
    """Mean |M * (field - forward(chi))| over all voxels."""
    _require_kind(mask, "mask", "mask")
    _check_geometry(chi, field)
    _check_geometry(chi, mask)
    predicted = forward_field(chi, kernel)
    resid = mask.astype64() * (field.astype64() - predicted.astype64())
    return float(np.abs(resid).mean())


def loss_l1(chi: Volume, label: Volume) -> float:
    """Mean |chi - label| over all voxels."""
    _check_geometry(chi, label)
    return float(np.abs(chi.astype64() - label.astype64()).mean())


def _forward_diff(a: np.ndarray, axis: int) -> np.ndarray:
    # replicate boundary: the difference at the last index along the axis is 0
    d = np.zeros_like(a)
    sl_out = [slice(None)] * 3
    sl_out[axis] = slice(0, a.shape[axis] - 1)
    d[tuple(sl_out)] = np.diff(a, axis=axis)
    return d


def loss_gradient(chi: Volume, label: Volume) -> float:
    """Sum over axes of mean | |grad_i chi| - |grad_i label| | (forward differences)."""
    _check_geometry(chi, label)
    x = chi.astype64()
    y = label.astype64()
    total = 0.0
    for axis in range(3):
        dx = np.abs(_forward_diff(x, axis))
        dy = np.abs(_forward_diff(y, axis))
        total += float(np.abs(dx - dy).mean())
    return total


def total_loss(
    chi: Volume, label: Volume, field: Volume, mask: Volume, kernel: DipoleKernel
) -> LossBreakdown:
    model = loss_model(chi, field, mask, kernel)
    l1 = loss_l1(chi, label)
    gradient = loss_gradient(chi, label)
    w_model, w_l1, w_grad = LOSS_WEIGHTS
    total = w_model * model + w_l1 * l1 + w_grad * gradient
    return LossBreakdown(model=model, l1=l1, gradient=gradient, total=total)


PSNR_IDENTITY_DB = 300.0


def _log_of_gaussian_kernel(size: int = 15, sigma: float = 1.5) -> np.ndarray:
    """Discrete Laplacian-of-Gaussian filter, adjusted to exactly zero sum."""
    half = size // 2
    ax = np.arange(-half, half + 1, dtype=np.float64)
    gx, gy, gz = np.meshgrid(ax, ax, ax, indexing="ij")
    r2 = gx * gx + gy * gy + gz * gz
    w = np.exp(-r2 / (2.0 * sigma**2))
    w /= w.sum()
    log = w * (r2 - 3.0 * sigma**2) / sigma**4
    return log - log.mean()


def _gaussian_window(size: int = 13, sigma: float = 1.5) -> np.ndarray:
    half = size // 2
    ax = np.arange(-half, half + 1, dtype=np.float64)
    gx, gy, gz = np.meshgrid(ax, ax, ax, indexing="ij")
    w = np.exp(-(gx * gx + gy * gy + gz * gz) / (2.0 * sigma**2))
    return w / w.sum()


def _conv(a: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    return _spatial_convolve(a, kernel, mode="constant", cval=0.0)


def quality_metrics(recon: Volume, reference: Volume, mask: Volume) -> Metrics:
    """pSNR / NRMSE / HFEN / SSIM of a reconstruction against a reference.

    All statistics are restricted to the mask; the dynamic range is the
    reference max - min over the mask.  Identical inputs report the pSNR
    sentinel (300 dB) instead of infinity.
    """
    _require_kind(mask, "mask", "mask")
    _check_geometry(recon, reference)
    _check_geometry(recon, mask)
    m = mask.data > 0
    if not m.any():
        raise ValueError("mask is empty")
    x = recon.astype64()
    y = reference.astype64()
    xv = x[m]
    yv = y[m]

    rng = float(yv.max() - yv.min())
    if rng == 0.0:
        raise ValueError("reference is constant over the mask; pSNR undefined")
    y_norm = float(np.sqrt(np.sum(yv * yv)))
    if y_norm == 0.0:
        raise ValueError("reference is zero over the mask; NRMSE undefined")

    mse = float(np.mean((xv - yv) ** 2))
    psnr = PSNR_IDENTITY_DB if mse == 0.0 else float(10.0 * np.log10(rng * rng / mse))

    nrmse = float(np.sqrt(np.sum((xv - yv) ** 2)) / y_norm)

    xm = x * m
    ym = y * m
    log = _log_of_gaussian_kernel()
    hx = _conv(xm, log)
    hy = _conv(ym, log)
    hy_norm = float(np.sqrt(np.sum(hy[m] ** 2)))
    diff_norm = float(np.sqrt(np.sum((hx[m] - hy[m]) ** 2)))
    hfen = 0.0 if diff_norm == 0.0 else diff_norm / hy_norm

    w = _gaussian_window()
    c1 = (0.01 * rng) ** 2
    c2 = (0.03 * rng) ** 2
    mu_x = _conv(xm, w)
    mu_y = _conv(ym, w)
    var_x = _conv(xm * xm, w) - mu_x * mu_x
    var_y = _conv(ym * ym, w) - mu_y * mu_y
    cov = _conv(xm * ym, w) - mu_x * mu_y
    ssim_map = ((2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)) / (
        (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    )
    # anticorrelated inputs can push the raw mean below 0; keep it in [0, 1]
    ssim = float(min(1.0, max(0.0, ssim_map[m].mean())))

    return Metrics(psnr_db=psnr, nrmse=nrmse, hfen=hfen, ssim=ssim)


def linear_regression(xs, ys) -> RegressionResult:
    """Ordinary least squares fit of ys on xs."""
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("xs and ys must be 1-D sequences of equal length")
    if x.size < 2:
        raise ValueError("regression needs at least 2 points")
    xc = x - x.mean()
    sxx = float(np.sum(xc * xc))
    if sxx == 0.0:
        raise ValueError("xs are all equal; slope undefined")
    slope = float(np.sum(xc * (y - y.mean())) / sxx)
    intercept = float(y.mean() - slope * x.mean())
    ss_res = float(np.sum((y - (slope * x + intercept)) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res == 0.0 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return RegressionResult(slope=slope, intercept=intercept, r_squared=min(1.0, max(0.0, r2)))


def sweep_rmse(assigned, measured) -> float:
    """Root mean square difference between two aligned value lists."""
    a = np.asarray(assigned, dtype=np.float64)
    b = np.asarray(measured, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("assigned and measured must be 1-D sequences of equal length")
    if a.size == 0:
        raise ValueError("empty value lists")
    return float(np.sqrt(np.mean((a - b) ** 2)))
