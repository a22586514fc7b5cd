"""Classical single- and multi-orientation dipole inversions: TKD,
closed-form Tikhonov, and COSMOS least squares.

All three are linear in the measured field by construction, which makes
them the reference methods for the linearity sweep in the phantom module.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dipole import DipoleKernel
from .volume import Volume


@dataclass(frozen=True)
class InversionParams:
    tkd_threshold: float = 0.1
    tikhonov_alpha: float = 1e-3
    cosmos_threshold: float = 1e-6

    def __post_init__(self):
        if not 0.0 < self.tkd_threshold < 1.0:
            raise ValueError(f"tkd_threshold must be in (0, 1), got {self.tkd_threshold}")
        if self.tikhonov_alpha <= 0.0:
            raise ValueError(f"tikhonov_alpha must be > 0, got {self.tikhonov_alpha}")
        if self.cosmos_threshold < 0.0:
            raise ValueError(f"cosmos_threshold must be >= 0, got {self.cosmos_threshold}")


def _check_grids(field: Volume, kernel: DipoleKernel) -> None:
    if not field.grid.same_geometry(kernel.grid):
        raise ValueError(
            f"grid mismatch: field {field.grid.dims} vs kernel {kernel.grid.dims}"
        )


def tkd(field: Volume, kernel: DipoleKernel, params: InversionParams = InversionParams()) -> Volume:
    """Thresholded k-space division.

    chi(k) = delta(k)/D(k) where |D| > t; inside the near-cone band the
    division is clamped to sign(D)/t, preserving sign and linearity instead
    of zeroing.
    """
    _check_grids(field, kernel)
    d = kernel.values
    t = params.tkd_threshold
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(np.abs(d) > t, 1.0 / np.where(d == 0.0, 1.0, d), np.sign(d) / t)
    chi_k = np.fft.fftn(field.astype64()) * inv
    return Volume(grid=field.grid, kind="chi", data=np.real(np.fft.ifftn(chi_k)))


def tikhonov(field: Volume, kernel: DipoleKernel, params: InversionParams = InversionParams()) -> Volume:
    """L2-regularized closed form: chi(k) = D*delta(k)/(D^2 + alpha)."""
    _check_grids(field, kernel)
    d = kernel.values
    w = d / (d * d + params.tikhonov_alpha)
    chi_k = np.fft.fftn(field.astype64()) * w
    return Volume(grid=field.grid, kind="chi", data=np.real(np.fft.ifftn(chi_k)))


def cosmos(
    fields: Sequence[Volume],
    kernels: Sequence[DipoleKernel],
    params: InversionParams = InversionParams(),
) -> Volume:
    """Per-k least squares over multiple orientations.

    chi(k) = sum_i D_i(k) delta_i(k) / sum_i D_i(k)^2, zeroed where the
    normal-equation denominator is at or below cosmos_threshold (the DC
    term always is).  Duplicated orientations are accepted and simply
    reduce to the single-orientation normal equations.
    """
    if len(fields) < 2:
        raise ValueError(f"cosmos needs >= 2 orientations, got {len(fields)}")
    if len(fields) != len(kernels):
        raise ValueError("one kernel per field is required")
    for f, k in zip(fields, kernels):
        _check_grids(f, k)
        if not f.grid.same_geometry(fields[0].grid):
            raise ValueError("all field grids must match")
    num = np.zeros(fields[0].grid.dims, dtype=np.complex128)
    den = np.zeros(fields[0].grid.dims, dtype=np.float64)
    for f, k in zip(fields, kernels):
        num += k.values * np.fft.fftn(f.astype64())
        den += k.values * k.values
    keep = den > params.cosmos_threshold
    chi_k = np.where(keep, num / np.where(keep, den, 1.0), 0.0)
    return Volume(grid=fields[0].grid, kind="chi", data=np.real(np.fft.ifftn(chi_k)))
