"""Wrapped phase to local field: Laplacian unwrapping, V-SHARP background
removal, and the phase-to-ppm conversion."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import distance_transform_edt

from .volume import Volume, _check_geometry

GYROMAGNETIC_RATIO_HZ_PER_T = 42.577478518e6


@dataclass(frozen=True)
class PrepParams:
    """Preprocessing parameters; radii are the descending V-SHARP kernel radii."""

    te_s: float = 0.025
    b0_t: float = 3.0
    smv_radii_mm: tuple[float, ...] = tuple(float(r) for r in range(25, 0, -1))
    tsvd_threshold: float = 0.05

    def __post_init__(self):
        if self.te_s <= 0:
            raise ValueError(f"te_s must be > 0, got {self.te_s}")
        if self.b0_t <= 0:
            raise ValueError(f"b0_t must be > 0, got {self.b0_t}")
        radii = tuple(float(r) for r in self.smv_radii_mm)
        if not radii or any(r <= 0 for r in radii):
            raise ValueError("smv_radii_mm must be nonempty positive radii")
        if any(a <= b for a, b in zip(radii, radii[1:])):
            raise ValueError("smv_radii_mm must be strictly descending")
        if not 0.0 < self.tsvd_threshold <= 0.5:
            raise ValueError(f"tsvd_threshold must be in (0, 0.5], got {self.tsvd_threshold}")
        object.__setattr__(self, "smv_radii_mm", radii)


def _k_squared(dims, vox) -> np.ndarray:
    freqs = [np.fft.fftfreq(dims[i], d=vox[i]) for i in range(3)]
    kx, ky, kz = np.meshgrid(*freqs, indexing="ij")
    return (2.0 * np.pi) ** 2 * (kx * kx + ky * ky + kz * kz)


def laplacian_unwrap(phase: Volume, mask: Volume) -> Volume:
    """Continuous phase estimate from wrapped input.

    The Laplacian of the true phase is estimated through sin/cos (which are
    continuous across wraps), then inverted in k-space with the zero
    frequency discarded:

        phi = inv_lap( cos(phi_w) * lap(sin(phi_w)) - sin(phi_w) * lap(cos(phi_w)) )

    The result is masked; the additive constant lost with the zero frequency
    is irrelevant downstream.
    """
    if mask.kind != "mask":
        raise ValueError(f"expected a mask volume, got kind {mask.kind!r}")
    _check_geometry(phase, mask)
    if not (mask.data > 0).any():
        raise ValueError("mask is empty")
    k2 = _k_squared(phase.grid.dims, phase.grid.voxel_size_mm)
    phi = phase.astype64()
    s, c = np.sin(phi), np.cos(phi)
    lap = c * np.real(np.fft.ifftn(k2 * np.fft.fftn(s))) - s * np.real(
        np.fft.ifftn(k2 * np.fft.fftn(c))
    )
    spec = np.fft.fftn(lap)
    spec = np.where(k2 > 0.0, spec / np.where(k2 == 0.0, 1.0, k2), 0.0)
    unwrapped = np.real(np.fft.ifftn(spec)) * mask.astype64()
    return Volume(grid=phase.grid, kind="phase", data=unwrapped)


def _smv_kernel_fourier(dims, vox, radius_mm: float) -> np.ndarray:
    """FFT of a count-normalized binary ball placed at the (wrapped) origin."""
    offsets = []
    for i in range(3):
        n = dims[i]
        o = ((np.arange(n) + n // 2) % n) - n // 2
        offsets.append(o * vox[i])
    ox, oy, oz = np.meshgrid(*offsets, indexing="ij")
    ball = (ox * ox + oy * oy + oz * oz <= radius_mm * radius_mm).astype(np.float64)
    ball /= ball.sum()
    return np.real(np.fft.fftn(ball))


def _erode_mm(mask: np.ndarray, vox, radius_mm: float) -> np.ndarray:
    """Voxels whose surrounding ball of the given radius lies inside the mask.

    The FOV border counts as outside (hence the zero padding before the
    distance transform).
    """
    padded = np.pad(mask > 0, 1)
    dist = distance_transform_edt(padded, sampling=vox)
    return (dist > radius_mm)[1:-1, 1:-1, 1:-1] & (mask > 0)


def smv_background_removal(
    field: Volume, mask: Volume, params: PrepParams = PrepParams()
) -> tuple[Volume, Volume]:
    """V-SHARP background field removal.

    Each voxel is high-pass filtered with the largest spherical-mean kernel
    that still fits inside the mask at that voxel (largest radius deep in the
    interior, shrinking toward the boundary); the combined map is then
    deconvolved by TSVD inversion of (1 - SMV) for the largest radius.  The
    returned local field is restricted to the reliability mask, which is the
    input mask eroded by the largest radius.
    """
    if mask.kind != "mask":
        raise ValueError(f"expected a mask volume, got kind {mask.kind!r}")
    _check_geometry(field, mask)
    if not (mask.data > 0).any():
        raise ValueError("mask is empty")
    dims = field.grid.dims
    vox = field.grid.voxel_size_mm
    radii = params.smv_radii_mm
    half_fov = min(d * v for d, v in zip(dims, vox)) / 2.0
    if radii[0] >= half_fov:
        raise ValueError(
            f"largest SMV radius {radii[0]} mm does not fit in the FOV "
            f"(half minimum extent {half_fov} mm)"
        )

    m = mask.data > 0
    f = field.astype64() * m
    f_spec = np.fft.fftn(f)

    combined = np.zeros(dims, dtype=np.float64)
    assigned = np.zeros(dims, dtype=bool)
    eroded_outer = None
    for i, r in enumerate(radii):
        m_r = _erode_mm(m, vox, r)
        if i == 0:
            eroded_outer = m_r
            if not m_r.any():
                raise ValueError("eroded mask is empty; SMV radii too large for this mask")
        region = m_r & ~assigned
        if region.any():
            smv = _smv_kernel_fourier(dims, vox, r)
            high_pass = np.real(np.fft.ifftn((1.0 - smv) * f_spec))
            combined[region] = high_pass[region]
            assigned |= region

    one_minus = 1.0 - _smv_kernel_fourier(dims, vox, radii[0])
    keep = np.abs(one_minus) > params.tsvd_threshold
    inv = np.where(keep, 1.0 / np.where(keep, one_minus, 1.0), 0.0)
    local = np.real(np.fft.ifftn(inv * np.fft.fftn(combined))) * eroded_outer

    local_vol = Volume(grid=field.grid, kind="field", data=local)
    mask_vol = Volume(grid=field.grid, kind="mask", data=eroded_outer.astype(np.float64))
    return local_vol, mask_vol


def phase_to_ppm(phase: Volume, params: PrepParams) -> Volume:
    """delta_ppm = phi / (2 pi gamma B0 TE) * 1e6."""
    scale = 1e6 / (2.0 * np.pi * GYROMAGNETIC_RATIO_HZ_PER_T * params.b0_t * params.te_s)
    return Volume(grid=phase.grid, kind="field", data=phase.astype64() * scale)
