"""Dipole kernel construction, the susceptibility-to-field forward model,
and volume rotation for orientation augmentation.

The k-space kernel is D(k) = 1/3 - (k.h)^2/|k|^2 on the unshifted FFT
frequency grid (cycles/mm, so voxel size enters through the grid), with
D(0) = 0.  The field induced by a susceptibility map chi (ppm) is then
delta = Re IFFT(D * FFT(chi)), also in ppm.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import affine_transform

from .volume import Grid3, Volume, _check_geometry


@dataclass(frozen=True)
class DipoleKernel:
    grid: Grid3
    b0_dir: tuple[float, float, float]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values.setflags(write=False)


def _negated_index_view(arr: np.ndarray) -> np.ndarray:
    """arr evaluated at -k: index i -> (N - i) mod N along every axis."""
    return np.roll(arr[::-1, ::-1, ::-1], shift=(1, 1, 1), axis=(0, 1, 2))


def build_kernel(grid: Grid3, b0_dir=None) -> DipoleKernel:
    """Dipole kernel for the given geometry and B0 direction.

    The closed form is already even in k except on Nyquist planes, where a
    single row represents both +f_nyq and -f_nyq; those rows are averaged
    with their mirror so the kernel is exactly even and fields of real maps
    come out real.  D(0) is set to 0, leaving the field zero-mean.
    """
    if any(d < 2 for d in grid.dims):
        raise ValueError(f"kernel needs dims >= 2 per axis, got {grid.dims}")
    b0 = np.asarray(b0_dir if b0_dir is not None else grid.b0_dir, dtype=float)
    norm = float(np.linalg.norm(b0))
    if norm == 0.0:
        raise ValueError("b0_dir must be nonzero")
    b0 = b0 / norm

    freqs = [
        np.fft.fftfreq(grid.dims[i], d=grid.voxel_size_mm[i]) for i in range(3)
    ]
    kx, ky, kz = np.meshgrid(*freqs, indexing="ij")
    k2 = kx * kx + ky * ky + kz * kz
    kdh = kx * b0[0] + ky * b0[1] + kz * b0[2]
    with np.errstate(invalid="ignore", divide="ignore"):
        values = 1.0 / 3.0 - (kdh * kdh) / k2
    values[0, 0, 0] = 0.0
    values = 0.5 * (values + _negated_index_view(values))
    return DipoleKernel(grid=grid, b0_dir=(float(b0[0]), float(b0[1]), float(b0[2])), values=values)


def forward_field(chi: Volume, kernel: DipoleKernel) -> Volume:
    """delta = Re IFFT(D * FFT(chi)); ppm in, ppm out.

    The imaginary residue of the inverse transform must stay below
    1e-6 * max|delta| (guaranteed by the kernel's even symmetry); anything
    larger indicates a broken kernel and raises.
    """
    if not chi.grid.same_geometry(kernel.grid):
        raise ValueError(
            f"grid mismatch: chi {chi.grid.dims} vs kernel {kernel.grid.dims}"
        )
    spec = np.fft.fftn(chi.astype64())
    result = np.fft.ifftn(kernel.values * spec)
    real = np.real(result)
    residue = float(np.abs(np.imag(result)).max())
    scale = float(np.abs(real).max())
    if residue > 1e-6 * scale and residue > 1e-30:
        raise RuntimeError(
            f"imaginary residue {residue:.3e} exceeds 1e-6 * max|delta| = {1e-6 * scale:.3e}"
        )
    return Volume(grid=chi.grid, kind="field", data=real)


def rotation_from_euler(z_deg: float, y_deg: float, x_deg: float) -> np.ndarray:
    """Rotation matrix R = Rz(z) @ Ry(y) @ Rx(x), angles in degrees."""
    cz, sz = np.cos(np.radians(z_deg)), np.sin(np.radians(z_deg))
    cy, sy = np.cos(np.radians(y_deg)), np.sin(np.radians(y_deg))
    cx, sx = np.cos(np.radians(x_deg)), np.sin(np.radians(x_deg))
    rz = np.array([[cz, -sz, 0.0], [sz, cz, 0.0], [0.0, 0.0, 1.0]])
    ry = np.array([[cy, 0.0, sy], [0.0, 1.0, 0.0], [-sy, 0.0, cy]])
    rx = np.array([[1.0, 0.0, 0.0], [0.0, cx, -sx], [0.0, sx, cx]])
    return rz @ ry @ rx


def _validate_rotation(rotation: np.ndarray) -> np.ndarray:
    r = np.asarray(rotation, dtype=np.float64)
    if r.shape != (3, 3):
        raise ValueError(f"rotation must be 3x3, got shape {r.shape}")
    if not np.allclose(r @ r.T, np.eye(3), atol=1e-9):
        raise ValueError("rotation matrix is not orthonormal")
    if abs(np.linalg.det(r) - 1.0) > 1e-9:
        raise ValueError(f"rotation determinant {np.linalg.det(r):.12f} != +1")
    return r


def rotate_volume(v: Volume, rotation: np.ndarray) -> Volume:
    """Trilinear resampling of v rotated by `rotation` about the grid center.

    Samples falling outside the source FOV read as 0.  Mask volumes are
    re-thresholded at 0.5 so the output stays binary.
    """
    r = _validate_rotation(rotation)
    vox = np.asarray(v.grid.voxel_size_mm, dtype=np.float64)
    center = (np.asarray(v.grid.dims, dtype=np.float64) - 1.0) / 2.0
    # output voxel index -> input voxel index, rotating the object by R
    matrix = np.diag(1.0 / vox) @ r.T @ np.diag(vox)
    offset = center - matrix @ center
    out = affine_transform(
        v.astype64(),
        matrix=matrix,
        offset=offset,
        order=1,
        mode="constant",
        cval=0.0,
        prefilter=False,
    )
    if v.kind == "mask":
        out = (out >= 0.5).astype(np.float64)
    return Volume(grid=v.grid, kind=v.kind, data=out)
