"""Deterministic synthetic volumes and error norms shared across the tests."""

import numpy as np
from scipy.ndimage import gaussian_filter

from qsmkit import Grid3, Volume, build_kernel, forward_field, rotation_from_euler


def cube_grid(n, vox=1.0, b0=(0.0, 0.0, 1.0)):
    return Grid3(dims=(n, n, n), voxel_size_mm=(vox, vox, vox), b0_dir=b0)


def ones_mask(grid):
    return Volume(grid=grid, kind="mask", data=np.ones(grid.dims))


def radius_from(dims, center):
    ax = [np.arange(n, dtype=np.float64) - c for n, c in zip(dims, center)]
    x, y, z = np.meshgrid(*ax, indexing="ij")
    return np.sqrt(x * x + y * y + z * z)


def ball_mask(grid, center, radius):
    inside = radius_from(grid.dims, center) <= radius
    return Volume(grid=grid, kind="mask", data=inside.astype(np.float64))


def smooth_chi(grid, seed, sigma=2.0, scale=0.1):
    """Smoothed white noise rescaled to max |value| = scale."""
    rng = np.random.default_rng(seed)
    data = gaussian_filter(rng.normal(size=grid.dims), sigma)
    data = data / np.abs(data).max() * scale
    return Volume(grid=grid, kind="chi", data=data)


def rel_l2(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def sphere_chi(grid, center, radius, value=1.0):
    inside = radius_from(grid.dims, center) <= radius
    return Volume(grid=grid, kind="chi", data=value * inside.astype(np.float64))


def analytic_sphere_field(grid, center, radius, chi=1.0):
    """z-component field shift of a uniform sphere (units of chi).

    Exterior: (chi/3) (a/r)^3 (3 cos^2 theta - 1) with theta measured from the
    field axis; interior: 0.
    """
    ax = [np.arange(n, dtype=np.float64) - c for n, c in zip(grid.dims, center)]
    x, y, z = np.meshgrid(*ax, indexing="ij")
    r = np.sqrt(x * x + y * y + z * z)
    safe = np.where(r == 0.0, 1.0, r)
    field = (chi / 3.0) * (radius / safe) ** 3 * (3.0 * (z / safe) ** 2 - 1.0)
    field[r <= radius] = 0.0
    return field


def cosmos_triad_case(n=64, seed=0):
    """One smooth source map observed along three mutually orthogonal field axes."""
    g = cube_grid(n)
    chi = smooth_chi(g, seed=seed, sigma=2.0, scale=0.1)
    axes = rotation_from_euler(10.0, 20.0, 30.0)
    kernels = [build_kernel(g, b0_dir=tuple(axes[:, i])) for i in range(3)]
    fields = [forward_field(chi, k) for k in kernels]
    return chi, fields, kernels
