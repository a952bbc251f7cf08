"""Short-time Fourier transform, its adjoint, and the Bargmann transform.

The STFT is evaluated on the full phase-space grid: every time shift on the
sample grid crossed with every frequency on the dual grid.  At that
granularity analysis and synthesis are exact adjoints of each other and the
inversion ``V* V = I`` holds discretely for a unit-norm window, so the
tolerances downstream are rounding-level rather than discretization-level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import bargmann_sum
from .grid import (
    GridSpec,
    SampledFunction,
    _centered_fft,
    _require_same_grid,
)


@dataclass
class StftField:
    """Samples of V_g f on the (time grid) x (dual grid) phase-space lattice.

    ``values[j..., k...]`` is the coefficient at time shift ``x_j`` and
    frequency ``xi_k``; the phase-space cell measure is ``prod(step) *
    prod(dual step)``.
    """

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.complex128)
        expected = self.grid.shape + self.grid.dual().shape
        if values.shape != expected:
            raise ValueError(f"field shape {values.shape} does not match phase-space grid {expected}")
        self.values = values

    @property
    def dual_grid(self) -> GridSpec:
        return self.grid.dual()

    @property
    def cell_measure(self) -> float:
        return self.grid.cell_volume * self.grid.dual().cell_volume

    def norm(self) -> float:
        """L2 norm over phase space with the cell measure."""
        return math.sqrt(self.cell_measure * float(np.sum(np.abs(self.values) ** 2)))

    def time_axes(self) -> tuple[int, ...]:
        return tuple(range(self.grid.dim))

    def freq_axes(self) -> tuple[int, ...]:
        return tuple(range(self.grid.dim, 2 * self.grid.dim))

    def phase_space_radius_squared(self) -> np.ndarray:
        """|(x, xi)|^2 broadcast over the field shape."""
        d = self.grid.dim
        out = np.zeros((1,) * (2 * d))
        for ax in range(d):
            c = self.grid.axis_points(ax).reshape((-1,) + (1,) * (2 * d - ax - 1))
            out = out + c * c
        dual = self.grid.dual()
        for ax in range(d):
            c = dual.axis_points(ax).reshape((-1,) + (1,) * (d - ax - 1))
            out = out + c * c
        return out


def _shift_bank(window: SampledFunction) -> np.ndarray:
    """All cyclic time shifts of the window: bank[j, t] = w(t - x_j), d=1."""
    n = window.grid.n[0]
    idx = (np.arange(n)[None, :] - (np.arange(n)[:, None] - n // 2)) % n
    return window.values[idx]


def _check_window(window: SampledFunction) -> None:
    wnorm = window.norm()
    if not (1e-6 <= wnorm <= 1e6):
        raise ValueError(f"window norm {wnorm:g} outside [1e-6, 1e6]")


def stft(f: SampledFunction, window: SampledFunction) -> StftField:
    """V_w f(x_j, xi_k) = (f, tf_shift(window, (x_j, xi_k))) on the full grid.

    Computed as one FFT per time-shift row: the k-row at shift x_j is the
    forward transform of f * conj(window(. - x_j)).
    """
    _require_same_grid(f, window)
    _check_window(window)
    g = f.grid
    if g.dim == 1:
        rows = f.values[None, :] * np.conj(_shift_bank(window))
        vals = _centered_fft(rows, axes=(1,)) * g.cell_volume
        return StftField(g, vals)
    out = np.empty(g.shape + g.shape, dtype=np.complex128)
    for j in np.ndindex(g.shape):
        shift = tuple(ji - ni // 2 for ji, ni in zip(j, g.n))
        rolled = np.roll(window.values, shift, axis=tuple(range(g.dim)))
        out[j] = _centered_fft(f.values * np.conj(rolled), axes=tuple(range(g.dim))) * g.cell_volume
    return StftField(g, out)


def adjoint_stft(field: StftField, window: SampledFunction) -> SampledFunction:
    """Cell-measure-weighted superposition sum_jk F[j,k] tf_shift(window,(x_j,xi_k))."""
    if field.grid != window.grid:
        raise ValueError("field phase-space grid does not match the window grid")
    _check_window(window)
    g = window.grid
    if g.dim == 1:
        n = g.n[0]
        # rows[j, t] = sum_k F[j, k] exp(2 pi i x_t xi_k)
        rows = _centered_fft(field.values, axes=(1,), inverse=True) * n
        out = np.einsum("jt,jt->t", rows, _shift_bank(window)) * field.cell_measure
        return SampledFunction(g, out)
    out = np.zeros(g.shape, dtype=np.complex128)
    scale = float(np.prod(g.n))
    for j in np.ndindex(g.shape):
        shift = tuple(ji - ni // 2 for ji, ni in zip(j, g.n))
        rolled = np.roll(window.values, shift, axis=tuple(range(g.dim)))
        row = _centered_fft(field.values[j], axes=tuple(range(g.dim)), inverse=True) * scale
        out += row * rolled
    return SampledFunction(g, out * field.cell_measure)


@dataclass(frozen=True)
class ComplexGrid:
    """A rectangle in the complex plane sampled with a common spacing."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float
    step: float

    def __post_init__(self):
        if not (self.re_max > self.re_min and self.im_max > self.im_min):
            raise ValueError("empty complex rectangle")
        if not (self.step > 0):
            raise ValueError("z-grid spacing must be positive")

    @property
    def re_points(self) -> np.ndarray:
        count = int(round((self.re_max - self.re_min) / self.step)) + 1
        return self.re_min + self.step * np.arange(count)

    @property
    def im_points(self) -> np.ndarray:
        count = int(round((self.im_max - self.im_min) / self.step)) + 1
        return self.im_min + self.step * np.arange(count)

    def mesh(self) -> np.ndarray:
        return self.re_points[:, None] + 1j * self.im_points[None, :]


def bargmann_transform(f: SampledFunction, z_grid: ComplexGrid) -> np.ndarray:
    """Evaluate 2^(1/4) exp(-pi z^2/2) int f(t) exp(-pi t^2) exp(2 pi t z) dt.

    Direct quadrature over the time grid (the kernel exp(2 pi t z) is not a
    modulation at complex z, so there is no FFT shortcut); the t-integrand
    decays like a Gaussian so the Riemann sum converges spectrally.
    """
    if f.grid.dim != 1:
        raise ValueError("bargmann_transform is implemented for dim 1 only")
    t = f.grid.axis_points()
    weights = f.values * np.exp(-np.pi * t * t) * f.grid.cell_volume
    sums = bargmann_sum(t, weights, z_grid.re_points, z_grid.im_points)
    z = z_grid.mesh()
    return 2.0 ** 0.25 * np.exp(-np.pi * z * z / 2.0) * sums


def cauchy_riemann_residual(values: np.ndarray, step: float) -> float:
    """Relative size of the discrete dbar derivative of a complex field.

    Fourth-order central differences along both axes; returns
    ``||dbar F|| / ||d F||`` over the interior.  Small values certify that the
    field is (a sampling of) an analytic function.
    """
    if values.shape[0] < 5 or values.shape[1] < 5:
        raise ValueError("need at least 5 points per axis for the stencil")

    def diff4(a, axis):
        s = [slice(2, -2)] * a.ndim
        out = np.zeros_like(a)
        up1 = np.roll(a, -1, axis)
        dn1 = np.roll(a, 1, axis)
        up2 = np.roll(a, -2, axis)
        dn2 = np.roll(a, 2, axis)
        out = (-up2 + 8 * up1 - 8 * dn1 + dn2) / (12 * step)
        return out[tuple(s)]

    dx = diff4(values, 0)
    dy = diff4(values, 1)
    dbar = 0.5 * (dx + 1j * dy)
    dz = 0.5 * (dx - 1j * dy)
    denom = float(np.linalg.norm(dz))
    if denom == 0.0:
        return 0.0
    return float(np.linalg.norm(dbar)) / denom
