"""
Periodic-box discretization, Fourier differential calculus and field arithmetic.

All other modules build on the three sampled field types defined here.
Derivatives are exact on the discrete dual lattice k = 2*pi*m/L; the Nyquist
mode of every first derivative is set to zero (odd-derivative convention),
so grad/div/curl are skew-adjoint and div(leray(A)) vanishes to rounding.
Integrals use the trapezoid rule on the uniform grid, i.e. a flat quadrature
weight (L/N)^d, which is exact for band-limited integrands.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

__all__ = [
    "GridSpec",
    "ScalarField",
    "VectorField",
    "SpinorField",
    "gradient",
    "divergence",
    "curl",
    "laplacian",
    "field_energy_curl",
    "field_energy_grad",
    "leray_project",
    "mean_zero_normalize",
    "ball_mask",
]


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic box [0, L)^d with N samples per axis."""

    d: int
    N: int
    L: float

    def __post_init__(self) -> None:
        if self.d not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.d}")
        if self.N < 4 or not _is_power_of_two(self.N):
            raise ValueError(f"N must be a power of two >= 4, got {self.N}")
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.d

    @property
    def size(self) -> int:
        """Total number of grid points N^d."""
        return self.N**self.d

    @property
    def mesh(self) -> float:
        return self.L / self.N

    @property
    def weight(self) -> float:
        """Quadrature weight per grid point, (L/N)^d."""
        return (self.L / self.N) ** self.d

    @property
    def volume(self) -> float:
        return self.L**self.d

    @cached_property
    def axis(self) -> np.ndarray:
        return np.arange(self.N) * self.mesh

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        """Broadcastable coordinate arrays, one per axis."""
        return tuple(
            np.reshape(self.axis, (1,) * j + (self.N,) + (1,) * (self.d - 1 - j))
            for j in range(self.d)
        )

    @cached_property
    def k(self) -> tuple[np.ndarray, ...]:
        """Dual-lattice wave numbers 2*pi*m/L per axis (broadcastable)."""
        k1 = 2.0 * np.pi * np.fft.fftfreq(self.N, d=self.mesh)
        return tuple(
            np.reshape(k1, (1,) * j + (self.N,) + (1,) * (self.d - 1 - j))
            for j in range(self.d)
        )

    @cached_property
    def k_deriv(self) -> tuple[np.ndarray, ...]:
        """Wave numbers used for first derivatives: Nyquist entry zeroed."""
        k1 = 2.0 * np.pi * np.fft.fftfreq(self.N, d=self.mesh)
        k1 = k1.copy()
        k1[self.N // 2] = 0.0
        return tuple(
            np.reshape(k1, (1,) * j + (self.N,) + (1,) * (self.d - 1 - j))
            for j in range(self.d)
        )

    @cached_property
    def k2(self) -> np.ndarray:
        """|k|^2 on the full dual lattice (Nyquist included)."""
        out = np.zeros(self.shape)
        for kj in self.k:
            out = out + kj**2
        return out

    @cached_property
    def k2_deriv(self) -> np.ndarray:
        """|k|^2 built from the derivative convention (Nyquist zeroed)."""
        out = np.zeros(self.shape)
        for kj in self.k_deriv:
            out = out + kj**2
        return out


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.complex128)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class _Field:
    grid: GridSpec
    data: np.ndarray
    units: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "data", _freeze(self.data))
        expect = self._expected_shape()
        if self.data.shape != expect:
            raise ValueError(f"field data shape {self.data.shape}, expected {expect}")

    def _expected_shape(self) -> tuple[int, ...]:
        raise NotImplementedError

    # -- arithmetic -------------------------------------------------------
    def _check_mate(self, other: "_Field") -> None:
        if self.grid != other.grid:
            raise ValueError("fields live on different grids")

    def __add__(self, other):
        self._check_mate(other)
        return replace(self, data=self.data + other.data)

    def __sub__(self, other):
        self._check_mate(other)
        return replace(self, data=self.data - other.data)

    def __mul__(self, c):
        return replace(self, data=self.data * c)

    __rmul__ = __mul__

    def __neg__(self):
        return replace(self, data=-self.data)

    def conj(self):
        return replace(self, data=np.conj(self.data))

    @property
    def real(self):
        return replace(self, data=self.data.real.astype(np.complex128))

    # -- norms ------------------------------------------------------------
    def norm(self, p: float = 2) -> float:
        w = self.grid.weight
        flat = np.abs(self.data)
        if np.isinf(p):
            return float(flat.max())
        return float((np.sum(flat**p) * w) ** (1.0 / p))

    def inner(self, other) -> complex:
        """L^2 inner product, antilinear in self."""
        self._check_mate(other)
        return complex(np.vdot(self.data, other.data) * self.grid.weight)

    def integrate(self) -> complex:
        return complex(self.data.sum() * self.grid.weight)


@dataclass(frozen=True)
class ScalarField(_Field):
    def _expected_shape(self):
        return self.grid.shape

    @classmethod
    def zero(cls, grid: GridSpec) -> "ScalarField":
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def from_function(cls, grid: GridSpec, fn) -> "ScalarField":
        return cls(grid, fn(*grid.coords) + np.zeros(grid.shape))


@dataclass(frozen=True)
class VectorField(_Field):
    def _expected_shape(self):
        return (self.grid.d,) + self.grid.shape

    @classmethod
    def zero(cls, grid: GridSpec) -> "VectorField":
        return cls(grid, np.zeros((grid.d,) + grid.shape))

    @classmethod
    def from_components(cls, *comps: ScalarField) -> "VectorField":
        g = comps[0].grid
        if len(comps) != g.d:
            raise ValueError(f"need {g.d} components, got {len(comps)}")
        return cls(g, np.stack([c.data for c in comps]))

    def component(self, j: int) -> ScalarField:
        return ScalarField(self.grid, self.data[j])


@dataclass(frozen=True)
class SpinorField(_Field):
    """Wave function with 1 (spinless) or 2 (Pauli) spin components."""

    def _expected_shape(self):
        # shape checked loosely: first axis is the spin dimension
        n = self.data.shape[0] if self.data.ndim == self.grid.d + 1 else -1
        if n in (1, 2):
            return (n,) + self.grid.shape
        return (2,) + self.grid.shape

    @property
    def spin(self) -> int:
        return self.data.shape[0]

    @classmethod
    def zero(cls, grid: GridSpec, spin: int = 2) -> "SpinorField":
        return cls(grid, np.zeros((spin,) + grid.shape))


# ---------------------------------------------------------------------------
# spectral calculus


def _fft(a: np.ndarray, d: int) -> np.ndarray:
    return np.fft.fftn(a, axes=tuple(range(-d, 0)))


def _ifft(a: np.ndarray, d: int) -> np.ndarray:
    return np.fft.ifftn(a, axes=tuple(range(-d, 0)))


def deriv(f: np.ndarray, grid: GridSpec, axis: int) -> np.ndarray:
    """Spectral first derivative along one axis (Nyquist-zeroed)."""
    fh = _fft(f, grid.d)
    return _ifft(1j * grid.k_deriv[axis] * fh, grid.d)


def gradient(f: ScalarField) -> VectorField:
    g = f.grid
    fh = _fft(f.data, g.d)
    comps = [_ifft(1j * g.k_deriv[j] * fh, g.d) for j in range(g.d)]
    return VectorField(g, np.stack(comps))


def divergence(A: VectorField) -> ScalarField:
    g = A.grid
    out = np.zeros(g.shape, dtype=np.complex128)
    for j in range(g.d):
        out = out + _ifft(1j * g.k_deriv[j] * _fft(A.data[j], g.d), g.d)
    return ScalarField(g, out)


def curl(A: VectorField) -> VectorField:
    g = A.grid
    if g.d != 3:
        raise ValueError("curl is defined for d = 3 only")
    ah = _fft(A.data, 3)
    k = g.k_deriv
    cx = _ifft(1j * (k[1] * ah[2] - k[2] * ah[1]), 3)
    cy = _ifft(1j * (k[2] * ah[0] - k[0] * ah[2]), 3)
    cz = _ifft(1j * (k[0] * ah[1] - k[1] * ah[0]), 3)
    return VectorField(g, np.stack([cx, cy, cz]))


def laplacian(f: ScalarField) -> ScalarField:
    g = f.grid
    return ScalarField(g, _ifft(-g.k2_deriv * _fft(f.data, g.d), g.d))


# ---------------------------------------------------------------------------
# field energies


def _masked_quad(density: np.ndarray, grid: GridSpec, region: np.ndarray | None) -> float:
    if region is not None:
        density = density * region
    return float(np.real(density.sum()) * grid.weight)


def field_energy_curl(A: VectorField, region: np.ndarray | None = None) -> float:
    """Integral of |curl A|^2, optionally restricted to a sampled region.

    In d = 2 the curl is the scalar d_x A_y - d_y A_x.
    """
    g = A.grid
    if g.d == 2:
        w = deriv(A.data[1], g, 0) - deriv(A.data[0], g, 1)
        return _masked_quad(np.abs(w) ** 2, g, region)
    B = curl(A)
    dens = np.sum(np.abs(B.data) ** 2, axis=0)
    return _masked_quad(dens, A.grid, region)


def field_energy_grad(A: VectorField, region: np.ndarray | None = None) -> float:
    """Integral of |grad (x) A|^2 = sum_ij |d_i A_j|^2 over the region."""
    g = A.grid
    dens = np.zeros(g.shape)
    for j in range(g.d):
        ah = _fft(A.data[j], g.d)
        for i in range(g.d):
            dens += np.abs(_ifft(1j * g.k_deriv[i] * ah, g.d)) ** 2
    return _masked_quad(dens, g, region)


def leray_project(A: VectorField) -> VectorField:
    """Divergence-free (Helmholtz) part of A; the zero mode is kept."""
    g = A.grid
    ah = _fft(A.data, g.d)
    k = g.k_deriv
    k2 = g.k2_deriv.copy()
    k2[k2 == 0.0] = 1.0  # zero/Nyquist modes: k.a = 0 there anyway
    kdot = sum(k[j] * ah[j] for j in range(g.d))
    out = np.stack([ah[j] - k[j] * kdot / k2 for j in range(g.d)])
    return VectorField(g, _ifft(out, g.d))


def mean_zero_normalize(A: VectorField, region: np.ndarray | None = None) -> VectorField:
    """Subtract the (region-)average constant vector from each component."""
    g = A.grid
    if region is None:
        region = np.ones(g.shape, dtype=bool)
    npts = float(np.count_nonzero(region))
    if npts == 0:
        raise ValueError("region mask is empty")
    out = A.data.copy()
    for j in range(g.d):
        out[j] -= np.sum(A.data[j] * region) / npts
    return VectorField(g, out)


def ball_mask(grid: GridSpec, center, radius: float) -> np.ndarray:
    """Sampled indicator of the periodic ball B_center(radius), no antialiasing."""
    center = np.atleast_1d(np.asarray(center, dtype=float))
    r2 = np.zeros(grid.shape)
    for j in range(grid.d):
        dx = grid.coords[j] - center[j]
        dx = (dx + grid.L / 2) % grid.L - grid.L / 2  # periodic distance
        r2 = r2 + dx**2
    return r2 <= radius**2
