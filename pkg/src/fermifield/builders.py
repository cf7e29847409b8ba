"""
Named builders for potentials, vector potentials and cutoffs.

The catalog backs the CLI config parser; everything here is also used
directly by the test corpus.
"""

from __future__ import annotations

import numpy as np

from .grid import (
    GridSpec,
    ScalarField,
    VectorField,
    ball_mask,
    gradient,
    leray_project,
    mean_zero_normalize,
)
from .profiles import bump, plateau_bump

__all__ = [
    "bump_potential",
    "constant_on_ball",
    "constant_potential",
    "soft_coulomb",
    "zero_potential_field",
    "random_divfree_potential",
    "rough_divfree_potential",
    "flux_quantized_constant_b",
    "aharonov_casher_zero_mode",
    "cutoff_ball",
    "V_BUILDERS",
    "A_BUILDERS",
]


def _periodic_r(grid: GridSpec, center) -> np.ndarray:
    center = np.atleast_1d(np.asarray(center, dtype=float))
    r2 = np.zeros(grid.shape)
    for j in range(grid.d):
        dx = grid.coords[j] - center[j]
        dx = (dx + grid.L / 2) % grid.L - grid.L / 2
        r2 = r2 + dx**2
    return np.sqrt(r2)


def bump_potential(grid: GridSpec, amplitude: float = 1.0, radius: float | None = None,
                   center=None) -> ScalarField:
    """Smooth compactly supported bump, amplitude at the center."""
    if radius is None:
        radius = grid.L / 4
    if center is None:
        center = (grid.L / 2,) * grid.d
    r = _periodic_r(grid, center)
    return ScalarField(grid, amplitude * bump(r / radius))


def constant_on_ball(grid: GridSpec, amplitude: float = 1.0, radius: float | None = None,
                     center=None) -> ScalarField:
    if radius is None:
        radius = grid.L / 4
    if center is None:
        center = (grid.L / 2,) * grid.d
    mask = ball_mask(grid, center, radius)
    return ScalarField(grid, amplitude * mask.astype(float))


def soft_coulomb(grid: GridSpec, charge: float = 1.0, eps: float = 0.1,
                 center=None) -> ScalarField:
    """Regularized attraction Z/sqrt(r^2 + eps^2) (as a positive well depth)."""
    if eps <= 0:
        raise ValueError("softcoulomb regularization eps must be positive")
    if center is None:
        center = (grid.L / 2,) * grid.d
    r = _periodic_r(grid, center)
    return ScalarField(grid, charge / np.sqrt(r**2 + eps**2))


def constant_potential(grid: GridSpec, value: float = 1.0) -> ScalarField:
    return ScalarField(grid, np.full(grid.shape, value, dtype=float))


def zero_potential_field(grid: GridSpec) -> VectorField:
    return VectorField.zero(grid)


def random_divfree_potential(grid: GridSpec, seed: int = 0, kmax: int = 2,
                             amplitude: float = 1.0) -> VectorField:
    """Random real band-limited vector potential, divergence-free, mean zero."""
    rng = np.random.default_rng(seed)
    data = np.zeros((grid.d,) + grid.shape)
    for j in range(grid.d):
        comp = np.zeros(grid.shape)
        for _ in range(4 * grid.d):
            kvec = rng.integers(-kmax, kmax + 1, size=grid.d)
            phase = rng.uniform(0, 2 * np.pi)
            amp = rng.standard_normal()
            arg = sum(2 * np.pi * kvec[i] * grid.coords[i] / grid.L for i in range(grid.d))
            comp = comp + amp * np.cos(arg + phase)
        data[j] = comp
    A = VectorField(grid, amplitude * data)
    if grid.d >= 2:
        A = leray_project(A)
    A = mean_zero_normalize(A)
    return A.real


def rough_divfree_potential(grid: GridSpec, seed: int = 0,
                            spectral_exponent: float = 2.5,
                            amplitude: float = 1.0) -> VectorField:
    """Random vector potential with power-law spectrum up to the grid Nyquist.

    |A_hat(k)| ~ |k|^{-spectral_exponent} with random phases; the default
    exponent makes scale-local quantities like |A - A_r|^2 / r^2 independent
    of r over the resolved octaves, which is what the mollification
    stability studies need.  Divergence-free (d = 3) and mean zero.
    """
    rng = np.random.default_rng(seed)
    kk = np.sqrt(np.real(grid.k2))
    envelope = np.zeros(grid.shape)
    nz = kk > 0
    envelope[nz] = kk[nz] ** -spectral_exponent
    data = np.empty((grid.d,) + grid.shape, dtype=np.complex128)
    for j in range(grid.d):
        white = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
        data[j] = np.fft.ifftn(envelope * white).real
    A = VectorField(grid, data)
    if grid.d >= 2:
        A = leray_project(A)
    A = mean_zero_normalize(A)
    scale = float(np.sqrt(np.sum(np.abs(A.data) ** 2) * grid.weight))
    return (amplitude / max(scale, 1e-300)) * A.real


def flux_quantized_constant_b(grid: GridSpec, h: float, n_flux: int,
                              strip_width: float = 0.15):
    """Periodic realization of a constant field b = 2 pi n h / L^2 along z.

    A genuinely uniform field has no periodic vector potential, so the
    builder keeps B_z = b everywhere except a narrow smooth return strip
    (width strip_width * L) that carries the compensating flux -2 pi n h.
    With integer n the Aharonov-Casher zero mode e^{phi/h} stays O(1), which
    is what makes the flux quantization observable on the torus.

    Returns (A, B_z ScalarField, phi ScalarField) with A = (0, phi'(x), 0).
    """
    if grid.d != 3:
        raise ValueError("constant-B builder requires d = 3")
    if abs(n_flux - round(n_flux)) > 1e-12:
        raise ValueError(
            f"flux quantization violated: n = b L^2 / (2 pi h) must be an "
            f"integer, got {n_flux}"
        )
    n_flux = int(round(n_flux))
    b = 2.0 * np.pi * n_flux * h / grid.L**2

    width = strip_width * grid.L
    # wrapped Gaussian return profile, built from its exact Fourier series so
    # the spectrum is fully resolved whenever exp(-(pi N width / L)^2 / 2)
    # is below roundoff
    k1 = 2.0 * np.pi * np.fft.fftfreq(grid.N, d=grid.mesh)
    rho_hat = np.exp(-0.5 * (k1 * width) ** 2)  # integral normalized to 1
    center_phase = np.exp(-1j * k1 * grid.L / 2)
    rho = np.real(np.fft.ifft(rho_hat * center_phase)) / grid.mesh
    bz1 = b * (1.0 - grid.L * rho)  # mean-zero along x

    # phi'' = B_z, periodic mean-zero solution along x
    k1 = 2.0 * np.pi * np.fft.fftfreq(grid.N, d=grid.mesh)
    bh = np.fft.fft(bz1)
    k2 = k1**2
    k2[0] = 1.0
    phih = -bh / k2
    phih[0] = 0.0
    phi1 = np.real(np.fft.ifft(phih))
    a_y1 = np.real(np.fft.ifft(1j * k1 * phih))

    shape = grid.shape
    Bz = ScalarField(grid, np.broadcast_to(bz1[:, None, None], shape).copy())
    phi = ScalarField(grid, np.broadcast_to(phi1[:, None, None], shape).copy())
    Adata = np.zeros((3,) + shape)
    Adata[1] = np.broadcast_to(a_y1[:, None, None], shape)
    return VectorField(grid, Adata), Bz, phi


def aharonov_casher_zero_mode(grid: GridSpec, h: float, phi: ScalarField):
    """Exact Pauli zero mode e^{phi/h} (spin up) for A = (-d_y phi, d_x phi, 0)."""
    up = np.exp(np.real(phi.data) / h)
    data = np.zeros((2,) + grid.shape, dtype=np.complex128)
    data[0] = up
    from .grid import SpinorField

    u = SpinorField(grid, data)
    return (1.0 / u.norm(2)) * u


def cutoff_ball(grid: GridSpec, radius: float, center=None) -> ScalarField:
    """Smooth cutoff, 1 on the half-radius ball, supported in B(radius)."""
    if center is None:
        center = (grid.L / 2,) * grid.d
    r = _periodic_r(grid, center)
    return ScalarField(grid, plateau_bump(r / radius))


def _parse_args(argstr: str) -> list[float]:
    argstr = argstr.strip()
    if not argstr:
        return []
    return [float(tok) for tok in argstr.split(",")]


V_BUILDERS = {
    "bump": bump_potential,
    "constball": constant_on_ball,
    "constant": constant_potential,
    "softcoulomb": soft_coulomb,
}

A_BUILDERS = {
    "zero": zero_potential_field,
    "randband": random_divfree_potential,
    "constB": flux_quantized_constant_b,
}
