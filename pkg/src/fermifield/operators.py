"""
Matrix-free Pauli and Schrodinger Hamiltonians on the periodic box.

The kinetic part acts through FFTs, everything else by pointwise
multiplication; the Pauli kinetic energy is applied as the factored square
[sigma.(D+A)]^2 so it is nonnegative by construction.  A dense debug path
materializes the operator for dim <= DENSE_LIMIT.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .grid import (
    GridSpec,
    ScalarField,
    SpinorField,
    VectorField,
    _fft,
    _ifft,
    curl,
    gradient,
)

__all__ = [
    "HamiltonianSpec",
    "apply",
    "gauge_shift",
    "nearest_admissible_shift",
    "ims_localized_family",
    "dense_matrix",
    "DENSE_LIMIT",
    "GaugeError",
]

DENSE_LIMIT = 4096

PAULI = "pauli"
SCHRODINGER = "schrodinger"


class GaugeError(ValueError):
    """Constant gauge shift whose phase is not periodic on the torus."""


@dataclass(frozen=True)
class HamiltonianSpec:
    """Parameters of the (optionally localized) operator psi (T_h(A) - V) psi."""

    grid: GridSpec
    h: float
    flavor: str = SCHRODINGER
    A: VectorField | None = None
    V: ScalarField | None = None
    psi: ScalarField | None = None
    spin: int | None = None  # default: 2 for pauli, 1 for schrodinger

    def __post_init__(self) -> None:
        if self.h <= 0:
            raise ValueError("h must be positive")
        if self.flavor not in (PAULI, SCHRODINGER):
            raise ValueError(f"unknown flavor {self.flavor!r}")
        if self.flavor == PAULI and self.grid.d != 3:
            raise ValueError("pauli flavor requires d = 3")
        if self.spin is None:
            object.__setattr__(self, "spin", 2 if self.flavor == PAULI else 1)
        if self.flavor == PAULI and self.spin != 2:
            raise ValueError("pauli flavor is two-component")
        for f in (self.A, self.V, self.psi):
            if f is not None and f.grid != self.grid:
                raise ValueError("field grid mismatch in HamiltonianSpec")

    @property
    def dim(self) -> int:
        return self.spin * self.grid.N**self.grid.d

    def with_A(self, A: VectorField | None) -> "HamiltonianSpec":
        return replace(self, A=A)

    # -- serialization ----------------------------------------------------
    def to_json(self, path, field_writer) -> None:
        """Write a JSON header; field_writer(name, field) -> file reference."""
        doc = {
            "d": self.grid.d,
            "N": self.grid.N,
            "L": self.grid.L,
            "h": self.h,
            "flavor": self.flavor,
            "spin": self.spin,
            "fields": {
                name: (field_writer(name, f) if f is not None else None)
                for name, f in (("A", self.A), ("V", self.V), ("psi", self.psi))
            },
        }
        Path(path).write_text(json.dumps(doc, indent=2))


def _kinetic_momenta(spec: HamiltonianSpec):
    """h*k per axis: D = -ih grad acts as multiplication by these.

    The full dual lattice (Nyquist included) keeps the multiplier Hermitian
    and the kinetic symbol strictly positive away from k = 0; the zeroed
    variant k_deriv is only for differentiating real fields.
    """
    return [spec.h * kj for kj in spec.grid.k]


def _apply_D_plus_A(spec: HamiltonianSpec, comp: np.ndarray) -> list[np.ndarray]:
    """(D_j + A_j) applied to one spin component, for every j."""
    g = spec.grid
    ch = _fft(comp, g.d)
    hk = _kinetic_momenta(spec)
    out = [_ifft(hk[j] * ch, g.d) for j in range(g.d)]
    if spec.A is not None:
        for j in range(g.d):
            out[j] = out[j] + spec.A.data[j] * comp
    return out


def _sigma_dot(v: list[np.ndarray], u: np.ndarray) -> np.ndarray:
    """sigma.v acting on a 2-spinor array u with shape (2, ...)."""
    up, dn = u[0], u[1]
    return np.stack(
        [
            v[2] * up + (v[0] - 1j * v[1]) * dn,
            (v[0] + 1j * v[1]) * up - v[2] * dn,
        ]
    )


def _kinetic_apply(spec: HamiltonianSpec, u: np.ndarray) -> np.ndarray:
    """(D+A)^2 componentwise in spin (Schrodinger kinetic energy)."""
    g = spec.grid
    out = np.empty_like(u, dtype=np.complex128)
    for s in range(u.shape[0]):
        vj = _apply_D_plus_A(spec, u[s])
        acc = np.zeros_like(vj[0])
        for j in range(g.d):
            acc += _apply_D_plus_A(spec, vj[j])[j]
        out[s] = acc
    return out


def _pauli_kinetic_apply(spec: HamiltonianSpec, u: np.ndarray) -> np.ndarray:
    def sigma_d_plus_a(w: np.ndarray) -> np.ndarray:
        comps = [None, None, None]
        per_spin = [_apply_D_plus_A(spec, w[s]) for s in range(2)]
        for j in range(3):
            comps[j] = np.stack([per_spin[0][j], per_spin[1][j]])
        # sigma.v where v_j is itself a 2-spinor array: combine componentwise
        up = comps[2][0] + comps[0][1] - 1j * comps[1][1]
        dn = comps[0][0] + 1j * comps[1][0] - comps[2][1]
        return np.stack([up, dn])

    return sigma_d_plus_a(sigma_d_plus_a(u))


def pauli_expanded_apply(spec: HamiltonianSpec, u: SpinorField) -> SpinorField:
    """Cross-check path: (D+A)^2 + h sigma.B for divergence-free A."""
    if spec.flavor != PAULI:
        raise ValueError("expanded form is for the pauli flavor")
    w = u.data
    if spec.psi is not None:
        w = spec.psi.data * w
    out = _kinetic_apply(spec, w)
    if spec.A is not None:
        B = curl(spec.A)
        out = out + spec.h * _sigma_dot([B.data[j] for j in range(3)], w)
    if spec.V is not None:
        out = out - spec.V.data * w
    if spec.psi is not None:
        out = spec.psi.data * out
    return SpinorField(spec.grid, out)


def apply(spec: HamiltonianSpec, u: SpinorField) -> SpinorField:
    """psi (T_h(A) - V) psi u, or (T_h(A) - V) u without localization."""
    if u.grid != spec.grid:
        raise ValueError("spinor grid mismatch")
    if u.spin != spec.spin:
        raise ValueError(f"spinor has {u.spin} components, spec expects {spec.spin}")
    return SpinorField(spec.grid, _apply_raw(spec, u.data))


# ---------------------------------------------------------------------------
# gauge arithmetic


def nearest_admissible_shift(spec: HamiltonianSpec, c) -> np.ndarray:
    """Round a constant shift to the nearest torus-periodic one."""
    c = np.atleast_1d(np.asarray(c, dtype=float))
    unit = 2.0 * np.pi * spec.h / spec.grid.L
    return np.round(c / unit) * unit


def gauge_shift(spec: HamiltonianSpec, c):
    """Shift A -> A - c for an admissible constant c.

    Returns (shifted spec, phase ScalarField e^{i c.x / h}); conjugation by
    the phase intertwines the two operators, so their spectra agree.
    """
    c = np.atleast_1d(np.asarray(c, dtype=float))
    if c.shape != (spec.grid.d,):
        raise ValueError(f"shift must have {spec.grid.d} components")
    unit = 2.0 * np.pi * spec.h / spec.grid.L
    ratio = c / unit
    if np.any(np.abs(ratio - np.round(ratio)) > 1e-9):
        suggestion = nearest_admissible_shift(spec, c)
        raise GaugeError(
            f"shift {c.tolist()} is not periodic on the torus: c*L/h must be a "
            f"multiple of 2*pi per component; nearest admissible shift is "
            f"{suggestion.tolist()}"
        )
    g = spec.grid
    A = spec.A if spec.A is not None else VectorField.zero(g)
    const = np.stack([np.full(g.shape, c[j], dtype=np.complex128) for j in range(g.d)])
    newA = VectorField(g, A.data - const)
    phase_data = np.exp(1j * sum(c[j] * g.coords[j] for j in range(g.d)) / spec.h)
    phase = ScalarField(g, phase_data + np.zeros(g.shape, dtype=np.complex128))
    return spec.with_A(newA), phase


# ---------------------------------------------------------------------------
# IMS localization


def ims_localized_family(spec: HamiltonianSpec, cutoffs, tol: float = 1e-8):
    """Split H through a quadratic partition of unity.

    cutoffs: list of real ScalarFields phi_u with sum phi_u^2 = 1 on the
    support of psi (checked to tol).  Returns (list of localized specs,
    IMS error density h^2 sum |grad phi_u|^2 as a ScalarField).
    """
    g = spec.grid
    sumsq = np.zeros(g.shape)
    err_dens = np.zeros(g.shape)
    for phi in cutoffs:
        if phi.grid != g:
            raise ValueError("cutoff grid mismatch")
        sumsq += np.real(phi.data) ** 2
        gp = gradient(phi)
        err_dens += np.sum(np.abs(gp.data) ** 2, axis=0)
    support = np.ones(g.shape, dtype=bool)
    if spec.psi is not None:
        support = np.abs(spec.psi.data) > 1e-14
    defect = float(np.max(np.abs(sumsq[support] - 1.0))) if support.any() else 0.0
    if defect > tol:
        raise ValueError(f"partition defect {defect:.3e} exceeds tolerance {tol:.1e}")
    family = []
    for phi in cutoffs:
        loc = phi if spec.psi is None else ScalarField(g, phi.data * spec.psi.data)
        family.append(replace(spec, psi=loc))
    err_dens *= spec.h**2
    return family, ScalarField(g, err_dens)


# ---------------------------------------------------------------------------
# dense debug path


def _apply_raw(spec: HamiltonianSpec, w: np.ndarray) -> np.ndarray:
    """Operator action on a (possibly batched) spin-major sample array.

    w has shape (spin, ..., N, ..., N); the kinetic pipeline only touches the
    last d axes, so extra batch axes pass through untouched.
    """
    if spec.psi is not None:
        w = spec.psi.data * w
    if spec.flavor == PAULI:
        out = _pauli_kinetic_apply(spec, w)
    else:
        out = _kinetic_apply(spec, w)
    if spec.V is not None:
        out = out - spec.V.data * w
    if spec.psi is not None:
        out = spec.psi.data * out
    return out


def dense_matrix(spec: HamiltonianSpec, block: int = 512) -> np.ndarray:
    """Materialize the operator in column blocks (dim <= DENSE_LIMIT)."""
    dim = spec.dim
    if dim > DENSE_LIMIT:
        raise ValueError(f"dense path limited to dim <= {DENSE_LIMIT}, got {dim}")
    g = spec.grid
    H = np.empty((dim, dim), dtype=np.complex128)
    for lo in range(0, dim, block):
        hi = min(lo + block, dim)
        cols = np.zeros((dim, hi - lo), dtype=np.complex128)
        cols[np.arange(lo, hi), np.arange(hi - lo)] = 1.0
        # rows are (spin, grid); put the batch axis right after spin
        batch = np.moveaxis(
            cols.reshape((spec.spin,) + g.shape + (hi - lo,)), -1, 1
        )
        out = _apply_raw(spec, batch)
        H[:, lo:hi] = np.moveaxis(out, 1, -1).reshape(dim, hi - lo)
    return H
