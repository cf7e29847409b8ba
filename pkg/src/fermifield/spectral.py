"""
Negative-spectrum computation, density matrices, densities and currents.

The eigensolver finds every eigenvalue <= 0: a dense path for small
problems, otherwise preconditioned LOBPCG (scipy) with the block grown
until the spectrum is bracketed at zero.  A probe solve with an
independent start block guards against missed eigenvalues.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla

from .grid import ScalarField, SpinorField, VectorField, _fft, _ifft
from .operators import (
    DENSE_LIMIT,
    PAULI,
    HamiltonianSpec,
    apply,
    dense_matrix,
)

__all__ = [
    "NegativeSpectrum",
    "DensityMatrix",
    "EigenFailure",
    "negative_spectrum",
    "density",
    "current",
    "default_tol_zero",
]


class EigenFailure(RuntimeError):
    """Eigensolver did not converge within its budget."""


@dataclass(frozen=True)
class NegativeSpectrum:
    """All eigenvalues lambda_j <= tol_zero with orthonormal eigenvectors."""

    spec: HamiltonianSpec
    eigenvalues: np.ndarray  # sorted ascending
    eigenvectors: list  # SpinorFields, quadrature-normalized
    tol_zero: float
    zero_band: bool  # some |lambda| <= tol_zero present

    @property
    def sum(self) -> float:
        """Sum of the negative parts min(lambda, 0)."""
        return float(np.minimum(self.eigenvalues, 0.0).sum())

    def to_density_matrix(self) -> "DensityMatrix":
        occ = np.ones(len(self.eigenvalues))
        return DensityMatrix(
            spec=self.spec,
            eigenvalues=self.eigenvalues,
            eigenvectors=self.eigenvectors,
            occupations=occ,
        )


@dataclass(frozen=True)
class DensityMatrix:
    """gamma = sum_j occ_j |u_j><u_j| with occupations in [0, 1]."""

    spec: HamiltonianSpec
    eigenvalues: np.ndarray
    eigenvectors: list
    occupations: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.occupations is None:
            object.__setattr__(self, "occupations", np.ones(len(self.eigenvectors)))
        occ = np.asarray(self.occupations, dtype=float)
        if np.any(occ < -1e-12) or np.any(occ > 1 + 1e-12):
            raise ValueError("occupations must lie in [0, 1]")


def default_tol_zero(spec: HamiltonianSpec) -> float:
    g = spec.grid
    vmax = 0.0 if spec.V is None else float(np.abs(spec.V.data).max())
    kin_scale = (spec.h * np.pi * g.N / g.L) ** 2
    return 1e-8 * (vmax + kin_scale)


def dense_eigh(H: np.ndarray, vectors: bool = True):
    """Hermitian eigendecomposition of the symmetrized matrix (fast driver)."""
    import scipy.linalg as _sla

    M = 0.5 * (H + H.conj().T)
    if vectors:
        return _sla.eigh(M, driver="evr")
    return _sla.eigvalsh(M, driver="evr"), None


def _normalize_columns(vecs: np.ndarray, weight: float) -> np.ndarray:
    norms = np.sqrt(np.sum(np.abs(vecs) ** 2, axis=0) * weight)
    return vecs / norms


def _wrap_vectors(spec: HamiltonianSpec, vecs: np.ndarray) -> list:
    shape = (spec.spin,) + spec.grid.shape
    return [SpinorField(spec.grid, vecs[:, j].reshape(shape)) for j in range(vecs.shape[1])]


def _residual_check(spec: HamiltonianSpec, vals, fields, tol_eig: float):
    scale = max(abs(float(vals.min(initial=0.0))), default_tol_zero(spec) / 1e-8, 1e-300)
    worst = 0.0
    for lam, u in zip(vals, fields):
        r = apply(spec, u) - lam * u
        worst = max(worst, r.norm(2))
    if worst > tol_eig * scale:
        raise EigenFailure(
            f"eigenpair residual {worst:.3e} exceeds {tol_eig:.1e} * scale {scale:.3e}"
        )
    return worst


def negative_spectrum(
    spec: HamiltonianSpec,
    tol_eig: float = 1e-8,
    tol_zero: float | None = None,
    seed: int = 0,
    max_vectors: int | None = None,
) -> NegativeSpectrum:
    """Compute every eigenvalue <= tol_zero of the represented operator."""
    if tol_zero is None:
        tol_zero = default_tol_zero(spec)
    dim = spec.dim
    weight = spec.grid.weight

    if dim <= DENSE_LIMIT:
        H = dense_matrix(spec)
        vals, vecs = dense_eigh(H)
        keep = vals <= tol_zero
        vals, vecs = vals[keep], vecs[:, keep]
        vecs = _normalize_columns(vecs, weight) if vals.size else vecs
        fields = _wrap_vectors(spec, vecs)
        zero_band = bool(np.any(np.abs(vals) <= tol_zero))
        ns = NegativeSpectrum(spec, vals, fields, tol_zero, zero_band)
        _residual_check(spec, vals, fields, max(tol_eig, 1e-7))
        return ns

    op, minv = _iterative_operators(spec)
    rng = np.random.default_rng(seed)

    cap = max_vectors if max_vectors is not None else min(dim - 4, 600)
    k = 16
    while True:
        vals, vecs = _lobpcg_lowest(op, minv, dim, k, rng, tol_eig)
        if vals[-1] > tol_zero:
            break
        if k >= cap:
            raise EigenFailure(
                f"negative spectrum not bracketed with {k} vectors "
                f"(largest found {vals[-1]:.6e}, tol_zero {tol_zero:.1e})"
            )
        k = min(2 * k, cap)

    keep = vals <= tol_zero
    vals, vecs = vals[keep], vecs[:, keep]
    vecs = _normalize_columns(vecs, weight) if vals.size else vecs
    fields = _wrap_vectors(spec, vecs)
    _residual_check(spec, vals, fields, max(tol_eig, 1e-7))

    # probe solve: an independent start block must not find anything lower
    pvals, _ = _lobpcg_lowest(op, minv, dim, 4, rng, 1e-6)
    floor = vals[0] if vals.size else tol_zero
    if pvals[0] < floor - max(1e-8, 1e-6 * abs(floor)):
        raise EigenFailure(
            f"probe found eigenvalue {pvals[0]:.6e} below computed floor {floor:.6e}"
        )

    zero_band = bool(np.any(np.abs(vals) <= tol_zero))
    return NegativeSpectrum(spec, vals, fields, tol_zero, zero_band)


def _iterative_operators(spec: HamiltonianSpec):
    """Matrix-free operator and its Fourier-diagonal preconditioner.

    The preconditioner inverts h^2 k^2 + (max|V| + 1), which compresses the
    kinetic spread that otherwise stalls edge-eigenvalue iterations.
    """
    g = spec.grid
    dim = spec.dim
    shape = (spec.spin,) + g.shape

    def matvec(x):
        u = SpinorField(g, x.reshape(shape))
        return apply(spec, u).data.ravel()

    vmax = 0.0 if spec.V is None else float(np.abs(spec.V.data).max())
    pre = 1.0 / (spec.h**2 * g.k2 + vmax + 1.0)

    def minv(x):
        X = x if x.ndim == 2 else x[:, None]
        cols = []
        for i in range(X.shape[1]):
            u = X[:, i].reshape(shape)
            out = np.stack([_ifft(pre * _fft(u[s], g.d), g.d) for s in range(spec.spin)])
            cols.append(out.ravel())
        return np.stack(cols, axis=1) if x.ndim == 2 else cols[0]

    op = spla.LinearOperator((dim, dim), matvec=matvec, dtype=np.complex128)
    M = spla.LinearOperator((dim, dim), matvec=minv, matmat=minv, dtype=np.complex128)
    return op, M


def _lobpcg_lowest(op, minv, dim: int, k: int, rng, tol: float):
    """Lowest-k block solve, sorted ascending."""
    X = rng.standard_normal((dim, k)) + 1j * rng.standard_normal((dim, k))
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        vals, vecs = spla.lobpcg(op, X, M=minv, largest=False,
                                 tol=max(tol * 1e-2, 1e-12), maxiter=400)
    order = np.argsort(vals)
    return vals[order], vecs[:, order]


# ---------------------------------------------------------------------------
# densities and currents


def density(gamma: DensityMatrix) -> ScalarField:
    """Spin-traced position density rho(x) = sum_j occ_j |u_j(x)|^2."""
    g = gamma.spec.grid
    rho = np.zeros(g.shape)
    for occ, u in zip(gamma.occupations, gamma.eigenvectors):
        rho += occ * np.sum(np.abs(u.data) ** 2, axis=0)
    return ScalarField(g, rho)


def _momentum_apply(spec: HamiltonianSpec, comp: np.ndarray) -> list[np.ndarray]:
    g = spec.grid
    ch = _fft(comp, g.d)
    out = [_ifft(spec.h * g.k[j] * ch, g.d) for j in range(g.d)]
    if spec.A is not None:
        for j in range(g.d):
            out[j] = out[j] + spec.A.data[j] * comp
    return out


def current(gamma: DensityMatrix, spec: HamiltonianSpec) -> VectorField:
    """Fermi-gas current density driving the Maxwell equation.

    Schrodinger: J = -Re[(D+A) gamma](x, x); Pauli additionally routes the
    momentum through sigma(sigma.(D+A)), which adds the spin current.
    """
    if spec.flavor != gamma.spec.flavor:
        raise ValueError("density matrix flavor does not match spec")
    g = spec.grid
    J = np.zeros((g.d,) + g.shape)
    for occ, u in zip(gamma.occupations, gamma.eigenvectors):
        if spec.flavor == PAULI:
            # sigma (sigma.(D+A)) u: v = sigma.(D+A) u, then tr u* sigma_j v
            per_spin = [_momentum_apply(spec, u.data[s]) for s in range(2)]
            w = [np.stack([per_spin[0][j], per_spin[1][j]]) for j in range(3)]
            v_up = w[2][0] + w[0][1] - 1j * w[1][1]
            v_dn = w[0][0] + 1j * w[1][0] - w[2][1]
            v = np.stack([v_up, v_dn])
            uc = np.conj(u.data)
            # tr_{C^2}(u* sigma_j v)
            jx = uc[0] * v[1] + uc[1] * v[0]
            jy = -1j * uc[0] * v[1] + 1j * uc[1] * v[0]
            jz = uc[0] * v[0] - uc[1] * v[1]
            J += -occ * np.real(np.stack([jx, jy, jz]))
        else:
            for s in range(u.data.shape[0]):
                pu = _momentum_apply(spec, u.data[s])
                for j in range(g.d):
                    J[j] += -occ * np.real(np.conj(u.data[s]) * pu[j])
    return VectorField(g, J)
