"""
Localization machinery: Jacobian-weighted partitions of unity, scale
functions, dyadic Fermi-shell momentum cutoffs and mollified potentials.

The partition weights follow psi_u(x) = psi((x-u)/l(u)) sqrt(J(x,u)) l(u)^{d/2}
with the closed-form Jacobian J(x,u) = l(u)^{-d} |1 + (x-u).grad l(u) / l(u)|
(matrix determinant lemma); the continuum identity
int psi_u(x)^2 l(u)^{-d} du = 1 is then exact and the numerical defect is
pure quadrature error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GridSpec, ScalarField, VectorField, _fft, _ifft, gradient
from .profiles import bump, pou_pair, smooth_step

__all__ = [
    "ScalingFunctions",
    "scaling_functions",
    "PartitionSpec",
    "partition_weight",
    "partition_defect",
    "DyadicFamily",
    "dyadic_build",
    "dyadic_apply",
    "mollify",
    "mollifier_kernel",
]

DEFAULT_ALPHA = 4.0 / 9.0  # error-optimizing exponent for the scale function


# ---------------------------------------------------------------------------
# scale functions l = f^2 = (V^2 + h^{2 alpha})^{1/2} / K


@dataclass(frozen=True)
class ScalingFunctions:
    ell: ScalarField
    f: ScalarField
    K: float
    alpha: float
    h: float
    repaired: bool  # K was inflated to restore the gradient/size bounds
    grad_ell_max: float
    ell_max: float


def scaling_functions(
    V: ScalarField,
    h: float,
    K: float = 1.0,
    alpha: float = DEFAULT_ALPHA,
    region: np.ndarray | None = None,
) -> ScalingFunctions:
    """Build l and f; inflate K minimally if the bounds fail on the region."""
    if not (0.4 < alpha < 0.5):
        raise ValueError("alpha must lie in (2/5, 1/2)")
    if K <= 0:
        raise ValueError("K must be positive")
    g = V.grid

    def build(Kval: float):
        ell_data = np.sqrt(np.real(V.data) ** 2 + h ** (2 * alpha)) / Kval
        ell = ScalarField(g, ell_data)
        grad_max = float(np.max(np.abs(gradient(ell).data)))
        if region is not None:
            emax = float(np.max(ell_data[region]))
        else:
            emax = float(ell_data.max())
        return ell, grad_max, emax

    ell, grad_max, emax = build(K)
    repaired = False
    if grad_max >= 0.25 or emax > 0.25:
        # both bounds scale as 1/K, so the minimal multiplier is explicit
        factor = max(grad_max / 0.25, emax / 0.25) * (1.0 + 1e-9)
        K = K * factor
        ell, grad_max, emax = build(K)
        repaired = True
    f = ScalarField(g, np.sqrt(np.real(ell.data)))
    return ScalingFunctions(ell, f, K, alpha, h, repaired, grad_max, emax)


# ---------------------------------------------------------------------------
# Jacobian-weighted partition of unity


def _mother_psi_sq(d: int):
    """Normalized mother profile: psi(v)^2 with int psi^2 dv = 1 over R^d."""
    # plateau bump on |v| < 1, normalized by midpoint quadrature once
    n = 4096 if d == 1 else (256 if d == 2 else 96)
    edges = np.linspace(-1.0, 1.0, n + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    dx = edges[1] - edges[0]
    grids = np.meshgrid(*([mids] * d), indexing="ij")
    r = np.sqrt(sum(gv**2 for gv in grids))
    norm = float(np.sum(bump(r) ** 2) * dx**d)

    def psi(v_radius):
        return bump(v_radius) / np.sqrt(norm)

    return psi


@dataclass(frozen=True)
class PartitionSpec:
    """d, ell(u) and grad_ell(u); callables take (..., d) arrays of centers."""

    d: int
    ell: callable  # (..., d) -> (...)
    grad_ell: callable  # (..., d) -> (..., d)

    def __post_init__(self):
        object.__setattr__(self, "_psi", _mother_psi_sq(self.d))

    @classmethod
    def constant(cls, d: int, ell0: float) -> "PartitionSpec":
        return cls(
            d,
            lambda u: np.full(np.asarray(u).shape[:-1], ell0),
            lambda u: np.zeros(np.asarray(u).shape),
        )


def partition_weight(spec: PartitionSpec, u, x) -> np.ndarray:
    """psi_u(x) for centers u of shape (..., d) at a single point x."""
    u = np.asarray(u, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    lu = np.asarray(spec.ell(u), dtype=float)
    glu = np.asarray(spec.grad_ell(u), dtype=float)
    if np.max(np.sqrt(np.sum(glu**2, axis=-1)), initial=0.0) >= 1.0:
        raise ValueError("invalid spec: |grad ell| >= 1 at a sample point")
    v = (x - u) / lu[..., None]
    r = np.sqrt(np.sum(v**2, axis=-1))
    jac = lu ** (-spec.d) * np.abs(1.0 + np.sum(v * glu, axis=-1))
    w = spec._psi(r) * np.sqrt(jac) * lu ** (spec.d / 2.0)
    return np.where(r < 1.0, w, 0.0)


def partition_defect(
    spec: PartitionSpec,
    x_samples,
    rtol: float = 1e-8,
    max_level: int = 8,
) -> float:
    """max_x | int psi_u(x)^2 l(u)^{-d} du - 1 | by adaptive midpoint refinement."""
    worst = 0.0
    for x in np.atleast_2d(np.asarray(x_samples, dtype=float)):
        lx = float(np.asarray(spec.ell(x)))
        halfwidth = 2.5 * lx  # support margin, safe for |grad ell| < 1/4
        prev, val = None, None
        n = 8
        for _ in range(max_level):
            val = _partition_integral(spec, x, halfwidth, n)
            if prev is not None and abs(val - prev) <= rtol * max(abs(val), 1.0):
                break
            prev = val
            n *= 2
        worst = max(worst, abs(val - 1.0))
    return worst


def _partition_integral(spec: PartitionSpec, x, halfwidth: float, n: int) -> float:
    d = spec.d
    edges = np.linspace(-halfwidth, halfwidth, n + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    axes = [x[j] + mids for j in range(d)]
    du = (edges[1] - edges[0]) ** d
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([gv.ravel() for gv in grids], axis=-1)
    w = partition_weight(spec, pts, x)
    lu = np.asarray(spec.ell(pts), dtype=float)
    return float(np.sum(w**2 * lu ** (-d)) * du)


def partition_from_potential(
    d: int,
    V,
    grad_V,
    h: float,
    K: float = 1.0,
    alpha: float = DEFAULT_ALPHA,
    sample_box: float = 3.0,
):
    """PartitionSpec with the potential-adapted scale l = (V^2 + h^{2a})^{1/2}/K.

    V and grad_V are analytic callables on (..., d) center arrays.  K is
    inflated minimally (both bounds scale as 1/K) if the sampled gradient or
    size bound fails on [-sample_box, sample_box]^d.
    """
    if not (0.4 < alpha < 0.5):
        raise ValueError("alpha must lie in (2/5, 1/2)")

    def ell_of(u, Kval):
        vv = np.asarray(V(u), dtype=float)
        return np.sqrt(vv**2 + h ** (2 * alpha)) / Kval

    def grad_of(u, Kval):
        vv = np.asarray(V(u), dtype=float)
        gv = np.asarray(grad_V(u), dtype=float)
        root = np.sqrt(vv**2 + h ** (2 * alpha))
        return vv[..., None] * gv / (Kval * root[..., None])

    axes = [np.linspace(-sample_box, sample_box, 48)] * d
    pts = np.stack([gv.ravel() for gv in np.meshgrid(*axes, indexing="ij")], axis=-1)
    grad_max = float(np.max(np.sqrt(np.sum(grad_of(pts, K) ** 2, axis=-1))))
    ell_max = float(np.max(ell_of(pts, K)))
    repaired = False
    if grad_max >= 0.25 or ell_max > 0.25:
        K = K * max(grad_max / 0.25, ell_max / 0.25) * (1.0 + 1e-9)
        repaired = True
    spec = PartitionSpec(
        d,
        lambda u, Kv=K: ell_of(u, Kv),
        lambda u, Kv=K: grad_of(u, Kv),
    )
    return spec, K, repaired


# ---------------------------------------------------------------------------
# dyadic Fermi-shell decomposition


def _chi_positive(i: int, t: np.ndarray) -> np.ndarray:
    """chi_i for i >= 1: supp [3/4 2^{i-1}, 5/4 2^i], 1 on [5/4 2^{i-1}, 3/4 2^i]."""
    lo, hi = 2.0 ** (i - 1), 2.0**i
    out = np.zeros_like(t, dtype=float)
    rise = (t >= 0.75 * lo) & (t < 1.25 * lo)
    flat = (t >= 1.25 * lo) & (t <= 0.75 * hi)
    fall = (t > 0.75 * hi) & (t <= 1.25 * hi)
    _, r = pou_pair((t[rise] - 0.75 * lo) / (0.5 * lo))
    out[rise] = r
    out[flat] = 1.0
    f, _ = pou_pair((t[fall] - 0.75 * hi) / (0.5 * hi))
    out[fall] = f
    return out


def _chi_zero(t: np.ndarray) -> np.ndarray:
    """chi_0: supported on |t| <= 5/4, 1 on |t| <= 3/4, pou-matched to chi_1."""
    a = np.abs(np.asarray(t, dtype=float))
    out = np.zeros_like(a)
    out[a <= 0.75] = 1.0
    fall = (a > 0.75) & (a < 1.25)
    f, _ = pou_pair((a[fall] - 0.75) / 0.5)
    out[fall] = f
    return out


def _chi_tilde_positive(i: int, t: np.ndarray) -> np.ndarray:
    """Enlarged cutoff: supp [1/2 2^{i-1}, 3/2 2^i], 1 on [3/4 2^{i-1}, 5/4 2^i]."""
    lo, hi = 2.0 ** (i - 1), 2.0**i
    t = np.asarray(t, dtype=float)
    rise = smooth_step((t - 0.5 * lo) / (0.25 * lo))
    fall = smooth_step((1.5 * hi - t) / (0.25 * hi))
    return rise * fall


def _chi_tilde_zero(t: np.ndarray) -> np.ndarray:
    a = np.abs(np.asarray(t, dtype=float))
    return smooth_step((3.0 - a) / 1.0)


@dataclass(frozen=True)
class DyadicFamily:
    """Shell cutoffs f_i of t = (u^2 - W)/(w W) around the Fermi surface."""

    W: float
    w: float

    def __post_init__(self):
        if not self.W > 0:
            raise ValueError("W must be positive")

    @property
    def i0(self) -> int:
        return int(np.floor(abs(np.log2(self.w)))) + 1

    def t(self, u2) -> np.ndarray:
        return (np.asarray(u2, dtype=float) - self.W) / (self.w * self.W)

    def shell_width(self, i: int) -> float:
        return 2.0 ** abs(i) * self.w

    def f(self, i: int, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if i == 0:
            return _chi_zero(t)
        if i > 0:
            return _chi_positive(i, t)
        if i < -self.i0:
            return np.zeros_like(t)
        return _chi_positive(-i, -t)

    def f_tilde(self, i: int, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if i == 0:
            return _chi_tilde_zero(t)
        if i > 0:
            return _chi_tilde_positive(i, t)
        return _chi_tilde_positive(-i, -t)

    def f_greater(self, t) -> np.ndarray:
        """f_> with f_>^2 = sum_{i > i0} f_i^2."""
        t = np.asarray(t, dtype=float)
        imax = self._imax(t)
        acc = np.zeros_like(t)
        for i in range(self.i0 + 1, imax + 1):
            acc += self.f(i, t) ** 2
        return np.sqrt(acc)

    def _imax(self, t) -> int:
        tmax = float(np.max(np.abs(t), initial=4.0))
        return int(np.ceil(np.log2(max(tmax, 2.0)))) + 2

    def sum_f_sq(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        acc = self.f(0, t) ** 2
        imax = self._imax(t)
        for i in range(1, imax + 1):
            acc += self.f(i, t) ** 2 + self.f(-i, t) ** 2
        return acc


def dyadic_build(W: float, w: float, h: float | None = None) -> DyadicFamily:
    """Family with shells of width w_i = 2^{|i|} w; requires h <= w <= 1."""
    if h is not None and not (h <= w <= 1.0):
        raise ValueError(f"w must lie in [h, 1], got w={w} with h={h}")
    if not (0.0 < w <= 1.0):
        raise ValueError("w must lie in (0, 1]")
    return DyadicFamily(W=W, w=w)


def dyadic_apply(family: DyadicFamily, i: int, u, h: float):
    """F_i = f_i(D) as a Fourier multiplier on a spinor/scalar field."""
    g = u.grid
    u2 = (h**2) * g.k2  # |D|^2 symbol, full dual lattice
    mult = family.f(i, family.t(u2))
    data = _ifft(mult * _fft(u.data, g.d), g.d)
    return type(u)(g, data)


# ---------------------------------------------------------------------------
# mollification


def mollifier_kernel(grid: GridSpec, r: float) -> np.ndarray:
    """Sampled chi_r centered at the origin, discretely normalized to mass 1."""
    if not (0 < r <= grid.L / 2):
        raise ValueError("mollification radius must satisfy 0 < r <= L/2")
    r2 = np.zeros(grid.shape)
    for j in range(grid.d):
        dx = grid.coords[j]
        dx = (dx + grid.L / 2) % grid.L - grid.L / 2
        r2 = r2 + dx**2
    kern = bump(np.sqrt(r2) / r)
    mass = kern.sum() * grid.weight
    if mass <= 0:
        raise ValueError("mollifier unresolved: r below the grid mesh")
    return kern / mass


def mollify(A, r: float):
    """A_r = A * chi_r, exact torus convolution through the FFT."""
    g = A.grid
    kern_hat = _fft(mollifier_kernel(g, r), g.d) * g.weight
    data = _ifft(_fft(A.data, g.d) * kern_hat, g.d)
    return type(A)(g, data)
