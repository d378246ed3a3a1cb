"""Fourier-spectral calculus on the covering torus.

Derivatives are taken in the complex coordinates z = Pi.u.  For the
Fourier mode e^{2 pi i k.u} one has d/dz_j = 2 pi i zeta_j(k) with
zeta(k) the first n rows of C^{-T} k, where C stacks Pi over conj(Pi);
d/dzbar_j picks up conj(zeta_j(k)).  All operators below are exact
diagonal multipliers in mode space, so compositions (Laplacian after
Green solve, integration by parts, trace identities) hold to round-off
for band-limited fields.

Matrix conventions: a Hermitian metric field h is stored as an array of
pointwise matrices h[..., j, k] = h_{j kbar}; the trace of its plain
matrix inverse against a complex Hessian equals the associated Laplacian
h^{j kbar} d_j d_kbar.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm, pi

import numpy as np
import scipy.fft as sfft

from .quotient import (
    OrbifoldError,
    QuotientTorusOrbifold,
    SpectralField,
    grid_shape,
    integrate,
    project_invariant,
)

__all__ = [
    "DerivativeFrame",
    "HermitianMatrixField",
    "derivative_frame",
    "complex_hessian",
    "laplacian",
    "laplacian_wrt",
    "hermitian_contract",
    "grad_sq",
    "green_solve",
    "green_kernel_column",
    "green_identity_error",
    "poincare_lambda",
    "poincare_constant",
    "sobolev_probe",
    "SobolevProbe",
    "resample",
    "random_band_limited",
]

TWO_PI = 2.0 * pi


def _fftn(x):
    return sfft.fftn(x, workers=-1)


def _ifftn(x):
    return sfft.ifftn(x, workers=-1)


def _mode_vectors(shape):
    """Integer Fourier mode k_i along each axis, in fft layout."""
    return [np.rint(np.fft.fftfreq(nax) * nax).astype(np.int64) for nax in shape]


@dataclass(frozen=True, eq=False)
class DerivativeFrame:
    """Cached mode-space multipliers for one (orbifold, resolution) pair."""

    orbifold: QuotientTorusOrbifold
    shape: tuple
    zeta: np.ndarray          # (n, *shape) complex, d/dz_j multiplier / (2 pi i)
    symbol: np.ndarray        # (*shape) real <= 0, Laplacian eigenvalues
    hessian_mult: np.ndarray  # (n, n, *shape) complex, d_j d_kbar multipliers
    metric_inv: np.ndarray    # (n, n) plain inverse of the background metric


def derivative_frame(orb: QuotientTorusOrbifold, resolution) -> DerivativeFrame:
    shape = grid_shape(resolution, orb.complex_dim)
    cache = orb._frames
    if shape in cache:
        return cache[shape]
    n = orb.complex_dim
    cinv_t = np.linalg.inv(orb.periods.complex_stacked).T
    modes = _mode_vectors(shape)
    grids = np.meshgrid(*modes, indexing="ij")
    zeta = np.zeros((n,) + shape, dtype=complex)
    for j in range(n):
        for a in range(2 * n):
            zeta[j] += cinv_t[j, a] * grids[a]
    metric_inv = orb.periods.metric_inverse()
    sym = np.zeros(shape)
    for j in range(n):
        for k in range(n):
            sym += (metric_inv[j, k] * zeta[j].conj() * zeta[k]).real
    sym *= -(TWO_PI**2)
    np.minimum(sym, 0.0, out=sym)
    hess = np.empty((n, n) + shape, dtype=complex)
    for j in range(n):
        for k in range(n):
            hess[j, k] = -(TWO_PI**2) * zeta[j] * zeta[k].conj()
    frame = DerivativeFrame(orb, shape, zeta, sym, hess, metric_inv)
    cache[shape] = frame
    return frame


@dataclass(frozen=True, eq=False)
class HermitianMatrixField:
    """Pointwise n x n Hermitian matrices over the grid, stored (*grid, n, n)."""

    orbifold: QuotientTorusOrbifold
    values: np.ndarray

    @property
    def resolution(self):
        return self.values.shape[:-2]

    def hermitian_defect(self) -> float:
        return float(np.abs(self.values - self.values.conj().swapaxes(-1, -2)).max())


def complex_hessian(phi: SpectralField) -> HermitianMatrixField:
    """Mixed second derivatives H_{j kbar} = d_j d_kbar phi.

    Hermitian at every grid point (to round-off) for real input.
    """
    orb = phi.orbifold
    n = orb.complex_dim
    frame = derivative_frame(orb, phi.resolution)
    phi_hat = _fftn(phi.samples)
    out = np.empty(phi.resolution + (n, n), dtype=complex)
    for j in range(n):
        for k in range(n):
            out[..., j, k] = _ifftn(frame.hessian_mult[j, k] * phi_hat)
    return HermitianMatrixField(orb, out)


def hermitian_contract(h_inv: np.ndarray, hess: np.ndarray) -> np.ndarray:
    """Pointwise trace(h_inv . H): the Laplacian of the potential behind H
    with respect to the metric whose plain inverse is h_inv.  Real for
    Hermitian inputs."""
    return np.einsum("...jk,...kj->...", h_inv, hess).real


def laplacian(phi: SpectralField) -> SpectralField:
    """Laplacian g^{j kbar} d_j d_kbar phi of a real field; mean-free."""
    frame = derivative_frame(phi.orbifold, phi.resolution)
    out = _ifftn(frame.symbol * _fftn(phi.samples)).real
    return phi.with_samples(out, invariant=phi.invariant)


def laplacian_wrt(phi: SpectralField, h_inv: HermitianMatrixField) -> SpectralField:
    """Variable-coefficient Laplacian h^{j kbar} d_j d_kbar phi.

    h_inv holds the pointwise plain matrix inverses of a Hermitian metric;
    non-positive-definite values are reported as a warning only, since the
    solver guards positivity before calling this.
    """
    vals = h_inv.values
    n = phi.orbifold.complex_dim
    if n == 1:
        bad = vals[..., 0, 0].real <= 0
    else:
        bad = np.linalg.eigvalsh(vals)[..., 0] <= 0
    if bad.any():
        import warnings

        warnings.warn("laplacian_wrt: coefficient field is not positive definite")
    hess = complex_hessian(phi)
    return phi.with_samples(hermitian_contract(vals, hess.values))


def grad_sq(phi: SpectralField) -> SpectralField:
    """|d phi|^2 in the (1,0) convention: g^{j kbar} d_j phi d_kbar phi."""
    orb = phi.orbifold
    n = orb.complex_dim
    frame = derivative_frame(orb, phi.resolution)
    phi_hat = _fftn(phi.samples)
    d = [(TWO_PI * 1j) * _ifftn(frame.zeta[j] * phi_hat) for j in range(n)]
    out = np.zeros(phi.resolution)
    ginv = frame.metric_inv
    for j in range(n):
        for k in range(n):
            out += (ginv[j, k] * d[j].conj() * d[k]).real
    return phi.with_samples(out, invariant=phi.invariant)


def green_solve(h: SpectralField) -> SpectralField:
    """The unique zero-mean phi with Laplacian(phi) = h - mean(h).

    Mode-wise inversion of the Laplacian symbol; the zero mode is set to
    zero, which both removes the mean of h and pins the constant.
    """
    frame = derivative_frame(h.orbifold, h.resolution)
    h_hat = _fftn(h.samples)
    sym = frame.symbol.copy()
    zero = (0,) * len(h.resolution)
    sym[zero] = 1.0
    phi_hat = h_hat / sym
    phi_hat[zero] = 0.0
    out = _ifftn(phi_hat)
    out = out.real if h.is_real() else out
    result = h.with_samples(out)
    if h.invariant:
        result = project_invariant(result)
    return result


def green_kernel_column(orb: QuotientTorusOrbifold, resolution, x_index) -> SpectralField:
    """Discrete Green kernel G_x: solves Laplacian(G_x) = d_x where d_x is
    the grid realisation of the functional phi -> mean(phi) - phi(x)."""
    shape = grid_shape(resolution, orb.complex_dim)
    x_index = tuple(int(i) % nax for i, nax in zip(x_index, shape))
    scale = orb.group_order / orb.periods.torus_volume
    d = np.full(shape, scale)
    d[x_index] -= scale * float(np.prod(shape))
    return green_solve(SpectralField(orb, d))


def green_identity_error(
    orb: QuotientTorusOrbifold,
    resolution,
    num_fields: int = 20,
    num_points: int = 5,
    band: int = 3,
    seed: int = 0,
) -> float:
    """Max defect of integrate(G_x . Laplacian(phi)) = mean(phi) - phi(x)
    over random band-limited fields and grid points."""
    shape = grid_shape(resolution, orb.complex_dim)
    rng = np.random.default_rng(seed)
    points = [tuple(rng.integers(0, nax) for nax in shape) for _ in range(num_points)]
    kernels = {x: green_kernel_column(orb, shape, x) for x in points}
    worst = 0.0
    vol = integrate(SpectralField(orb, np.ones(shape)))
    for _ in range(num_fields):
        phi = random_band_limited(orb, shape, band=band, rng=rng)
        lap = laplacian(phi)
        mean_phi = integrate(phi) / vol
        for x, g_x in kernels.items():
            lhs = integrate(g_x.with_samples(g_x.samples * lap.samples))
            rhs = mean_phi - phi.samples[x]
            worst = max(worst, abs(lhs - rhs))
    return worst


# ---------------------------------------------------------------------------
# eigenvalues and functional inequalities


def _invariant_mode_mask(orb: QuotientTorusOrbifold, shape) -> np.ndarray:
    """True where the symmetrised Fourier mode survives in the invariant
    subspace: every stabilising group element must act with trivial phase."""
    modes = _mode_vectors(shape)
    grids = np.meshgrid(*modes, indexing="ij")
    k_stack = np.stack(grids, axis=-1)  # (*shape, 2n)
    mask = np.ones(shape, dtype=bool)
    for gamma in orb.group:
        if gamma.is_identity:
            continue
        k_image = k_stack @ gamma.linear  # rows k^T M = (M^T k)^T
        fixes = np.all(k_image == k_stack, axis=-1)
        if not fixes.any():
            continue
        den = lcm(*[f.denominator for f in gamma.translation]) if gamma.translation else 1
        t_scaled = np.array(
            [int(f * den) for f in gamma.translation], dtype=np.int64
        )
        phase_num = k_stack @ t_scaled
        mask &= ~(fixes & (phase_num % den != 0))
    return mask


def poincare_lambda(orb: QuotientTorusOrbifold, resolution) -> float:
    """Smallest nonzero eigenvalue of -Laplacian on the invariant subspace,
    read off the exact Fourier symbol over invariant-compatible modes."""
    frame = derivative_frame(orb, resolution)
    mask = _invariant_mode_mask(orb, frame.shape)
    mask[(0,) * len(frame.shape)] = False
    vals = -frame.symbol[mask]
    if vals.size == 0:
        raise OrbifoldError("no nonzero invariant modes at this resolution")
    return float(vals.min())


def poincare_constant(orb: QuotientTorusOrbifold, resolution) -> float:
    """Constant C with ||phi||_2 <= C ||d phi||_2 for zero-mean invariant
    phi, in the convention ||d phi||_2^2 = <-Laplacian(phi), phi>."""
    return poincare_lambda(orb, resolution) ** -0.5


def random_band_limited(
    orb: QuotientTorusOrbifold,
    resolution,
    band: int = 3,
    rng=None,
    invariant: bool = True,
    zero_mean: bool = False,
) -> SpectralField:
    """Random real field with modes confined to |k_i| <= band, optionally
    projected onto the invariant subspace."""
    rng = np.random.default_rng(rng)
    shape = grid_shape(resolution, orb.complex_dim)
    raw = rng.standard_normal(shape)
    raw_hat = _fftn(raw)
    modes = _mode_vectors(shape)
    grids = np.meshgrid(*modes, indexing="ij")
    keep = np.ones(shape, dtype=bool)
    for g in grids:
        keep &= np.abs(g) <= band
    raw_hat[~keep] = 0.0
    if zero_mean:
        raw_hat[(0,) * len(shape)] = 0.0
    f = SpectralField(orb, _ifftn(raw_hat).real)
    if invariant:
        f = project_invariant(f)
    return f


@dataclass(frozen=True)
class SobolevProbe:
    """Empirical Sobolev data: constant is the smallest value valid for
    every sampled field, i.e. the max ratio."""

    constant: float
    max_ratio: float
    ratios: tuple


def sobolev_probe(
    orb: QuotientTorusOrbifold,
    resolution,
    num_samples: int,
    band: int = 2,
    seed: int = 0,
) -> SobolevProbe:
    """Sample ||f||_{2n/(n-1)}^2 / (||f||_2^2 + ||df||_2^2) over random
    band-limited invariant fields.  Rejects n = 1, where the exponent
    degenerates."""
    n = orb.complex_dim
    if n < 2:
        raise OrbifoldError("sobolev_probe requires complex dimension >= 2")
    q = 2 * n / (n - 1)
    rng = np.random.default_rng(seed)
    ratios = []
    for _ in range(num_samples):
        f = random_band_limited(orb, resolution, band=band, rng=rng)
        # give the constant mode the same weight as the oscillating ones;
        # near-constant fields are where the ratio peaks
        f = f.with_samples(f.samples + rng.standard_normal(), invariant=f.invariant)
        norm2_sq = integrate(f.with_samples(f.samples**2))
        if norm2_sq <= 0:
            continue
        normq_sq = integrate(f.with_samples(np.abs(f.samples) ** q)) ** (2.0 / q)
        grad_sq_int = integrate(grad_sq(f))
        ratios.append(normq_sq / (norm2_sq + grad_sq_int))
    if not ratios:
        raise OrbifoldError("all sampled fields degenerated to zero")
    worst = float(max(ratios))
    return SobolevProbe(constant=worst, max_ratio=worst, ratios=tuple(ratios))


# ---------------------------------------------------------------------------
# spectral resampling (3/2-rule de-aliasing support)


def _axis_channels(n_old: int, n_new: int):
    """Mode copy channels (src indices, dst indices, weight) for one axis.

    The unpaired Nyquist mode is split in half when padding and the two
    halves folded back together when truncating, which keeps real data
    real and makes pad-then-truncate the identity.
    """
    keep = min(n_old, n_new)
    half = keep // 2
    ks = list(range(0, half)) + list(range(-half + 1, 0))
    plain = (
        np.array([k % n_old for k in ks], dtype=np.int64),
        np.array([k % n_new for k in ks], dtype=np.int64),
        1.0,
    )
    nyq = half
    channels = [plain]
    if n_old == n_new:
        channels.append((np.array([nyq]), np.array([nyq]), 1.0))
    elif n_old < n_new:  # pad: split source Nyquist across +-nyq
        channels.append((np.array([nyq]), np.array([nyq]), 0.5))
        channels.append((np.array([nyq]), np.array([n_new - nyq]), 0.5))
    else:  # truncate: fold +-nyq onto the target Nyquist
        channels.append((np.array([nyq]), np.array([nyq]), 1.0))
        channels.append((np.array([n_old - nyq]), np.array([nyq]), 1.0))
    return channels


def resample(samples: np.ndarray, new_shape: tuple) -> np.ndarray:
    """Trigonometric resampling of periodic grid data onto a new grid.

    Mode amplitudes are preserved (zero-padding or truncation in mode
    space), so the grid mean is kept exactly and padding followed by
    truncation is the identity.
    """
    import itertools

    old_shape = samples.shape
    new_shape = tuple(new_shape)
    if new_shape == old_shape:
        return samples.copy()
    spec = _fftn(samples) / float(np.prod(old_shape))
    out_spec = np.zeros(new_shape, dtype=complex)
    per_axis = [_axis_channels(n_old, n_new) for n_old, n_new in zip(old_shape, new_shape)]
    for combo in itertools.product(*per_axis):
        weight = 1.0
        srcs, dsts = [], []
        for src, dst, w in combo:
            weight *= w
            srcs.append(src)
            dsts.append(dst)
        out_spec[np.ix_(*dsts)] += weight * spec[np.ix_(*srcs)]
    out = _ifftn(out_spec) * float(np.prod(new_shape))
    return out.real if not np.iscomplexobj(samples) else out


def dealias_shape(shape) -> tuple:
    """Smallest even grid at least 3/2 of the given one per axis."""
    out = []
    for nax in shape:
        m = (3 * nax + 1) // 2
        out.append(m + (m % 2))
    return tuple(out)
