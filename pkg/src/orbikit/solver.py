"""Continuity-method solver for the orbifold Monge-Ampere equations.

Two modes on a fixed flat quotient (omega the constant background form,
omega_phi = omega + i ddbar phi, densities relative to omega^n):

* prescribed-volume:  det(g + H(phi))/det(g) = e^{t F + c_t}, with c_t the
  quadrature constant making the right side integrate to the background
  volume (c_0 = c_1 = 0 for normalised F).  Solutions are fixed mean-zero.
* KE:                 det(g + H(phi))/det(g) = e^{t F + phi}; no constant
  freedom, no normalisation.

Each parameter value is solved by Newton iterations warm-started from the
previous one.  The reported residual is the logarithmic one,
r = log density - tF - (c_t | phi); the Newton step solves the exact
linearisation of the density-form equation,

    Delta_phi psi           = e^{-r} - 1     (prescribed-volume, projected)
    (Delta_phi - e^{-r}) psi = e^{-r} - 1     (KE)

which agrees with Delta_phi psi = -r to first order and makes the
one-dimensional case (where the determinant is affine in phi) solve in a
single step.  The inner systems are solved by preconditioned GMRES with
the constant-coefficient inverse Laplacian as preconditioner, falling
back to a dense solve on small grids.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import log

import numpy as np
import scipy.fft as sfft
import scipy.sparse.linalg as spla

from .quotient import (
    QuotientTorusOrbifold,
    SpectralField,
    integrate,
    max_invariance_defect,
    project_invariant,
)
from .spectral import (
    HermitianMatrixField,
    complex_hessian,
    dealias_shape,
    derivative_frame,
    hermitian_contract,
    resample,
)

__all__ = [
    "SolverConfig",
    "MASolution",
    "DiagnosticsReport",
    "SolverError",
    "KahlerConeError",
    "normalize_F",
    "c_shift",
    "ma_density",
    "kahler_cone_margin",
    "residual",
    "newton_step",
    "solve_continuity",
    "solve_ke",
    "diagnostics",
    "manufactured_source",
]

PRESCRIBED_VOLUME = "prescribed-volume"
KE = "KE"


class SolverError(RuntimeError):
    """Newton or continuity failure: exhausted line search, inner solve not
    converged, or schedule bisection bottomed out."""


class KahlerConeError(SolverError):
    """The iterate left the Kahler cone: g + H(phi) lost positivity."""

    def __init__(self, min_eig):
        super().__init__(
            f"g + H(phi) is not positive definite (min relative eigenvalue {min_eig:.3e})"
        )
        self.min_eig = float(min_eig)


@dataclass(frozen=True)
class SolverConfig:
    t_schedule: tuple = (0.0, 0.25, 0.5, 0.75, 1.0)
    newton_tol: float = 1e-10
    max_newton: int = 30
    damping_min: float = 2.0**-10
    positivity_margin_min: float = 1e-3
    linear_tol: float = 1e-12
    linear_maxiter: int = 400
    dealias: bool = True
    max_bisections: int = 10

    def __post_init__(self):
        sched = tuple(float(t) for t in self.t_schedule)
        if not sched or sched[0] != 0.0 or sched[-1] != 1.0:
            raise ValueError("t_schedule must start at 0 and end at 1")
        if any(b <= a for a, b in zip(sched, sched[1:])):
            raise ValueError("t_schedule must be strictly increasing")
        if self.newton_tol <= 0 or self.linear_tol <= 0:
            raise ValueError("tolerances must be positive")
        object.__setattr__(self, "t_schedule", sched)


@dataclass(frozen=True)
class DiagnosticsReport:
    c0_norm: float
    equivalence_interval: tuple
    trace_range: tuple
    s_norm_sup: float
    lemma52_margin: float
    volume_error: float

    def as_dict(self):
        return {
            "c0_norm": self.c0_norm,
            "equivalence_interval": list(self.equivalence_interval),
            "trace_range": list(self.trace_range),
            "s_norm_sup": self.s_norm_sup,
            "lemma52_margin": self.lemma52_margin,
            "volume_error": self.volume_error,
        }


@dataclass(frozen=True)
class MASolution:
    phi: SpectralField
    mode: str
    final_t: float
    residual_history: tuple  # (t, newton iteration, sup residual)
    diagnostics: DiagnosticsReport
    volume_history: tuple    # (t, newton iteration, relative volume error)
    c_table: tuple           # (t, c_t); empty in KE mode

    @property
    def final_residual(self) -> float:
        return self.residual_history[-1][2]


# ---------------------------------------------------------------------------
# densities and residuals


def _metric_with_hessian(orb: QuotientTorusOrbifold, hess: np.ndarray) -> np.ndarray:
    g = orb.periods.background_metric
    return g + hess


def _pencil_eig_range(orb: QuotientTorusOrbifold, gphi: np.ndarray):
    """Min/max eigenvalues over the grid of g^{-1/2} g_phi g^{-1/2}."""
    n = orb.complex_dim
    g = orb.periods.background_metric
    if n == 1:
        vals = (gphi[..., 0, 0] / g[0, 0]).real
        return float(vals.min()), float(vals.max())
    evals, evecs = np.linalg.eigh(g)
    ghalf_inv = (evecs / np.sqrt(evals)) @ evecs.conj().T
    m = np.einsum("ab,...bc,cd->...ad", ghalf_inv, gphi, ghalf_inv)
    if n == 2:
        half_tr = 0.5 * (m[..., 0, 0] + m[..., 1, 1]).real
        det = (m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]).real
        disc = np.sqrt(np.maximum(half_tr**2 - det, 0.0))
        return float((half_tr - disc).min()), float((half_tr + disc).max())
    eigs = np.linalg.eigvalsh(m)
    return float(eigs[..., 0].min()), float(eigs[..., -1].max())


def _det_ratio(orb: QuotientTorusOrbifold, gphi: np.ndarray) -> np.ndarray:
    """det(g + H)/det(g) pointwise."""
    n = orb.complex_dim
    g = orb.periods.background_metric
    if n == 1:
        return (gphi[..., 0, 0] / g[0, 0]).real
    if n == 2:
        det = (gphi[..., 0, 0] * gphi[..., 1, 1] - gphi[..., 0, 1] * gphi[..., 1, 0]).real
        return det / float(np.linalg.det(g).real)
    return np.linalg.det(gphi).real / float(np.linalg.det(g).real)


def _density_samples(orb, hess_values: np.ndarray, dealias: bool) -> np.ndarray:
    """Density samples on the field's grid, with quadratic products of the
    Hessian formed on a 3/2 grid when de-aliasing is on."""
    n = orb.complex_dim
    shape = hess_values.shape[:-2]
    if not dealias or n == 1:
        return _det_ratio(orb, _metric_with_hessian(orb, hess_values))
    fine_shape = dealias_shape(shape)
    fine = np.empty(fine_shape + (n, n), dtype=complex)
    for j in range(n):
        for k in range(n):
            fine[..., j, k] = resample(hess_values[..., j, k], fine_shape)
    dens_fine = _det_ratio(orb, _metric_with_hessian(orb, fine))
    return resample(dens_fine, shape)


def kahler_cone_margin(phi: SpectralField) -> float:
    """Smallest relative eigenvalue of g_phi against g over the grid."""
    hess = complex_hessian(phi)
    gphi = _metric_with_hessian(phi.orbifold, hess.values)
    return _pencil_eig_range(phi.orbifold, gphi)[0]


def ma_density(phi: SpectralField, dealias: bool = True) -> SpectralField:
    """Volume-form ratio omega_phi^n / omega^n as a positive field.

    Raises KahlerConeError (with the offending minimum eigenvalue) when
    g + H(phi) fails to be positive definite somewhere.
    """
    hess = complex_hessian(phi)
    orb = phi.orbifold
    margin = _pencil_eig_range(orb, _metric_with_hessian(orb, hess.values))[0]
    if margin <= 0:
        raise KahlerConeError(margin)
    dens = _density_samples(orb, hess.values, dealias)
    if dens.min() <= 0:
        raise KahlerConeError(dens.min())
    return phi.with_samples(dens, invariant=phi.invariant)


def normalize_F(f: SpectralField) -> SpectralField:
    """Shift F by the constant making e^F integrate to the background
    volume (the solvability normalisation)."""
    vol = integrate(f.with_samples(np.ones(f.resolution)))
    mass = integrate(f.with_samples(np.exp(f.samples)))
    return f.with_samples(f.samples + log(vol / mass), invariant=f.invariant)


def c_shift(f: SpectralField, t: float) -> float:
    """Quadrature constant c_t with e^{tF + c_t} integrating to the
    background volume; vanishes at t = 0 and, for normalised F, at t = 1."""
    vol = integrate(f.with_samples(np.ones(f.resolution)))
    mass = integrate(f.with_samples(np.exp(t * f.samples)))
    return log(vol / mass)


@dataclass(frozen=True)
class _IterateState:
    """Everything the Newton loop needs about one candidate phi."""

    phi: SpectralField
    hess: np.ndarray
    gphi: np.ndarray
    margin: float
    density: np.ndarray | None
    log_residual: np.ndarray | None
    sup_residual: float
    volume_error: float


def _evaluate(phi, f, t, mode, config) -> _IterateState:
    orb = phi.orbifold
    hess = complex_hessian(phi).values
    gphi = _metric_with_hessian(orb, hess)
    margin = _pencil_eig_range(orb, gphi)[0]
    if margin <= 0:
        return _IterateState(phi, hess, gphi, margin, None, None, np.inf, np.inf)
    dens = _density_samples(orb, hess, config.dealias)
    if dens.min() <= 0:
        return _IterateState(phi, hess, gphi, margin, None, None, np.inf, np.inf)
    target = t * f.samples
    if mode == PRESCRIBED_VOLUME:
        target = target + c_shift(f, t)
    else:
        target = target + phi.samples
    r = np.log(dens) - target
    vol = integrate(phi.with_samples(np.ones(phi.resolution)))
    vol_err = abs(integrate(phi.with_samples(dens)) - vol) / vol
    return _IterateState(
        phi, hess, gphi, margin, dens, r, float(np.abs(r).max()), vol_err
    )


def residual(phi: SpectralField, f: SpectralField, t: float, mode: str = PRESCRIBED_VOLUME,
             dealias: bool = True) -> SpectralField:
    """Logarithmic residual of the discrete equation; identically zero on a
    solution."""
    config = SolverConfig(dealias=dealias)
    state = _evaluate(phi, f, t, mode, config)
    if state.log_residual is None:
        raise KahlerConeError(state.margin)
    return phi.with_samples(state.log_residual)


# ---------------------------------------------------------------------------
# linearised solves


def _pointwise_inverse(orb, gphi: np.ndarray) -> np.ndarray:
    n = orb.complex_dim
    if n == 1:
        return 1.0 / gphi
    if n == 2:
        det = gphi[..., 0, 0] * gphi[..., 1, 1] - gphi[..., 0, 1] * gphi[..., 1, 0]
        inv = np.empty_like(gphi)
        inv[..., 0, 0] = gphi[..., 1, 1]
        inv[..., 1, 1] = gphi[..., 0, 0]
        inv[..., 0, 1] = -gphi[..., 0, 1]
        inv[..., 1, 0] = -gphi[..., 1, 0]
        return inv / det[..., None, None]
    return np.linalg.inv(gphi)


def _linear_solve(orb, shape, h_inv, weight, rhs, config, ke_mode):
    """Solve the linearised equation by preconditioned GMRES.

    prescribed-volume: mean-projected Delta_phi psi = P rhs, psi zero-mean.
    KE:               (Delta_phi - weight) psi = rhs.
    Falls back to a dense solve on small grids if GMRES stalls.
    """
    size = int(np.prod(shape))
    frame = derivative_frame(orb, shape)
    n = orb.complex_dim
    mult = frame.hessian_mult

    def apply_operator(flat):
        x = flat.reshape(shape)
        x_hat = sfft.fftn(x, workers=-1)
        hess = np.empty(shape + (n, n), dtype=complex)
        for j in range(n):
            for k in range(n):
                hess[..., j, k] = sfft.ifftn(mult[j, k] * x_hat, workers=-1)
        out = hermitian_contract(h_inv, hess)
        if ke_mode:
            out = out - weight * x
        else:
            out = out - out.mean()
        return out.ravel()

    sym = frame.symbol.copy()
    zero = (0,) * len(shape)
    if ke_mode:
        precond_sym = 1.0 / (sym - 1.0)
    else:
        sym[zero] = 1.0
        precond_sym = 1.0 / sym
        precond_sym[zero] = 0.0

    def apply_precond(flat):
        x_hat = sfft.fftn(flat.reshape(shape), workers=-1)
        return sfft.ifftn(precond_sym * x_hat, workers=-1).real.ravel()

    b = rhs if ke_mode else rhs - rhs.mean()
    b_flat = b.ravel()
    b_norm = float(np.abs(b_flat).max())
    if b_norm == 0.0:
        return np.zeros(shape)
    op = spla.LinearOperator((size, size), matvec=apply_operator, dtype=float)
    pre = spla.LinearOperator((size, size), matvec=apply_precond, dtype=float)
    x, info = spla.gmres(
        op,
        b_flat,
        M=pre,
        rtol=config.linear_tol,
        atol=0.0,
        restart=min(60, size),
        maxiter=config.linear_maxiter,
    )
    true_resid = float(np.abs(apply_operator(x) - b_flat).max())
    if info != 0 or not np.isfinite(true_resid) or true_resid > 100 * config.linear_tol * max(1.0, b_norm):
        if size <= 10_000:
            dense = np.empty((size, size))
            probe = np.zeros(size)
            for i in range(size):
                probe[i] = 1.0
                dense[:, i] = apply_operator(probe)
                probe[i] = 0.0
            x = np.linalg.lstsq(dense, b_flat, rcond=None)[0]
        else:
            raise SolverError(
                f"inner linear solve stalled (gmres info {info}, residual {true_resid:.2e})"
            )
    psi = x.reshape(shape)
    if not ke_mode:
        psi = psi - psi.mean()
    return psi


def _newton_step_state(state: _IterateState, f, t, mode, config):
    """One damped Newton update from an evaluated iterate."""
    orb = state.phi.orbifold
    shape = state.phi.resolution
    h_inv = _pointwise_inverse(orb, state.gphi)
    w = np.exp(-state.log_residual)
    rhs = w - 1.0
    ke_mode = mode == KE
    psi = _linear_solve(orb, shape, h_inv, w, rhs, config, ke_mode)
    psi_field = state.phi.with_samples(psi)
    if state.phi.invariant and f.invariant:
        psi_field = project_invariant(psi_field)
        psi = psi_field.samples
    sup_psi = float(np.abs(psi).max())
    s = 1.0
    while True:
        trial = state.phi.with_samples(
            state.phi.samples + s * psi, invariant=state.phi.invariant
        )
        cand = _evaluate(trial, f, t, mode, config)
        margin_ok = cand.margin >= config.positivity_margin_min
        decreased = cand.sup_residual < state.sup_residual
        converged = cand.sup_residual <= config.newton_tol
        if margin_ok and (decreased or converged or sup_psi < 1e-15):
            return cand
        s *= 0.5
        if s < config.damping_min:
            raise SolverError(
                f"line search exhausted at t={t} (sup residual {state.sup_residual:.3e})"
            )


def newton_step(phi: SpectralField, f: SpectralField, t: float,
                mode: str = PRESCRIBED_VOLUME, config: SolverConfig | None = None):
    """One Newton update; returns (phi', sup residual of phi')."""
    config = config or SolverConfig()
    state = _evaluate(phi, f, t, mode, config)
    if state.log_residual is None:
        raise KahlerConeError(state.margin)
    new_state = _newton_step_state(state, f, t, mode, config)
    return new_state.phi, new_state.sup_residual


# ---------------------------------------------------------------------------
# continuity driver


def _solve_at_parameter(state, f, t, mode, config, history, volumes):
    state = _evaluate(state.phi, f, t, mode, config)
    if state.log_residual is None:
        raise KahlerConeError(state.margin)
    history.append((t, 0, state.sup_residual))
    volumes.append((t, 0, state.volume_error))
    iteration = 0
    while state.sup_residual > config.newton_tol:
        if iteration >= config.max_newton:
            raise SolverError(
                f"Newton did not reach {config.newton_tol:.1e} at t={t} "
                f"within {config.max_newton} iterations"
            )
        state = _newton_step_state(state, f, t, mode, config)
        iteration += 1
        history.append((t, iteration, state.sup_residual))
        volumes.append((t, iteration, state.volume_error))
    return state


def _continuity(f: SpectralField, config: SolverConfig, mode: str,
                initial_phi: SpectralField | None) -> MASolution:
    orb = f.orbifold
    if not f.is_real():
        raise ValueError("source term must be real")
    defect = max_invariance_defect(f)
    if defect > 1e-10 * max(1.0, float(np.abs(f.samples).max())):
        raise ValueError(f"source term is not group invariant (defect {defect:.2e})")
    f = f.with_samples(f.samples, invariant=True)
    if mode == PRESCRIBED_VOLUME:
        f = normalize_F(f)
    if initial_phi is None:
        phi = SpectralField(orb, np.zeros(f.resolution), invariant=True)
    else:
        samples = np.array(initial_phi.samples, dtype=float)
        if mode == PRESCRIBED_VOLUME:
            samples = samples - samples.mean()
        phi = SpectralField(orb, samples, invariant=True)
        if max_invariance_defect(phi) > 1e-10:
            raise ValueError("initial guess is not group invariant")

    history: list = []
    volumes: list = []
    c_table: list = []
    state = _IterateState(phi, None, None, 1.0, None, None, np.inf, np.inf)
    solved_t = None
    for target in config.t_schedule:
        pending = [target]
        bisections = 0
        while pending:
            t_try = pending[-1]
            try:
                state = _solve_at_parameter(state, f, t_try, mode, config, history, volumes)
                solved_t = t_try
                pending.pop()
            except SolverError:
                if solved_t is None:
                    raise
                bisections += 1
                if bisections > config.max_bisections:
                    raise SolverError(
                        f"continuity step to t={target} failed after "
                        f"{config.max_bisections} bisections (stuck at t={solved_t})"
                    )
                pending.append(0.5 * (solved_t + t_try))
        if mode == PRESCRIBED_VOLUME:
            c_table.append((target, c_shift(f, target)))
    report = diagnostics(state.phi, f, 1.0, mode, dealias=config.dealias)
    return MASolution(
        phi=state.phi,
        mode=mode,
        final_t=1.0,
        residual_history=tuple(history),
        diagnostics=report,
        volume_history=tuple(volumes),
        c_table=tuple(c_table),
    )


def solve_continuity(f: SpectralField, config: SolverConfig | None = None,
                     mode: str = PRESCRIBED_VOLUME,
                     initial_phi: SpectralField | None = None) -> MASolution:
    """Solve the prescribed-volume equation along the continuity schedule,
    warm-starting each parameter from the last and bisecting failed steps.
    The returned potential is mean-zero (the constant is a gauge choice)."""
    return _continuity(f, config or SolverConfig(), mode, initial_phi)


def solve_ke(f: SpectralField, config: SolverConfig | None = None,
             initial_phi: SpectralField | None = None) -> MASolution:
    """Solve the KE-type equation (density e^{tF + phi}).  No constant is
    removed: the solution is unique outright."""
    return _continuity(f, config or SolverConfig(), KE, initial_phi)


def manufactured_source(phi_star: SpectralField, mode: str = PRESCRIBED_VOLUME,
                        dealias: bool = True) -> SpectralField:
    """Source term whose exact discrete solution is phi_star: the method of
    manufactured solutions, with every operation matching the solver's own
    discrete pipeline."""
    dens = ma_density(phi_star, dealias=dealias)
    samples = np.log(dens.samples)
    if mode == KE:
        samples = samples - phi_star.samples
    return phi_star.with_samples(samples, invariant=phi_star.invariant)


# ---------------------------------------------------------------------------
# diagnostics


def diagnostics(phi: SpectralField, f: SpectralField, t: float,
                mode: str = PRESCRIBED_VOLUME, dealias: bool = True) -> DiagnosticsReport:
    """A-priori-estimate quantities of an iterate.

    equivalence_interval bounds the eigenvalues of g_phi against g (the
    uniform-equivalence window); s_norm_sup is the sup norm of the
    connection-difference tensor measured in g_phi; lemma52_margin is the
    pointwise minimum of the second-order differential inequality with the
    flat-background curvature constant set to zero.
    """
    orb = phi.orbifold
    n = orb.complex_dim
    frame = derivative_frame(orb, phi.resolution)
    hess = complex_hessian(phi).values
    gphi = _metric_with_hessian(orb, hess)
    eig_lo, eig_hi = _pencil_eig_range(orb, gphi)
    ginv = orb.periods.metric_inverse()
    lap_phi = hermitian_contract(np.broadcast_to(ginv, gphi.shape), hess)
    tr = n + lap_phi
    dens = _density_samples(orb, hess, dealias)
    vol = integrate(phi.with_samples(np.ones(phi.resolution)))
    vol_err = abs(integrate(phi.with_samples(dens)) - vol) / vol

    # connection difference S^k_{jm} = ghat^{k lbar} d_j ghat_{m lbar}
    phi_hat = sfft.fftn(phi.samples, workers=-1)
    third = np.empty(phi.resolution + (n, n, n), dtype=complex)
    two_pi_i = 2j * np.pi
    for j in range(n):
        for m in range(n):
            for l in range(n):
                mult = (two_pi_i**3) * frame.zeta[j] * frame.zeta[m] * frame.zeta[l].conj()
                third[..., j, m, l] = sfft.ifftn(mult * phi_hat, workers=-1)
    ghat_inv = _pointwise_inverse(orb, gphi)
    # component convention: ghat^{k lbar} = conj(inverse matrix)[k, l]
    s_tensor = np.einsum("...kl,...jml->...kjm", ghat_inv.conj(), third)
    s_sq = np.einsum(
        "...kp,...jq,...mr,...kjm,...pqr->...",
        gphi,
        ghat_inv.conj(),
        ghat_inv.conj(),
        s_tensor,
        s_tensor.conj(),
    ).real
    s_sup = float(np.sqrt(np.clip(s_sq, 0.0, None)).max())

    # Lemma-5.2-type margin with flat background: the Laplacian of
    # log tr_omega(omega_phi) in the evolving metric, plus the background
    # trace of the target Ricci form divided by the trace
    log_tr = np.log(tr)
    hess_log_tr = complex_hessian(phi.with_samples(log_tr)).values
    lap_hat_log_tr = hermitian_contract(ghat_inv, hess_log_tr)
    target = t * f.samples
    if mode == KE:
        target = target + phi.samples
    ricci_trace = -hermitian_contract(
        np.broadcast_to(ginv, gphi.shape),
        complex_hessian(phi.with_samples(target)).values,
    )
    margin_field = lap_hat_log_tr + ricci_trace / tr
    return DiagnosticsReport(
        c0_norm=float(np.abs(phi.samples).max()),
        equivalence_interval=(eig_lo, eig_hi),
        trace_range=(float(tr.min()), float(tr.max())),
        s_norm_sup=s_sup,
        lemma52_margin=float(margin_field.min()),
        volume_error=float(vol_err),
    )
