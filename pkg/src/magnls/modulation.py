"""Decomposition of a near-soliton state into Q[z] plus symplectically
orthogonal radiation, and its tracking along a trajectory.

The parameter z is fixed by the two real pairing conditions

    B_j(z) = < i (psi - Q[z]), D_j Q[z] > = 0,   j = 1, 2,

with the real pairing <f, g> = Re integral conj(f) g.  B is driven to zero
by a 2x2 Newton iteration with finite-difference Jacobian.  Along a
trajectory the tracker warm-starts each frame from the previous one,
forms the gauge-adjusted parameter w(t) = z(t) exp(i int_0^t E[z] ds), and
reports the modulation residual zdot + i E z through centered differences
of w (the two agree identically; differencing the slow variable avoids the
O(dt^2) bias the fast phase would otherwise inject).  Scattering content is
probed by pulling eta back with the discrete linear group at matched step
size, so the pullback inverts the trajectory's own linear propagator
exactly rather than an incompatible discretization of it.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .bound_states import BoundStateFamily
from .errors import MagnlsError, NewtonDivergence
from .evolution import Trajectory, linear_flow, wrap_around_estimate
from .grid import ComplexField, inner_l2, inner_real, make_field, norm_l2
from .hamiltonian import HamiltonianSpec
from .norms import norm_h1, norm_weighted_h1
from .spectrum import EigenPair


@dataclass(frozen=True)
class DecompositionRecord:
    z: complex
    eta: ComplexField
    ortho_resid: float          # max_j |B_j| at the accepted iterate
    newton_iters: int
    reconstruction_resid: float


@dataclass
class StabilityReport:
    """Per-frame modulation data for one tracked run, on the trajectory's
    snapshot time base."""

    times: np.ndarray
    z_series: np.ndarray
    energy_series: np.ndarray
    gauge_adjusted: np.ndarray           # w = z exp(i int E)
    mod_resid_times: np.ndarray          # interior frames
    mod_resid: np.ndarray                # zdot + i E z at interior frames
    l1_mod_resid: float
    eta_h1: np.ndarray
    eta_weighted_h1: np.ndarray
    ortho_resid: np.ndarray
    eta_q_pairing: np.ndarray
    newton_iters: np.ndarray
    x_norm_eta: tuple[float, float, float]   # weighted L2H1, L3W1p, sup H1
    scattering_checkpoints: np.ndarray
    scattering_gaps: tuple[tuple[float, float, float], ...]  # (t1, t2, gap)
    eta_plus_estimate: ComplexField | None
    symplectic_gram: np.ndarray
    wrap_around: float
    warnings: tuple[str, ...] = dc_field(default_factory=tuple)


def _pairings(family: BoundStateFamily, psi_values: np.ndarray,
              z: complex) -> tuple[np.ndarray, ComplexField, "object"]:
    """B(z) plus the pieces needed to reuse the solves."""
    g = family.spec.grid
    state = family.solve(z)
    deriv = family.derivative_fields(z)
    eta = make_field(g, psi_values - state.field.values)
    b = np.array([
        inner_real(make_field(g, 1j * eta.values), deriv.d1q),
        inner_real(make_field(g, 1j * eta.values), deriv.d2q),
    ])
    return b, eta, deriv


def decompose(spec: HamiltonianSpec, eig: EigenPair, psi: ComplexField,
              family: BoundStateFamily | None = None, *,
              z_guess: complex | None = None, sign: int = 1,
              basin_radius: float | None = None,
              max_newton: int = 50) -> DecompositionRecord:
    """Solve the two orthogonality conditions for z and return (z, eta).

    The cold start is the ground-state coefficient <phi0, psi>.  The state
    must sit inside the decomposition basin: ||psi||_H1 at most 0.3 of the
    amplitude ceiling by default.
    """
    if family is None:
        family = BoundStateFamily(spec, eig, sign)
    cap = 0.3 * family.z_max if basin_radius is None else basin_radius
    psi_h1 = norm_h1(psi)
    if psi_h1 > cap:
        raise MagnlsError(
            f"state too large for the decomposition basin: ||psi||_H1 = "
            f"{psi_h1:.4g} > {cap:.4g}")

    z = complex(inner_l2(eig.phi0, psi)) if z_guess is None else complex(z_guess)
    psi_l2 = norm_l2(psi)
    tol_primary = 1e-12 * (1.0 + psi_l2)

    fd = 1e-6 * max(abs(z), 0.01)
    best = (np.inf, z)
    iters = 0
    converged = False
    for iters in range(1, max_newton + 1):
        b, eta, _ = _pairings(family, psi.values, z)
        bmax = float(np.max(np.abs(b)))
        if bmax < best[0]:
            best = (bmax, z)
        if bmax <= tol_primary:
            converged = True
            # polish toward the radiation-relative tolerance while it helps
            target = 0.3e-10 * max(norm_h1(eta), 1e-300)
            if bmax <= target:
                break
        jac = np.empty((2, 2))
        for k, dz in enumerate((fd, 1j * fd)):
            bp, _, _ = _pairings(family, psi.values, z + dz)
            bm, _, _ = _pairings(family, psi.values, z - dz)
            jac[:, k] = (bp - bm) / (2.0 * fd)
        try:
            update = np.linalg.solve(jac, -b)
        except np.linalg.LinAlgError as exc:
            if converged:
                break
            raise NewtonDivergence(f"singular Jacobian at z = {z}") from exc
        step_z = complex(update[0], update[1])
        if not np.isfinite(step_z.real) or not np.isfinite(step_z.imag):
            if converged:
                break
            raise NewtonDivergence(f"non-finite Newton step at z = {z}")
        if abs(z + step_z) > family.z_max:
            if converged:
                break
            raise NewtonDivergence(
                f"Newton iterate |z| = {abs(z + step_z):.4g} escaped the "
                "family ceiling")
        z = z + step_z
        if converged and abs(step_z) < 1e-16 * max(1.0, abs(z)):
            break
    if not converged:
        raise NewtonDivergence(
            f"pairing conditions stalled at |B| = {best[0]:.3e} after "
            f"{iters} iterations (target {tol_primary:.1e})")

    z = best[1]
    b, eta, _ = _pairings(family, psi.values, z)
    state = family.solve(z)
    recon = norm_l2(make_field(
        spec.grid, psi.values - state.field.values - eta.values))
    return DecompositionRecord(z=z, eta=eta,
                               ortho_resid=float(np.max(np.abs(b))),
                               newton_iters=iters,
                               reconstruction_resid=float(recon))


def symplectic_gram(family: BoundStateFamily, z: complex) -> np.ndarray:
    """Gram matrix G_jk = < D_j Q, i D_k Q >; approaches [[0,-1],[1,0]] as
    z -> 0.  Recorded, not asserted: the continuum normalization of the
    off-diagonal entries is left as an observation."""
    d = family.derivative_fields(z)
    g = family.spec.grid
    out = np.empty((2, 2))
    for j, dj in enumerate((d.d1q, d.d2q)):
        for k, dk in enumerate((d.d1q, d.d2q)):
            out[j, k] = inner_real(dj, make_field(g, 1j * dk.values))
    return out


def scattering_gap(spec: HamiltonianSpec, eta1: ComplexField, t1: float,
                   eta2: ComplexField, t2: float, *, dt: float = 1e-3,
                   cn_tol: float = 1e-12) -> float:
    """H1 distance between the linear pullbacks exp(+i t H) eta(t) at two
    times; a Cauchy increment of the scattering limit."""
    p1 = linear_flow(spec, eta1, -t1, dt=dt, cn_tol=cn_tol)
    p2 = linear_flow(spec, eta2, -t2, dt=dt, cn_tol=cn_tol)
    return norm_h1(make_field(spec.grid, p2.values - p1.values))


def track(spec: HamiltonianSpec, eig: EigenPair, traj: Trajectory,
          family: BoundStateFamily | None = None, *, sign: int = 1,
          sigma: float = 4.1,
          checkpoint_fractions=(0.25, 0.5, 0.75, 1.0)) -> StabilityReport:
    """Decompose every snapshot of a trajectory and assemble the modulation
    diagnostics."""
    from .analysis import XNormAccumulator  # local import; analysis sits above

    if family is None:
        family = BoundStateFamily(spec, eig, sign)
    g = spec.grid
    times = np.asarray(traj.times)
    n = times.size
    if n < 5:
        raise MagnlsError("trajectory too short to track (need >= 5 frames)")
    stride_dt = float(times[1] - times[0])
    warnings: list[str] = list(traj.warnings)
    if stride_dt > 0.1 + 1e-12:
        raise MagnlsError(
            f"snapshot spacing {stride_dt:.3g} too coarse for differencing "
            "(need stride * dt <= 0.1)")

    t_wrap = wrap_around_estimate(traj.snapshots[0])
    if times[-1] > t_wrap:
        warnings.append(
            f"tracking window {times[-1]:.3g} exceeds wrap-around estimate "
            f"{t_wrap:.3g}")

    zs = np.empty(n, dtype=np.complex128)
    energies = np.empty(n)
    eta_h1 = np.empty(n)
    eta_w_h1 = np.empty(n)
    ortho = np.empty(n)
    pairing = np.empty(n)
    nit = np.empty(n, dtype=np.int64)
    acc = XNormAccumulator(sigma)

    t_final = float(times[-1])
    checkpoint_targets = [f * t_final for f in checkpoint_fractions]
    checkpoint_idx = sorted({int(np.argmin(np.abs(times - tc)))
                             for tc in checkpoint_targets})
    checkpoint_etas: dict[int, ComplexField] = {}

    z_guess: complex | None = None
    for j in range(n):
        rec = decompose(spec, eig, traj.snapshots[j], family,
                        z_guess=z_guess, sign=sign)
        z_guess = rec.z
        zs[j] = rec.z
        energies[j] = family.energy(rec.z)
        eta_h1[j] = norm_h1(rec.eta)
        eta_w_h1[j] = norm_weighted_h1(rec.eta, sigma)
        ortho[j] = rec.ortho_resid
        q_field = family.solve(rec.z).field
        pairing[j] = inner_real(rec.eta, q_field)
        nit[j] = rec.newton_iters
        acc.add(float(times[j]), rec.eta)
        if j in checkpoint_idx:
            checkpoint_etas[j] = rec.eta

    cum_e = np.concatenate(([0.0], np.cumsum(
        0.5 * (energies[1:] + energies[:-1]) * np.diff(times))))
    w = zs * np.exp(1j * cum_e)

    interior = slice(1, n - 1)
    wdot = (w[2:] - w[:-2]) / (times[2:] - times[:-2])
    mod_resid = wdot * np.exp(-1j * cum_e[interior])
    t_int = times[interior]
    l1 = float(np.trapezoid(np.abs(mod_resid), t_int)) if t_int.size > 1 else 0.0

    gaps = []
    idx_list = sorted(checkpoint_etas)
    pullbacks = {
        j: linear_flow(spec, checkpoint_etas[j], -float(times[j]), dt=traj.dt)
        for j in idx_list
    }
    for j1, j2 in zip(idx_list, idx_list[1:]):
        d = norm_h1(make_field(g, pullbacks[j2].values - pullbacks[j1].values))
        gaps.append((float(times[j1]), float(times[j2]), float(d)))
    eta_plus = pullbacks[idx_list[-1]] if idx_list else None

    return StabilityReport(
        times=times, z_series=zs, energy_series=energies, gauge_adjusted=w,
        mod_resid_times=t_int, mod_resid=mod_resid, l1_mod_resid=l1,
        eta_h1=eta_h1, eta_weighted_h1=eta_w_h1, ortho_resid=ortho,
        eta_q_pairing=pairing, newton_iters=nit, x_norm_eta=acc.components(),
        scattering_checkpoints=np.array([times[j] for j in idx_list]),
        scattering_gaps=tuple(gaps), eta_plus_estimate=eta_plus,
        symplectic_gram=symplectic_gram(family, zs[0]),
        wrap_around=float(t_wrap), warnings=tuple(warnings))


def gauge_adjusted_variation(report: StabilityReport) -> tuple[float, float]:
    """Total variation of w over the first and second halves of the window."""
    w = report.gauge_adjusted
    t = report.times
    mid = 0.5 * (t[0] + t[-1])
    dv = np.abs(np.diff(w))
    centers = 0.5 * (t[1:] + t[:-1])
    first = float(np.sum(dv[centers <= mid]))
    second = float(np.sum(dv[centers > mid]))
    return first, second
