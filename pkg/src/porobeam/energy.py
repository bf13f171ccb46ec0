"""Discrete energy, its dissipation law, Lyapunov functionals and decay fits.

All quadratic quantities are evaluated exactly on the P1 fields: values
through the mass matrix Z, derivatives through the stiffness matrix T and
mixed products int v_x q through the convection matrix X.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, fields

import numpy as np

from .errors import InsufficientHistory, NonPositiveEnergy, WindowTooSmall
from .fem import FemMatrices, gradient_plus_value_sq, inner
from .model import LyapunovConstants, PhysicalParams

log = logging.getLogger(__name__)

DISSIPATION_TOL_REL = 1e-9


@dataclass(frozen=True)
class EnergyBreakdown:
    kinetic: float
    accel: float
    elastic: float
    vel_grad: float
    porous_grad: float
    coupled: float
    thermal: float

    @property
    def total(self) -> float:
        return (self.kinetic + self.accel + self.elastic + self.vel_grad
                + self.porous_grad + self.coupled + self.thermal)

    def terms(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _require_history(state, need: int = 2) -> None:
    if state.n < need:
        raise InsufficientHistory(state.n)


def discrete_energy(state, p: PhysicalParams, mats: FemMatrices) -> EnergyBreakdown:
    _require_history(state)
    Z, T = mats.Z, mats.T
    u, phi, w = state.A_curr, state.B_curr, state.C_curr
    vel, acc = state.u_vel, state.u_acc
    sxi = math.sqrt(p.xi)
    return EnergyBreakdown(
        kinetic=0.5 * p.rho * inner(Z, vel, vel),
        accel=0.5 * (p.J * p.rho / p.b) * inner(Z, acc, acc),
        elastic=0.5 * p.reduced_modulus * inner(T, u, u),
        vel_grad=0.5 * (p.J * p.mu / p.b) * inner(T, vel, vel),
        porous_grad=0.5 * p.delta * inner(T, phi, phi),
        coupled=0.5 * gradient_plus_value_sq(mats.mesh, u, phi, p.b / sxi, sxi),
        thermal=0.5 * p.alpha * inner(Z, w, w),
    )


def dissipation_rate(state, p: PhysicalParams, mats: FemMatrices) -> float:
    """kappa ||w_x||^2 + k ||w||^2 at the current level."""
    w = state.C_curr
    return p.kappa * inner(mats.T, w, w) + p.k * inner(mats.Z, w, w)


@dataclass(frozen=True)
class DissipationReport:
    steps: np.ndarray
    residuals: np.ndarray
    bounds: np.ndarray
    max_residual: float
    violations: np.ndarray

    @property
    def ok(self) -> bool:
        return self.violations.size == 0


def dissipation_check(traj, tol_rel: float = DISSIPATION_TOL_REL) -> DissipationReport:
    """Residual r_n = (E_n - E_{n-1})/dt + kappa||w_x^n||^2 + k||w^n||^2 per step.

    The scheme guarantees r_n <= 0 up to rounding; a step violates the check
    when r_n > tol_rel * E_{n-1} / dt.
    """
    E = traj.total_energy
    dt = traj.dt
    if E.size < 2:
        empty = np.empty(0)
        return DissipationReport(np.empty(0, dtype=int), empty, empty, -math.inf, np.empty(0, dtype=int))
    r = (E[1:] - E[:-1]) / dt + traj.dissipation_rate[1:]
    bounds = tol_rel * E[:-1] / dt
    steps = np.asarray(traj.steps[1:])
    return DissipationReport(
        steps=steps, residuals=r, bounds=bounds, max_residual=float(r.max()),
        violations=steps[r > bounds],
    )


@dataclass(frozen=True)
class LyapunovValues:
    F: float
    G: float
    L: float
    E: float
    margin: float


def lyapunov_values(state, p: PhysicalParams, mats: FemMatrices,
                    consts: LyapunovConstants) -> LyapunovValues:
    """Multiplier functionals on a discrete state.

    u_t is read as the backward difference of u, u_tt as the second
    backward difference; the margin is min(L - nu1 E, nu2 E - L).
    """
    _require_history(state)
    Z, T, X = mats.Z, mats.T, mats.X
    u, phi, w = state.A_curr, state.B_curr, state.C_curr
    vel = state.u_vel
    sxi = math.sqrt(p.xi)

    F = p.rho * inner(Z, u, vel) + (p.J * p.mu / p.b) * inner(T, u, vel)
    # (vel_x, phi) = phi^T X vel
    vel_x_phi = inner(X, vel, phi)
    vel_x_S = (p.b / sxi) * inner(T, u, vel) + sxi * vel_x_phi
    G = (-p.J * vel_x_S
         - p.delta * p.rho * p.b / (p.mu * sxi) * vel_x_phi
         + p.alpha * consts.C1 / p.d * inner(Z, vel, w))
    E = discrete_energy(state, p, mats).total
    L = consts.N1 * E + F + consts.N2 * G
    margin = min(L - consts.nu1 * E, consts.nu2 * E - L)
    return LyapunovValues(F=F, G=G, L=L, E=E, margin=margin)


def lyapunov_series(traj, consts: LyapunovConstants) -> list[LyapunovValues]:
    return [lyapunov_values(traj.state_at(i), traj.params, traj.mats, consts)
            for i in range(len(traj.frame_steps))]


def lyapunov_rate_diagnostic(values: list[LyapunovValues], dt: float, consts: LyapunovConstants) -> float:
    """Fraction of consecutive frames with (L_n - L_{n-1})/dt <= -beta E_n.

    Only logged: the discrete difference quotient carries O(dt) errors the
    continuous estimate does not account for.
    """
    if len(values) < 2:
        return math.nan
    ok = sum((b.L - a.L) / dt <= -consts.beta * b.E for a, b in zip(values, values[1:]))
    frac = ok / (len(values) - 1)
    log.info("dL/dt <= -beta E held on %.1f%% of frame pairs", 100 * frac)
    return frac


@dataclass(frozen=True)
class DecayFit:
    omega_hat: float
    log_intercept: float
    r_squared: float
    n_samples: int


def fit_decay_rate(t, E, tail_fraction: float = 0.5) -> DecayFit:
    """Least-squares line through (t, log E) on the last ``tail_fraction`` of samples."""
    t = np.asarray(t, dtype=float)
    E = np.asarray(E, dtype=float)
    if not 0.0 < tail_fraction <= 1.0:
        raise ValueError(f"tail_fraction must lie in (0, 1] (got {tail_fraction})")
    m = int(math.ceil(tail_fraction * len(E)))
    if m < 3:
        raise WindowTooSmall(m)
    start = len(E) - m
    t, E = t[start:], E[start:]
    bad = np.flatnonzero(~(E > 0))
    if bad.size:
        raise NonPositiveEnergy(start + int(bad[0]), E[bad[0]])
    y = np.log(E)
    slope, intercept = np.polyfit(t, y, 1)
    ss_res = float(np.sum((y - (slope * t + intercept)) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot <= 1e-28 * max(1.0, float(np.sum(y**2))):
        # flat series: a constant is fitted perfectly
        r2 = 1.0
        slope = 0.0
    else:
        r2 = min(max(1.0 - ss_res / ss_tot, 0.0), 1.0)
    return DecayFit(omega_hat=float(-slope), log_intercept=float(intercept), r_squared=r2, n_samples=m)
