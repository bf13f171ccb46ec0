"""Manufactured solutions, error norms and convergence studies."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
import sympy

from .fem import Mesh1D, build_mesh, assemble_matrices, inner
from .model import PhysicalParams
from .timestepper import Forcing, RunConfig, Trajectory, run

log = logging.getLogger(__name__)

ERROR_NAMES = ("e_uvel", "e_phivel", "e_ux", "e_phix", "e_phi", "e_w")

_x, _t = sympy.symbols("x t", real=True)


@dataclass(frozen=True)
class ManufacturedSolution:
    """Closed-form fields u, phi, w vanishing at x = 0 and x = l.

    Built from sympy expressions in ``x`` and ``t``; every derivative the
    forcing and the error norms need is differentiated symbolically once and
    compiled to a numpy function. Evaluators are exposed as ``ms.eval(name,
    x, t)`` with names such as ``u``, ``u_tt``, ``u_ttx``, ``phi_tx``.
    """

    name: str
    l: float
    u_expr: sympy.Expr
    phi_expr: sympy.Expr
    w_expr: sympy.Expr
    _funcs: dict = field(default_factory=dict, repr=False, compare=False)

    DERIVS = {
        "u": ("u", ()), "u_t": ("u", (_t,)), "u_tt": ("u", (_t, _t)), "u_x": ("u", (_x,)),
        "u_xx": ("u", (_x, _x)), "u_ttx": ("u", (_t, _t, _x)), "u_tx": ("u", (_t, _x)),
        "phi": ("phi", ()), "phi_t": ("phi", (_t,)), "phi_x": ("phi", (_x,)),
        "phi_xx": ("phi", (_x, _x)), "phi_tx": ("phi", (_t, _x)),
        "w": ("w", ()), "w_t": ("w", (_t,)), "w_x": ("w", (_x,)), "w_xx": ("w", (_x, _x)),
    }

    def __post_init__(self):
        exprs = {"u": self.u_expr, "phi": self.phi_expr, "w": self.w_expr}
        for key, (fld, wrt) in self.DERIVS.items():
            expr = sympy.diff(exprs[fld], *wrt) if wrt else exprs[fld]
            self._funcs[key] = sympy.lambdify((_x, _t), expr, "numpy")

    def eval(self, name: str, x, t: float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.asarray(self._funcs[name](x, t), dtype=float), x.shape).copy()

    def profile(self, name: str, t: float) -> Callable[[np.ndarray], np.ndarray]:
        return lambda x: self.eval(name, x, t)


def sine_family(l: float = 1.0) -> ManufacturedSolution:
    """u = phi = w = exp(-t) sin(pi x / l)."""
    f = sympy.exp(-_t) * sympy.sin(sympy.pi * _x / l)
    return ManufacturedSolution("sine", l, f, f, f)


def mixed_family(l: float = 1.0) -> ManufacturedSolution:
    """Different temporal and spatial shapes per field."""
    k = sympy.pi / l
    return ManufacturedSolution(
        "mixed", l,
        sympy.cos(2 * _t) * sympy.sin(k * _x),
        sympy.exp(-_t / 2) * sympy.sin(2 * k * _x),
        _x * (l - _x) * sympy.sin(k * _x) / (1 + _t**2),
    )


def polynomial_family(l: float = 1.0) -> ManufacturedSolution:
    """Polynomial in x and t, vanishing at both ends."""
    bump = _x * (l - _x)
    return ManufacturedSolution(
        "polynomial", l,
        (1 + _t + _t**2) * bump,
        (2 - _t**3) * bump * _x,
        (1 + _t) ** 2 * bump**2,
    )


FAMILIES = {"sine": sine_family, "mixed": mixed_family, "polynomial": polynomial_family}


def zero_family(l: float = 1.0) -> ManufacturedSolution:
    z = sympy.Integer(0)
    return ManufacturedSolution("zero", l, z, z, z)


def forcing_fields(ms: ManufacturedSolution, p: PhysicalParams, x, t: float):
    """Pointwise residuals (f1, f2, f3) of the three field equations."""
    e = ms.eval
    f1 = p.rho * e("u_tt", x, t) - p.mu * e("u_xx", x, t) - p.b * e("phi_x", x, t)
    f2 = (-p.J * e("u_ttx", x, t) - p.delta * e("phi_xx", x, t) + p.b * e("u_x", x, t)
          + p.xi * e("phi", x, t) + p.d * e("w_x", x, t))
    f3 = (p.alpha * e("w_t", x, t) - p.kappa * e("w_xx", x, t) + p.d * e("phi_tx", x, t)
          + p.k * e("w", x, t))
    return f1, f2, f3


def _consistent_load(mesh: Mesh1D, values: np.ndarray) -> np.ndarray:
    """Interior rows of the full mass matrix applied to nodal samples (boundary included)."""
    h = mesh.h
    return h / 6.0 * values[:-2] + 2.0 * h / 3.0 * values[1:-1] + h / 6.0 * values[2:]


def manufactured_forcing(ms: ManufacturedSolution, p: PhysicalParams, mesh: Mesh1D) -> Forcing:
    """Nodal load vectors reproducing ``ms`` as the exact solution of the forced system."""
    x = mesh.nodes

    def component(i):
        return lambda t: _consistent_load(mesh, forcing_fields(ms, p, x, t)[i])

    return Forcing(f_u=component(0), f_phi=component(1), f_w=component(2))


def verification_config(base: RunConfig, ms: ManufacturedSolution, s: int | None = None,
                        dt: float | None = None) -> RunConfig:
    """Config whose two initial levels are the nodal interpolants of ``ms`` at t = 0, dt."""
    dt = base.dt if dt is None else dt
    return replace(
        base, s=base.s if s is None else s, dt=dt,
        init_u0=ms.profile("u", 0.0), init_u1=ms.profile("u", dt),
        init_phi0=ms.profile("phi", 0.0), init_phi1=ms.profile("phi", dt),
        init_w0=ms.profile("w", 0.0), init_w1=ms.profile("w", dt),
        output_every=1,
    )


def run_manufactured(base: RunConfig, ms: ManufacturedSolution, s: int | None = None,
                     dt: float | None = None) -> Trajectory:
    cfg = verification_config(base, ms, s, dt)
    mesh = build_mesh(cfg.params.l, cfg.s)
    return run(cfg, manufactured_forcing(ms, cfg.params, mesh))


@dataclass(frozen=True)
class ErrorNorms:
    e_uvel: float
    e_phivel: float
    e_ux: float
    e_phix: float
    e_phi: float
    e_w: float

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ERROR_NAMES}


def error_norms(traj: Trajectory, ms: ManufacturedSolution, t_n: float) -> ErrorNorms:
    """Errors at a recorded level against the nodal interpolant of the exact fields.

    Value errors use the Z norm, derivative errors the T seminorm.
    """
    i = traj.frame_index(t_n)
    st = traj.state_at(i)
    if st.n < 2:
        from .errors import InsufficientHistory
        raise InsufficientHistory(st.n)
    t = st.t
    x = traj.mesh.interior
    Z, T = traj.mats.Z, traj.mats.T

    def zn(v):
        return math.sqrt(max(inner(Z, v, v), 0.0))

    def tn(v):
        return math.sqrt(max(inner(T, v, v), 0.0))

    return ErrorNorms(
        e_uvel=zn(st.u_vel - ms.eval("u_t", x, t)),
        e_phivel=zn(st.phi_vel - ms.eval("phi_t", x, t)),
        e_ux=tn(st.A_curr - ms.eval("u", x, t)),
        e_phix=tn(st.B_curr - ms.eval("phi", x, t)),
        e_phi=zn(st.B_curr - ms.eval("phi", x, t)),
        e_w=zn(st.C_curr - ms.eval("w", x, t)),
    )


@dataclass(frozen=True)
class LevelResult:
    s: int
    h: float
    dt: float
    errors: ErrorNorms


@dataclass(frozen=True)
class ConvergenceReport:
    family: str
    space_levels: list
    time_levels: list
    order_h: dict
    order_dt: dict

    def rows(self):
        """(sweep, level, s, h, dt, errors...) tuples, spatial sweep first."""
        for sweep, levels in (("h", self.space_levels), ("dt", self.time_levels)):
            for j, lv in enumerate(levels):
                yield (sweep, j, lv.s, lv.h, lv.dt) + tuple(getattr(lv.errors, k) for k in ERROR_NAMES)


def fitted_order(steps, errors) -> float:
    """Least-squares slope of log(error) against log(step)."""
    steps = np.asarray(steps, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if np.any(errors <= 0):
        return math.nan
    return float(np.polyfit(np.log(steps), np.log(errors), 1)[0])


def convergence_study(base: RunConfig, ms: ManufacturedSolution, levels: int = 5,
                      workers: int | None = None) -> ConvergenceReport:
    """Two refinement sweeps from ``base``.

    Spatial: s doubles across ``levels`` while dt is frozen at the finest
    temporal step divided by 8. Temporal: dt halves while s is frozen at the
    finest spatial resolution times 8. Errors are taken at ``base.t_final``.
    """
    if levels < 3:
        raise ValueError("a convergence study needs at least 3 levels")
    fine = 2 ** (levels - 1)
    dt_frozen = base.dt / fine / 8
    s_frozen = base.s * fine * 8
    jobs = [("h", base.s * 2**j, dt_frozen) for j in range(levels)]
    jobs += [("dt", s_frozen, base.dt / 2**j) for j in range(levels)]

    def work(job):
        _, s, dt = job
        traj = run_manufactured(base, ms, s=s, dt=dt)
        t_end = traj.frame_times[-1]
        return LevelResult(s=s, h=traj.mesh.h, dt=dt, errors=error_norms(traj, ms, t_end))

    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(work, jobs))
    space = results[:levels]
    time_ = results[levels:]
    order_h = {k: fitted_order([r.h for r in space], [getattr(r.errors, k) for r in space]) for k in ERROR_NAMES}
    order_dt = {k: fitted_order([r.dt for r in time_], [getattr(r.errors, k) for r in time_]) for k in ERROR_NAMES}
    for k in ERROR_NAMES:
        log.info("%s: order in h %.3f, order in dt %.3f", k, order_h[k], order_dt[k])
    return ConvergenceReport(ms.name, space, time_, order_h, order_dt)
