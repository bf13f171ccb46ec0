"""Implicit Euler / P1 time stepping of the coupled (u, phi, w) system.

Each step solves one monolithic linear system for the interior nodal vectors
(A^n, B^n, C^n) of u, phi and w:

    (rho/dt^2) Z A + mu T A + b Y B                    = (rho/dt^2) Z (2A' - A'') + f_u
    (J/dt^2) Y A + b X A + (delta T + xi Z) B + d X C  = (J/dt^2) Y (2A' - A'') + f_phi
    (d/dt) X B + ((alpha/dt + k) Z + kappa T) C        = (alpha/dt) Z C' + (d/dt) X B' + f_w

where primes denote the previous levels. The matrix depends on (params,
mesh, dt) only, so its banded LU factorization is computed once and reused.
"""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
import scipy.sparse as sp
from scipy.linalg import lapack

from . import energy as energy_mod
from .errors import DimensionMismatch, ResidualTooLarge, SingularSystem
from .fem import FemMatrices, Mesh1D, assemble_matrices, build_mesh, interpolate_nodal
from .model import PhysicalParams

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-10

Profile = Union[str, Callable[[np.ndarray], np.ndarray]]


def resolve_profile(spec: Profile, l: float) -> Callable[[np.ndarray], np.ndarray]:
    """Turn a named initial profile into a pointwise function on (0, l).

    ``parabola`` is x(l - x)/l^2 (exactly (1 - x)x for l = 1), ``sine:m`` is
    sin(m pi x / l), ``zero`` is identically 0. Callables pass through.
    """
    if callable(spec):
        return spec
    name = str(spec).strip().lower()
    if name == "parabola":
        return lambda x: x * (l - x) / l**2
    if name == "zero":
        return lambda x: np.zeros_like(x)
    if name.startswith("sine:"):
        try:
            m = int(name.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad sine mode in profile {spec!r}") from None
        return lambda x: np.sin(m * math.pi * x / l)
    raise ValueError(f"unknown initial profile {spec!r}")


@dataclass(frozen=True)
class RunConfig:
    params: PhysicalParams
    s: int
    dt: float
    t_final: float
    init_u0: Profile = "parabola"
    init_u1: Profile = "parabola"
    init_phi0: Profile = "parabola"
    init_phi1: Profile = "parabola"
    init_w0: Profile = "parabola"
    # None means w^1 := w^0
    init_w1: Optional[Profile] = None
    output_every: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive (got {self.dt})")
        if self.n_final < 2:
            raise ValueError(f"t_final={self.t_final} must be at least 2*dt={2 * self.dt}")
        if int(self.output_every) != self.output_every or self.output_every < 1:
            raise ValueError(f"output_every must be a positive integer (got {self.output_every})")

    @property
    def n_final(self) -> int:
        return int(round(self.t_final / self.dt))

    @property
    def n_solves(self) -> int:
        return self.n_final - 1


@dataclass(frozen=True)
class SolverState:
    """Nodal history after level ``n`` has been computed.

    ``A_curr, A_prev, A_prev2`` hold u at t_n, t_{n-1}, t_{n-2}; phi and w
    keep two levels. At n = 1 (initial data only) ``A_prev2`` is a copy of
    ``A_prev`` and must not be used.
    """

    A_curr: np.ndarray
    A_prev: np.ndarray
    A_prev2: np.ndarray
    B_curr: np.ndarray
    B_prev: np.ndarray
    C_curr: np.ndarray
    C_prev: np.ndarray
    n: int
    dt: float

    @property
    def t(self) -> float:
        return self.n * self.dt

    @property
    def u_vel(self) -> np.ndarray:
        return (self.A_curr - self.A_prev) / self.dt

    @property
    def u_acc(self) -> np.ndarray:
        return (self.A_curr - 2.0 * self.A_prev + self.A_prev2) / self.dt**2

    @property
    def phi_vel(self) -> np.ndarray:
        return (self.B_curr - self.B_prev) / self.dt

    @property
    def w_vel(self) -> np.ndarray:
        return (self.C_curr - self.C_prev) / self.dt


@dataclass(frozen=True)
class Forcing:
    """Time-dependent nodal load vectors; ``None`` entries mean zero."""

    f_u: Optional[Callable[[float], np.ndarray]] = None
    f_phi: Optional[Callable[[float], np.ndarray]] = None
    f_w: Optional[Callable[[float], np.ndarray]] = None

    @property
    def is_zero(self) -> bool:
        return self.f_u is None and self.f_phi is None and self.f_w is None

    def loads(self, t: float, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        out = []
        for f in (self.f_u, self.f_phi, self.f_w):
            out.append(np.zeros(n) if f is None else np.asarray(f(t), dtype=float))
        return tuple(out)


ZERO_FORCING = Forcing()


def init_history(cfg: RunConfig, mesh: Mesh1D) -> SolverState:
    l = mesh.l
    u0 = interpolate_nodal(resolve_profile(cfg.init_u0, l), mesh)
    u1 = interpolate_nodal(resolve_profile(cfg.init_u1, l), mesh)
    phi0 = interpolate_nodal(resolve_profile(cfg.init_phi0, l), mesh)
    phi1 = interpolate_nodal(resolve_profile(cfg.init_phi1, l), mesh)
    w0 = interpolate_nodal(resolve_profile(cfg.init_w0, l), mesh)
    w1 = w0.copy() if cfg.init_w1 is None else interpolate_nodal(resolve_profile(cfg.init_w1, l), mesh)
    return SolverState(
        A_curr=u1, A_prev=u0, A_prev2=u0.copy(),
        B_curr=phi1, B_prev=phi0,
        C_curr=w1, C_prev=w0,
        n=1, dt=cfg.dt,
    )


def system_matrix(p: PhysicalParams, mats: FemMatrices, dt: float) -> sp.csr_array:
    """Block matrix of one step, unknowns ordered [A; B; C]."""
    Z, T, X, Y = mats.Z, mats.T, mats.X, mats.Y
    return sp.block_array(
        [
            [p.rho / dt**2 * Z + p.mu * T, p.b * Y, None],
            [p.J / dt**2 * Y + p.b * X, p.delta * T + p.xi * Z, p.d * X],
            [None, p.d / dt * X, (p.alpha / dt + p.k) * Z + p.kappa * T],
        ],
        format="csr",
    )


def step_rhs(state: SolverState, p: PhysicalParams, mats: FemMatrices,
             forcing: Forcing = ZERO_FORCING) -> np.ndarray:
    dt = state.dt
    for v in (state.A_curr, state.A_prev, state.B_curr, state.C_curr):
        if v.shape != (mats.n,):
            raise DimensionMismatch(f"state vector of shape {v.shape} does not match {mats.n} dofs")
    f_u, f_phi, f_w = forcing.loads((state.n + 1) * dt, mats.n)
    extrap = 2.0 * state.A_curr - state.A_prev
    r1 = p.rho / dt**2 * (mats.Z @ extrap) + f_u
    r2 = p.J / dt**2 * (mats.Y @ extrap) + f_phi
    r3 = p.alpha / dt * (mats.Z @ state.C_curr) + p.d / dt * (mats.X @ state.B_curr) + f_w
    return np.concatenate([r1, r2, r3])


def assemble_step_system(state: SolverState, p: PhysicalParams, mats: FemMatrices,
                         forcing: Forcing = ZERO_FORCING) -> tuple[sp.csr_array, np.ndarray]:
    """Matrix and right-hand side whose solution is level n+1."""
    return system_matrix(p, mats, state.dt), step_rhs(state, p, mats, forcing)


class StepOperator:
    """Banded LU of the step matrix in node-interleaved ordering.

    Interleaving (A_i, B_i, C_i) turns the 3x3 block-tridiagonal system into
    a band matrix with 5 sub- and 5 super-diagonals.
    """

    KL = KU = 5

    def __init__(self, p: PhysicalParams, mats: FemMatrices, dt: float):
        self.p, self.mats, self.dt = p, mats, dt
        n = mats.n
        self.size = 3 * n
        self.matrix = system_matrix(p, mats, dt)
        # order[3i + f] = f*n + i
        self.order = (np.arange(3)[None, :] * n + np.arange(n)[:, None]).ravel()
        self.inverse_order = np.argsort(self.order)
        permuted = self.matrix[self.order][:, self.order].tocoo()
        kl, ku = self.KL, self.KU
        ab = np.zeros((2 * kl + ku + 1, self.size))
        ab[kl + ku + permuted.row - permuted.col, permuted.col] = permuted.data
        lu, piv, info = lapack.dgbtrf(ab, kl, ku)
        if info != 0:
            raise SingularSystem(f"banded LU broke down at pivot {info}")
        self._lu, self._piv = lu, piv

    def solve(self, rhs: np.ndarray, check: bool = True) -> tuple[np.ndarray, float]:
        """Solve and return (solution, relative residual).

        The rhs is scaled to unit max-norm first; long runs decay towards the
        subnormal range, where the residual itself would lose its meaning.
        """
        scale = float(np.abs(rhs).max()) if rhs.size else 0.0
        if scale == 0.0:
            return np.zeros_like(rhs), 0.0
        r = rhs / scale
        x, info = lapack.dgbtrs(self._lu, self.KL, self.KU, r[self.order], self._piv)
        if info != 0:
            raise SingularSystem(f"banded solve failed (info={info})")
        x = x[self.inverse_order]
        if not np.all(np.isfinite(x)):
            raise SingularSystem("non-finite solution")
        rel = float(np.linalg.norm(self.matrix @ x - r) / np.linalg.norm(r))
        if check and rel > RESIDUAL_TOL:
            raise ResidualTooLarge(rel, RESIDUAL_TOL)
        return x * scale, rel


@functools.lru_cache(maxsize=32)
def _cached_operator(p: PhysicalParams, l: float, s: int, dt: float) -> StepOperator:
    return StepOperator(p, assemble_matrices(build_mesh(l, s)), dt)


def step_operator(p: PhysicalParams, mats: FemMatrices, dt: float) -> StepOperator:
    return _cached_operator(p, mats.mesh.l, mats.mesh.s, float(dt))


def advance(state: SolverState, p: PhysicalParams, mats: FemMatrices,
            forcing: Forcing = ZERO_FORCING, operator: StepOperator | None = None,
            return_residual: bool = False):
    """Solve for level n+1 and rotate the history."""
    op = operator if operator is not None else step_operator(p, mats, state.dt)
    sol, rel = op.solve(step_rhs(state, p, mats, forcing))
    n = mats.n
    new = SolverState(
        A_curr=sol[:n], A_prev=state.A_curr, A_prev2=state.A_prev,
        B_curr=sol[n:2 * n], B_prev=state.B_curr,
        C_curr=sol[2 * n:], C_prev=state.C_curr,
        n=state.n + 1, dt=state.dt,
    )
    return (new, rel) if return_residual else new


@dataclass
class Trajectory:
    """Per-step scalars for every solved level plus field frames at the output cadence."""

    params: PhysicalParams
    mesh: Mesh1D
    mats: FemMatrices
    dt: float
    output_every: int
    steps: np.ndarray
    times: np.ndarray
    energies: list
    dissipation_rate: np.ndarray
    residuals: np.ndarray
    frame_steps: np.ndarray
    u: np.ndarray
    u_prev: np.ndarray
    u_prev2: np.ndarray
    phi: np.ndarray
    phi_prev: np.ndarray
    w: np.ndarray
    w_prev: np.ndarray
    initial: SolverState = field(repr=False, default=None)

    @property
    def total_energy(self) -> np.ndarray:
        return np.array([e.total for e in self.energies])

    @property
    def frame_times(self) -> np.ndarray:
        return self.frame_steps * self.dt

    def __len__(self) -> int:
        return len(self.steps)

    def state_at(self, i: int) -> SolverState:
        """Reconstruct the solver state of recorded frame ``i``."""
        return SolverState(
            A_curr=self.u[i], A_prev=self.u_prev[i], A_prev2=self.u_prev2[i],
            B_curr=self.phi[i], B_prev=self.phi_prev[i],
            C_curr=self.w[i], C_prev=self.w_prev[i],
            n=int(self.frame_steps[i]), dt=self.dt,
        )

    def frame_index(self, t: float) -> int:
        n = int(round(t / self.dt))
        hits = np.flatnonzero(self.frame_steps == n)
        if hits.size == 0 or abs(n * self.dt - t) > 1e-9 * max(1.0, abs(t)):
            from .errors import StepNotRecorded
            raise StepNotRecorded(t)
        return int(hits[0])


def run(cfg: RunConfig, forcing: Forcing = ZERO_FORCING) -> Trajectory:
    """Advance from the two initial levels to t_final.

    Performs ``round(t_final/dt) - 1`` coupled solves (levels n = 2 ..
    round(t_final/dt)). Energies are recorded at every level, fields at
    n = 2 and every ``output_every`` levels after.
    """
    p = cfg.params
    mesh = build_mesh(p.l, cfg.s)
    mats = assemble_matrices(mesh)
    op = step_operator(p, mats, cfg.dt)
    state = init_history(cfg, mesh)
    initial = state

    n_solves = cfg.n_solves
    steps = np.arange(2, 2 + n_solves)
    energies = []
    diss = np.empty(n_solves)
    residuals = np.empty(n_solves)
    keep = [(n - 2) % cfg.output_every == 0 for n in steps]
    frames: dict[str, list] = {k: [] for k in ("u", "u_prev", "u_prev2", "phi", "phi_prev", "w", "w_prev")}

    for i in range(n_solves):
        state, residuals[i] = advance(state, p, mats, forcing, op, return_residual=True)
        energies.append(energy_mod.discrete_energy(state, p, mats))
        diss[i] = energy_mod.dissipation_rate(state, p, mats)
        if keep[i]:
            frames["u"].append(state.A_curr)
            frames["u_prev"].append(state.A_prev)
            frames["u_prev2"].append(state.A_prev2)
            frames["phi"].append(state.B_curr)
            frames["phi_prev"].append(state.B_prev)
            frames["w"].append(state.C_curr)
            frames["w_prev"].append(state.C_prev)

    log.debug("run finished: %d solves, max residual %.2e", n_solves, residuals.max())
    return Trajectory(
        params=p, mesh=mesh, mats=mats, dt=cfg.dt, output_every=cfg.output_every,
        steps=steps, times=steps * cfg.dt, energies=energies,
        dissipation_rate=diss, residuals=residuals,
        frame_steps=steps[np.array(keep, dtype=bool)],
        initial=initial,
        **{k: np.array(v).reshape(len(v), mats.n) for k, v in frames.items()},
    )
