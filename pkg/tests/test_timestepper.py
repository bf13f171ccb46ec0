import numpy as np
import pytest

from porobeam.errors import DimensionMismatch
from porobeam.fem import assemble_matrices, build_mesh
from porobeam.model import PhysicalParams, reference_params
from porobeam.timestepper import (RunConfig, SolverState, advance, init_history, run,
                                  step_operator, step_rhs)

from conftest import reference_config
from test_fem import gauss_oracle


def dense_step(state, p, l, s):
    """Brute-force level n+1 from quadrature matrices and a dense solve."""
    Z, T, X = gauss_oracle(l, s)
    Y = X.T
    dt = state.dt
    O = np.zeros_like(Z)
    M = np.block([
        [p.rho / dt**2 * Z + p.mu * T, p.b * Y, O],
        [p.J / dt**2 * Y + p.b * X, p.delta * T + p.xi * Z, p.d * X],
        [O, p.d / dt * X, (p.alpha / dt + p.k) * Z + p.kappa * T],
    ])
    e = 2 * state.A_curr - state.A_prev
    rhs = np.concatenate([p.rho / dt**2 * Z @ e, p.J / dt**2 * Y @ e,
                          p.alpha / dt * Z @ state.C_curr + p.d / dt * X @ state.B_curr])
    sol = np.linalg.solve(M, rhs)
    n = s - 1
    return sol[:n], sol[n:2 * n], sol[2 * n:]


def random_state(rng, s, dt):
    n = s - 1
    v = [rng.normal(size=n) for _ in range(5)]
    return SolverState(A_curr=v[0], A_prev=v[1], A_prev2=v[1].copy(), B_curr=v[2], B_prev=v[2].copy(),
                       C_curr=v[3], C_prev=v[4], n=2, dt=dt)


@pytest.mark.parametrize("s", [2, 3, 4])
@pytest.mark.parametrize("params", ["reference", "unit"])
def test_dense_oracle_three_steps(s, params, rng):
    p = reference_params() if params == "reference" else PhysicalParams(1, 2, 0.5, 1, 1, 1, 0.5, 1, 1, 1, 1.0)
    mats = assemble_matrices(build_mesh(1.0, s))
    state = random_state(rng, s, 0.05)
    ref = state
    for _ in range(3):
        state = advance(state, p, mats)
        A, B, C = dense_step(ref, p, 1.0, s)
        ref = SolverState(A_curr=A, A_prev=ref.A_curr, A_prev2=ref.A_prev, B_curr=B, B_prev=ref.B_curr,
                          C_curr=C, C_prev=ref.C_curr, n=ref.n + 1, dt=ref.dt)
        got = np.concatenate([state.A_curr, state.B_curr, state.C_curr])
        want = np.concatenate([A, B, C])
        assert np.linalg.norm(got - want) <= 1e-12 * np.linalg.norm(want)


def test_s2_hand_assembled():
    # s = 2, l = 1: Z = [1/3], T = [4], X = Y = [0] decouples the three equations
    p = PhysicalParams(1, 2, 0.5, 1, 1, 1, 0.5, 1, 1, 1, 1.0)
    dt = 0.1
    mats = assemble_matrices(build_mesh(1.0, 2))
    st = SolverState(A_curr=np.array([1.0]), A_prev=np.array([0.5]), A_prev2=np.array([0.5]),
                     B_curr=np.array([2.0]), B_prev=np.array([2.0]), C_curr=np.array([3.0]),
                     C_prev=np.array([3.0]), n=2, dt=dt)
    new = advance(st, p, mats)
    a = (p.rho / dt**2 / 3 * 1.5) / (p.rho / dt**2 / 3 + 4 * p.mu)
    c = (p.alpha / dt / 3 * 3.0) / ((p.alpha / dt + p.k) / 3 + 4 * p.kappa)
    assert new.A_curr == pytest.approx([a], rel=1e-14)
    assert new.B_curr == pytest.approx([0.0], abs=1e-15)
    assert new.C_curr == pytest.approx([c], rel=1e-14)


def test_zero_state_is_fixed_point():
    p = reference_params()
    mats = assemble_matrices(build_mesh(1.0, 11))
    z = np.zeros(10)
    st = SolverState(z, z, z, z, z, z, z, n=2, dt=0.1)
    assert not step_rhs(st, p, mats).any()
    for _ in range(5):
        st, rel = advance(st, p, mats, return_residual=True)
        assert rel == 0.0
    assert not np.concatenate([st.A_curr, st.B_curr, st.C_curr]).any()


def test_init_history_reference(reference_cfg):
    st = init_history(reference_cfg, build_mesh(1.0, 11))
    i = np.arange(1, 11)
    assert st.A_prev == pytest.approx((i / 11) * (1 - i / 11))
    assert np.array_equal(st.A_prev, st.A_prev2)
    assert not st.u_vel.any()
    mats = assemble_matrices(build_mesh(1.0, 11))
    p = reference_cfg.params
    rhs = step_rhs(st, p, mats)
    assert rhs[:10] == pytest.approx(p.rho / st.dt**2 * (mats.Z @ st.A_curr), rel=1e-14)


def test_zero_profiles_zero_state():
    cfg = reference_config(init_u0="zero", init_u1="zero", init_phi0="zero", init_phi1="zero", init_w0="zero")
    st = init_history(cfg, build_mesh(1.0, 11))
    for v in (st.A_curr, st.A_prev, st.B_curr, st.B_prev, st.C_curr, st.C_prev):
        assert not v.any()


def test_step_counts(reference_run):
    assert len(reference_run) == 549
    assert reference_run.steps[0] == 2 and reference_run.steps[-1] == 550
    short = run(reference_config(t_final=2 / 22))
    assert len(short) == 1


def test_residuals_small(reference_run):
    assert reference_run.residuals.max() <= 1e-10


def test_output_cadence():
    traj = run(reference_config(t_final=1.0, output_every=5))
    assert traj.frame_steps.tolist() == list(range(2, 23, 5))
    assert len(traj.energies) == len(traj) == 21
    assert traj.u.shape == (len(traj.frame_steps), 10)


def test_deterministic():
    a = run(reference_config(t_final=2.0))
    b = run(reference_config(t_final=2.0))
    assert np.array_equal(a.u, b.u) and np.array_equal(a.total_energy, b.total_energy)


def test_operator_cached():
    p = reference_params()
    mats = assemble_matrices(build_mesh(1.0, 11))
    assert step_operator(p, mats, 1 / 22) is step_operator(p, mats, 1 / 22)


def test_dimension_mismatch():
    p = reference_params()
    mats = assemble_matrices(build_mesh(1.0, 11))
    z = np.zeros(3)
    with pytest.raises(DimensionMismatch):
        step_rhs(SolverState(z, z, z, z, z, z, z, n=2, dt=0.1), p, mats)


@pytest.mark.parametrize("kw", [dict(dt=0.0), dict(dt=-1.0), dict(t_final=1 / 22), dict(output_every=0)])
def test_bad_run_config(kw):
    with pytest.raises(ValueError):
        reference_config(**kw)


def test_state_at_roundtrip(reference_run):
    st = reference_run.state_at(3)
    assert st.n == reference_run.frame_steps[3]
    assert st.t == pytest.approx(st.n / 22)
    assert reference_run.frame_index(st.t) == 3
