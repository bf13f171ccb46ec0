"""Uniform 1D mesh and P1 finite-element matrices on interior nodes.

Dirichlet conditions are imposed by dropping the two boundary nodes, so all
vectors here live on x_1 .. x_{s-1}. Matrices are tridiagonal and kept in
diagonal (band) storage; row index is the test function, column the trial.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch, NonFiniteSample, TooFewElements


@dataclass(frozen=True)
class Mesh1D:
    l: float
    s: int
    h: float
    nodes: np.ndarray

    @property
    def interior(self) -> np.ndarray:
        return self.nodes[1:-1]

    @property
    def n_dofs(self) -> int:
        return self.s - 1


def build_mesh(l: float, s: int) -> Mesh1D:
    if int(s) != s or s < 2:
        raise TooFewElements(s)
    if not l > 0:
        raise ValueError(f"domain length must be positive (got {l})")
    s = int(s)
    nodes = np.linspace(0.0, l, s + 1)
    nodes.setflags(write=False)
    return Mesh1D(l=float(l), s=s, h=l / s, nodes=nodes)


@dataclass(frozen=True)
class FemMatrices:
    """Z mass, T stiffness, X convection (trial derivative), Y = X^T."""

    mesh: Mesh1D
    Z: sp.dia_array
    T: sp.dia_array
    X: sp.dia_array
    Y: sp.dia_array

    @property
    def n(self) -> int:
        return self.mesh.n_dofs


def _tridiag(n: int, lower: float, diag: float, upper: float) -> sp.dia_array:
    return sp.diags_array(
        [np.full(n - 1, lower), np.full(n, diag), np.full(n - 1, upper)],
        offsets=[-1, 0, 1], shape=(n, n), format="dia",
    )


def assemble_matrices(mesh: Mesh1D) -> FemMatrices:
    n, h = mesh.n_dofs, mesh.h
    Z = _tridiag(n, h / 6.0, 2.0 * h / 3.0, h / 6.0)
    T = _tridiag(n, -1.0 / h, 2.0 / h, -1.0 / h)
    # X[a, a+1] = int psi_{a+1}' psi_a = +1/2
    X = _tridiag(n, -0.5, 0.0, 0.5)
    Y = _tridiag(n, 0.5, 0.0, -0.5)
    return FemMatrices(mesh=mesh, Z=Z, T=T, X=X, Y=Y)


def interpolate_nodal(profile: Callable[[np.ndarray], np.ndarray], mesh: Mesh1D) -> np.ndarray:
    """Nodal interpolant of ``profile`` on the interior nodes."""
    x = mesh.interior
    values = np.asarray(profile(x), dtype=float)
    if values.ndim == 0:
        values = np.full(x.shape, float(values))
    if values.shape != x.shape:
        raise DimensionMismatch(f"profile returned shape {values.shape}, expected {x.shape}")
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise NonFiniteSample(int(bad[0]) + 1, values[bad[0]])
    return values


def _check(mats: FemMatrices, *vectors: np.ndarray) -> None:
    for v in vectors:
        if np.shape(v) != (mats.n,):
            raise DimensionMismatch(f"vector of shape {np.shape(v)} does not match {mats.n} interior dofs")


def inner(M: sp.dia_array, u: np.ndarray, v: np.ndarray) -> float:
    """Bilinear form v^T M u."""
    return float(v @ (M @ u))


def norms(mats: FemMatrices, v: np.ndarray) -> tuple[float, float]:
    """(L2 norm, H1 seminorm) of the P1 function with nodal values ``v``."""
    v = np.asarray(v, dtype=float)
    _check(mats, v)
    l2 = max(inner(mats.Z, v, v), 0.0)
    h1 = max(inner(mats.T, v, v), 0.0)
    return float(np.sqrt(l2)), float(np.sqrt(h1))


def with_boundary(v: np.ndarray) -> np.ndarray:
    """Pad interior values with the homogeneous Dirichlet boundary values."""
    v = np.asarray(v, dtype=float)
    return np.concatenate(([0.0], v, [0.0]))


def gradient_plus_value_sq(mesh: Mesh1D, u: np.ndarray, phi: np.ndarray, a: float, c: float) -> float:
    """Exact ||a*u_x + c*phi||^2 for P1 fields u, phi.

    On each element u_x is constant and phi linear, so the integrand is a
    quadratic and Simpson's rule integrates it exactly.
    """
    uf, pf = with_boundary(u), with_boundary(phi)
    ux = np.diff(uf) / mesh.h
    left = a * ux + c * pf[:-1]
    right = a * ux + c * pf[1:]
    return float(mesh.h / 3.0 * np.sum(left**2 + left * right + right**2))
