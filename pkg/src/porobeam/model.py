"""Physical parameters of the porous-elastic beam and the stability constants."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import Mapping

from .errors import EllipticityViolated, NonPositiveParameter, ParameterError

PARAM_NAMES = ("rho", "mu", "b", "J", "delta", "xi", "d", "alpha", "kappa", "k", "l")


@dataclass(frozen=True)
class PhysicalParams:
    """Material constants of the second-spectrum-free porous beam.

    ``k`` is the net microtemperature dissipation ``k1 - k2`` and ``l`` the
    length of the beam. Construct through :func:`validate_params` to get the
    positivity and ellipticity checks.
    """

    rho: float
    mu: float
    b: float
    J: float
    delta: float
    xi: float
    d: float
    alpha: float
    kappa: float
    k: float
    l: float = 1.0

    @property
    def reduced_modulus(self) -> float:
        """mu - b**2/xi, positive under the ellipticity assumption."""
        return self.mu - self.b**2 / self.xi

    def as_dict(self) -> dict:
        return asdict(self)


def reference_params(delta: float = 0.001, kappa: float = 0.001, l: float = 1.0) -> PhysicalParams:
    """The parameter set of the reference experiment (delta, kappa are not given there)."""
    return validate_params(
        dict(rho=0.001, mu=0.01, b=0.001, J=0.001, delta=delta, xi=0.001,
             d=0.001, alpha=0.001, kappa=kappa, k=1.0, l=l)
    )


def validate_params(p: Mapping[str, float] | PhysicalParams) -> PhysicalParams:
    """Check every standing assumption and return a frozen parameter record.

    All violations are collected; a single one is raised as-is, several are
    raised together as a :class:`ParameterError` listing each by name.
    """
    raw = p.as_dict() if isinstance(p, PhysicalParams) else dict(p)
    raw.setdefault("l", 1.0)
    missing = [n for n in PARAM_NAMES if n not in raw]
    if missing:
        raise ParameterError([NonPositiveParameter(n, None) for n in missing])

    problems: list[ParameterError] = []
    values = {}
    for name in PARAM_NAMES:
        try:
            v = float(raw[name])
        except (TypeError, ValueError):
            problems.append(NonPositiveParameter(name, raw[name]))
            continue
        if not (math.isfinite(v) and v > 0.0):
            problems.append(NonPositiveParameter(name, v))
        values[name] = v

    if all(n in values for n in ("mu", "xi", "b")):
        margin = values["mu"] * values["xi"] - values["b"] ** 2
        if not margin > 0.0:
            problems.append(EllipticityViolated(margin))

    if len(problems) == 1:
        raise problems[0]
    if problems:
        raise ParameterError(problems)
    return PhysicalParams(**values)


@dataclass(frozen=True)
class LyapunovConstants:
    cp: float
    C1: float
    C2: float
    C3: float
    eps1: float
    eps2: float
    eps3: float
    N0: float
    N1: float
    N2: float
    nu1: float
    nu2: float
    zeta: tuple
    beta: float
    omega: float
    M: float

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def poincare_constant(l: float) -> float:
    """Sharp constant in ||v||^2 <= cp ||v_x||^2 on H^1_0(0, l)."""
    return (l / math.pi) ** 2


def lyapunov_constants(p: PhysicalParams, margin: float = 2.0) -> LyapunovConstants:
    """Constants of the multiplier proof of exponential decay.

    Strict lower bounds on ``N2`` and ``N1`` are met by multiplying the bound
    by ``margin`` (> 1).
    """
    if not margin > 1.0:
        raise ValueError("margin must exceed 1")
    rho, mu, b, J, delta, xi = p.rho, p.mu, p.b, p.J, p.delta, p.xi
    d, alpha, kappa, k = p.d, p.alpha, p.kappa, p.k
    sxi = math.sqrt(xi)
    cp = poincare_constant(p.l)

    C1 = J * sxi + delta * rho * b / (mu * sxi)
    eps2 = J * b / (2.0 * sxi)
    grad_weight = J * mu / b + 2.0 * rho * cp
    N2 = margin * (2.0 * sxi / (J * b)) * grad_weight
    eps3 = rho / N2
    eps1 = J * rho / (b * N2)
    C2 = alpha**2 * C1**2 / (2.0 * d**2 * eps1) + k**2 * C1**2 / (2.0 * d**2 * eps3)
    C3 = kappa**2 * C1**2 / (2.0 * d**2 * eps2) + d**2 / (2.0 * sxi)

    # the source writes N3 in the first entry; every other occurrence is N2
    N0 = max(
        (rho + N2 * alpha * C1 / d) / rho,
        (rho * cp + J * mu / b) / p.reduced_modulus,
        (b / (J * mu)) * (J * mu / b + N2 * J + N2 * delta * rho * b / (mu * sxi)),
        N2 * J,
        N2 * cp * rho * b / (mu * sxi),
        N2 * C1 / d,
    )
    N1 = margin * max(N0, N2 * C2 / k, N2 * C3 / kappa)
    nu1 = N1 - N0
    nu2 = N1 + N0

    zeta = (
        rho - N2 * eps3 / 2.0,
        J * rho / b - N2 * eps1 / 2.0,
        N2 * J * b / (2.0 * sxi) - grad_weight,
        N1 * k - N2 * C2,
        N1 * kappa - N2 * C3,
    )
    beta = 2.0 * min((1.0,) + zeta)
    return LyapunovConstants(
        cp=cp, C1=C1, C2=C2, C3=C3, eps1=eps1, eps2=eps2, eps3=eps3,
        N0=N0, N1=N1, N2=N2, nu1=nu1, nu2=nu2, zeta=zeta,
        beta=beta, omega=beta / nu2, M=nu2 / nu1,
    )
