import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from porobeam.errors import EllipticityViolated, NonPositiveParameter, ParameterError
from porobeam.model import (PARAM_NAMES, PhysicalParams, lyapunov_constants, reference_params,
                            poincare_constant, validate_params)

UNIT = dict(rho=1, mu=1, b=0.5, J=1, delta=1, xi=1, d=1, alpha=1, kappa=1, k=1, l=1)


def test_reference_params_valid():
    p = validate_params(reference_params().as_dict())
    assert p.rho == p.d == p.alpha == p.b == p.xi == p.J == 0.001
    assert (p.k, p.mu, p.delta, p.kappa, p.l) == (1, 0.01, 0.001, 0.001, 1)


def test_reduced_modulus_reference():
    p = reference_params()
    assert p.mu * p.xi - p.b**2 == pytest.approx(9e-6, rel=1e-12)
    assert p.reduced_modulus == pytest.approx(9e-3, rel=1e-12)


def test_ellipticity_violated():
    with pytest.raises(EllipticityViolated) as exc:
        validate_params({**UNIT, "mu": 1, "xi": 1, "b": 2})
    assert exc.value.value == pytest.approx(-3.0)


@pytest.mark.parametrize("name", PARAM_NAMES)
def test_non_positive_rejected(name):
    with pytest.raises(ParameterError) as exc:
        validate_params({**UNIT, name: 0.0})
    # a zero mu or xi also breaks ellipticity, reported alongside
    found = getattr(exc.value, "problems", None) or [exc.value]
    assert any(isinstance(e, NonPositiveParameter) and e.name == name for e in found)


def test_multiple_problems_collected():
    with pytest.raises(ParameterError) as exc:
        validate_params({**UNIT, "rho": -1, "k": 0})
    assert len(exc.value.problems) == 2


def test_poincare_constant():
    assert poincare_constant(1.0) == pytest.approx(1 / math.pi**2)
    assert poincare_constant(2.0) == pytest.approx(4 / math.pi**2)


def test_c1_high_precision_oracle():
    mpmath.mp.dps = 40
    r = mpmath.mpf("0.001")
    J = rho = b = xi = delta = r
    mu = mpmath.mpf("0.01")
    c1 = J * mpmath.sqrt(xi) + delta * rho * b / (mu * mpmath.sqrt(xi))
    consts = lyapunov_constants(reference_params())
    assert consts.C1 == pytest.approx(float(c1), rel=1e-13)
    assert consts.C1 == pytest.approx(3.4785054261852e-05, rel=1e-12)


def test_reference_constants_frozen():
    c = lyapunov_constants(reference_params())
    assert c.N0 == pytest.approx(130.46245782569844, rel=1e-10)
    assert c.N2 == pytest.approx(1290.5435213100704, rel=1e-10)
    assert c.N1 == pytest.approx(2015260.1375365516, rel=1e-10)
    assert c.beta == pytest.approx(0.001, rel=1e-12)


params_strategy = st.builds(
    lambda v, xi_boost: {**dict(zip(PARAM_NAMES, v)), "xi": v[5] + xi_boost * v[1] ** -1 * v[2] ** 2},
    st.lists(st.floats(1e-3, 10.0), min_size=11, max_size=11),
    st.floats(1.01, 10.0),
)


@settings(max_examples=200, deadline=None)
@given(params_strategy)
def test_constants_positive_and_consistent(values):
    p = validate_params(values)
    c = lyapunov_constants(p)
    # exact in real arithmetic; nu1, nu2 carry rounding at the scale of N1
    assert c.nu2 - c.nu1 == pytest.approx(2 * c.N0, abs=1e-12 * c.N1)
    assert c.zeta[0] == pytest.approx(p.rho / 2, rel=1e-12)
    assert c.nu1 > 0 and c.beta > 0 and c.omega > 0 and c.M >= 1
    assert all(z > 0 for z in c.zeta)
    assert c.eps3 == pytest.approx(p.rho / c.N2)


def test_params_hashable_and_frozen():
    p = reference_params()
    assert hash(p) == hash(reference_params())
    with pytest.raises(Exception):
        p.rho = 2.0


def test_validate_accepts_dataclass():
    p = PhysicalParams(**UNIT)
    assert validate_params(p) == p
