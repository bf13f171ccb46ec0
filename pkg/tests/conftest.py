import numpy as np
import pytest

from porobeam.model import reference_params
from porobeam.timestepper import RunConfig, run


def reference_config(**overrides) -> RunConfig:
    kw = dict(params=reference_params(), s=11, dt=1 / 22, t_final=25.0,
              init_u0="parabola", init_u1="parabola", init_phi0="parabola",
              init_phi1="parabola", init_w0="parabola")
    kw.update(overrides)
    return RunConfig(**kw)


@pytest.fixture(scope="session")
def reference_cfg():
    return reference_config()


@pytest.fixture(scope="session")
def reference_run(reference_cfg):
    return run(reference_cfg)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(number: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[number] = (bool(ok), detail)
    print(f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")
