import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pidfair.dist import JointDist

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# 1 - H_b(0.9): the parity gap of the rho = 0.9 examples
H_09 = 0.4689955935892812
ONE_MINUS_H_09 = 0.5310044064107188


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def joint(probs) -> JointDist:
    return JointDist.from_array(np.asarray(probs, dtype=float))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[number])
