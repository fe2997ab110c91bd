import numpy as np
import pytest

from pidfair.barrier import DualBarrier
from pidfair.dist import cmi_array
from pidfair.polytope import MarginalPolytope
from pidfair.scenarios import degraded_joint, random_joint
from pidfair.solver import LN2, _phi, brute_force_unique

# the gap target the solver requests for its default tolerance, in nats
TARGET = 0.1 * 1e-9 * LN2


def _barrier(d):
    poly = MarginalPolytope.from_dist(d)
    return poly, DualBarrier(poly.slices(enumerate_vertices=False), poly.shape)


@pytest.mark.parametrize("seed", range(5))
def test_barrier_bound_brackets_optimum(seed):
    poly, b = _barrier(random_joint(np.random.default_rng(seed)))
    out = b.solve(TARGET)
    assert out.ok
    assert poly.contains(out.q, tol=1e-12)
    grid = brute_force_unique(poly, 2001)
    upper = cmi_array(out.q)
    # the dual value is a lower bound of Phi; convert with the constant H(Z|B)
    gap = (_phi(out.q) - out.lower) / LN2
    assert 0 <= gap <= 1e-9
    assert upper - gap <= grid + 1e-12
    assert abs(upper - grid) < 1e-5


@pytest.mark.parametrize("seed", range(5))
def test_barrier_reaches_zero_on_garbled(seed):
    rng = np.random.default_rng(seed)
    shape = tuple(int(x) for x in rng.integers(2, 5, size=3))
    poly, b = _barrier(degraded_joint(rng, shape))
    out = b.solve(TARGET)
    assert cmi_array(out.q) <= (_phi(out.q) - out.lower) / LN2 + 1e-12
    assert cmi_array(out.q) < 1e-9
    assert poly.contains(out.q, tol=1e-12)


def test_lower_bound_valid_at_start():
    poly, b = _barrier(random_joint(np.random.default_rng(9), (3, 3, 3)))
    out = b.solve(TARGET, max_steps=1)
    assert not out.ok
    # even an unconverged run yields a valid bound
    assert out.lower <= _phi(out.q) + 1e-12
