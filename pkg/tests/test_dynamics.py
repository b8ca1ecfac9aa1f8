import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from projoc import Grid, ProblemSpec, euler_integrate


def euler_loop(u, s0, v0, h):
    """Reference: the recursion written out one step at a time."""
    x1, x2 = [s0], [v0]
    for ui in u:
        x1.append(x1[-1] + h * x2[-1])
        x2.append(x2[-1] + h * ui)
    return np.array(x1), np.array(x2)


def test_rest_stays_at_rest():
    traj = euler_integrate(np.zeros(10), ProblemSpec(0, 0, 0, 0), Grid(10))
    assert np.all(traj.x1 == 0) and np.all(traj.x2 == 0)


def test_constant_velocity():
    g = Grid(50)
    traj = euler_integrate(np.zeros(50), ProblemSpec(0, 0, 1, 0), g)
    assert np.all(traj.x2 == 1.0)
    np.testing.assert_allclose(traj.x1, g.nodes, atol=1e-14)
    assert traj.x1[-1] == pytest.approx(1.0, abs=1e-14)


def test_two_steps_by_hand():
    traj = euler_integrate(np.ones(2), ProblemSpec(0, 0, 0, 0), Grid(2))
    np.testing.assert_array_equal(traj.x2, [0.0, 0.5, 1.0])
    np.testing.assert_array_equal(traj.x1, [0.0, 0.0, 0.25])


def test_matches_loop(rng):
    g = Grid(37)
    u = rng.normal(size=37)
    traj = euler_integrate(u, ProblemSpec(0.3, 0, -1.2, 0), g)
    x1, x2 = euler_loop(u, 0.3, -1.2, g.h)
    np.testing.assert_array_equal(traj.x1, x1)
    np.testing.assert_array_equal(traj.x2, x2)


def test_length_mismatch():
    with pytest.raises(ValueError):
        euler_integrate(np.zeros(4), ProblemSpec(), Grid(5))


@settings(max_examples=40)
@given(
    arrays(np.float64, 12, elements=st.floats(-10, 10)),
    arrays(np.float64, 12, elements=st.floats(-10, 10)),
    st.floats(-3, 3), st.floats(-3, 3), st.floats(-2, 2), st.floats(-2, 2),
)
def test_affine_superposition(u, w, alpha, beta, s0, v0):
    g = Grid(12)
    zero_ic = ProblemSpec(0, 0, 0, 0)
    lhs = euler_integrate(alpha * u + beta * w, zero_ic, g)
    xu, xw = euler_integrate(u, zero_ic, g), euler_integrate(w, zero_ic, g)
    np.testing.assert_allclose(lhs.x1, alpha * xu.x1 + beta * xw.x1, atol=1e-10)
    np.testing.assert_allclose(lhs.x2, alpha * xu.x2 + beta * xw.x2, atol=1e-10)

    spec = ProblemSpec(s0, 0, v0, 0)
    full = euler_integrate(u, spec, g)
    free = euler_integrate(np.zeros(12), spec, g)
    np.testing.assert_allclose(full.x1, free.x1 + xu.x1, atol=1e-10)
    np.testing.assert_allclose(full.x2, free.x2 + xu.x2, atol=1e-10)


@pytest.mark.parametrize("coef", [(1.0, 0.0, 0.0), (0.0, 2.0, 0.0), (-1.0, 3.0, 6.0)])
def test_terminal_velocity_first_order(coef):
    # u(t) = c0 + c1 t + c2 t^2, exact integral c0 + c1/2 + c2/3
    c0, c1, c2 = coef
    exact = 0.7 + c0 + c1 / 2 + c2 / 3
    errs = []
    for n in (100, 1000, 10000):
        g = Grid(n)
        t = g.control_times
        x2n = euler_integrate(c0 + c1 * t + c2 * t**2, ProblemSpec(0, 0, 0.7, 0), g).x2[-1]
        errs.append(abs(x2n - exact))
        assert errs[-1] <= (abs(c1) + 2 * abs(c2)) * g.h + 1e-12
