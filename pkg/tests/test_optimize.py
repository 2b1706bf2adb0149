import numpy as np

from evmcast.optimize import nelder_mead


def test_quadratic_minimum():
    result = nelder_mead(lambda x: float(np.sum((x - np.array([1.0, -2.0, 3.0])) ** 2)),
                         np.zeros(3), tol=1e-10, max_iter=5000)
    assert result.converged
    assert np.allclose(result.x, [1.0, -2.0, 3.0], atol=1e-6)
    assert result.fx < 1e-10


def test_rosenbrock_2d():
    def rosen(x):
        return float(100.0 * (x[1] - x[0] ** 2) ** 2 + (1.0 - x[0]) ** 2)

    result = nelder_mead(rosen, np.array([-1.2, 1.0]), tol=1e-12, max_iter=5000)
    assert np.allclose(result.x, [1.0, 1.0], atol=1e-4)


def test_one_dimensional():
    result = nelder_mead(lambda x: float((x[0] - 4.0) ** 2), np.array([0.0]))
    assert abs(result.x[0] - 4.0) < 1e-6


def test_deterministic():
    f = lambda x: float((x[0] - 2) ** 2 + 0.5 * (x[1] + 1) ** 4)
    r1 = nelder_mead(f, np.array([5.0, 5.0]))
    r2 = nelder_mead(f, np.array([5.0, 5.0]))
    assert np.array_equal(r1.x, r2.x) and r1.fx == r2.fx and r1.iterations == r2.iterations


def test_iteration_cap_reported():
    result = nelder_mead(lambda x: float(np.sum(x**2)), np.full(4, 100.0), tol=1e-300, max_iter=25)
    assert not result.converged
    assert result.iterations == 25


def test_nonfinite_objective_treated_as_inf():
    def spiky(x):
        if x[0] < 0:
            return float("nan")
        return float((x[0] - 1.0) ** 2)

    result = nelder_mead(spiky, np.array([2.0]), tol=1e-10)
    assert abs(result.x[0] - 1.0) < 1e-6
