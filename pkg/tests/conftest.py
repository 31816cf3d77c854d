import numpy as np
import pytest

from fpxlab.exponents import constant_field, radial_field
from fpxlab.grid import build_grid
from fpxlab.operators import PairKernel
from fpxlab.solve import SolveConfig, minimize


@pytest.fixture(scope="session")
def line_grid():
    """1-D grid over [-4, 4] with domain (-1, 1), h = 0.04."""
    return build_grid(1, 0.0, 1.0, 4.0, 201)


@pytest.fixture(scope="session")
def fine_line_grid():
    """Criterion-scale 1-D grid, h = 0.02."""
    return build_grid(1, 0.0, 1.0, 4.0, 401)


@pytest.fixture(scope="session")
def radial_solution(fine_line_grid):
    """Solved linear-data instance with the radial field on the fine grid."""
    cfg = SolveConfig(s=0.5, sigma=0.25, q=1.5, nodes_per_axis=401,
                      field_kind="radial", exterior="linear", grad_tol=1e-9)
    field = radial_field()
    result = minimize(cfg, grid=fine_line_grid, field=field)
    return cfg, fine_line_grid, field, result


@pytest.fixture(scope="session")
def quadratic_kernel(line_grid):
    return PairKernel(line_grid, constant_field(2.0), 0.5)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
