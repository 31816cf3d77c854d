import math

import numpy as np
import pytest

from fpxlab.exponents import (
    OutOfDomainError,
    check_exterior_comparison,
    check_interior_oscillation,
    check_log_holder,
    constant_field,
    extrema_over_product,
    product_field,
    radial_field,
    radial_profile,
    slow_modulus,
    tabulated_field,
)
from fpxlab.grid import ball_mask, build_grid

ALL_FIELDS = [constant_field(2.0), radial_field(), product_field()]


def test_radial_profile_reference_values():
    # at separation e^-2 the inner branch gives 3 - min(1/2, 1)
    assert radial_profile(math.exp(-2)) == pytest.approx(2.5, abs=1e-14)
    assert radial_profile(1 / math.e) == pytest.approx(2.0, abs=1e-14)
    assert radial_profile(0.0) == 3.0


def test_radial_profile_monotone_with_junction():
    r = np.geomspace(1e-8, 50.0, 400)
    w = radial_profile(r)
    assert np.all(np.diff(w) <= 1e-12)
    assert w[0] == pytest.approx(3.0 - 1.0 / math.log(1e8), abs=1e-12)
    assert 3.0 > w[0] > w[-1] > 1.5


def test_slow_modulus_shape():
    r = np.geomspace(1e-10, 1e3, 200)
    mu = slow_modulus(r)
    assert np.all(np.diff(mu) > 0)
    assert np.all(mu <= 1.0) and np.all(mu >= 0.0)
    assert slow_modulus(0.0) == 0.0
    # decays slower than 1/log(1/r): the log-weighted value must blow up
    small = np.array([1e-2, 1e-4, 1e-8])
    weighted = slow_modulus(small) * np.log(1.0 / small)
    assert np.all(np.diff(weighted) > 0)


def test_constant_eval():
    f = constant_field(2.0)
    assert f.eval(0.3, -0.7) == 2.0


@pytest.mark.parametrize("field", ALL_FIELDS, ids=lambda f: f.kind)
def test_symmetry_and_bounds_random_pairs(field, rng):
    x = rng.uniform(-3.5, 3.5, size=(10_000, 1))
    y = rng.uniform(-3.5, 3.5, size=(10_000, 1))
    pxy = field.eval(x, y)
    pyx = field.eval(y, x)
    assert np.all(pxy == pyx)
    assert np.all(pxy >= field.p_min)
    assert np.all(pxy <= field.p_max)


def test_rejects_exponent_bound_at_one():
    with pytest.raises(ValueError):
        constant_field(1.0)


# -- extrema over products -------------------------------------------------


def test_extrema_constant(line_grid):
    ext = extrema_over_product(constant_field(2.0), line_grid.nodes[:50], line_grid.nodes[50:120])
    assert ext.p_minus == 2.0 and ext.p_plus == 2.0


def test_extrema_radial_ball_and_complement(line_grid):
    field = radial_field()
    inside = ball_mask(line_grid, 0.0, 0.3)
    ball = line_grid.nodes[inside]
    comp = line_grid.nodes[~inside]
    same = extrema_over_product(field, ball, ball)
    # coincident pairs attain the diagonal limit exactly
    assert same.p_plus == pytest.approx(3.0, abs=1e-14)
    dnode = float(ball[:, 0].max() - ball[:, 0].min())  # largest node separation
    assert same.p_minus == pytest.approx(radial_profile(dnode), abs=1e-12)
    assert same.p_minus == pytest.approx(radial_profile(0.6), abs=0.05)  # up to resolution
    cross = extrema_over_product(field, ball, comp)
    # the supremum approaches the diagonal limit from adjacent pairs
    assert cross.p_plus == pytest.approx(radial_profile(line_grid.h), rel=1e-12)
    assert cross.p_plus < same.p_plus
    # the infimum is the profile at the largest reachable separation
    dmax = np.max(np.abs(comp[:, 0])) + 0.3
    assert cross.p_minus == pytest.approx(radial_profile(dmax), abs=1e-3)


def test_extrema_empty_rejected():
    with pytest.raises(ValueError):
        extrema_over_product(constant_field(2.0), np.empty((0, 1)), np.zeros((3, 1)))


# -- ball-oscillation condition ---------------------------------------------


def test_interior_oscillation_constant(line_grid):
    rep = check_interior_oscillation(constant_field(2.0), line_grid)
    assert rep.passed
    assert rep.l_estimate == pytest.approx(1.0, abs=1e-14)
    assert all(row["l_estimate"] == pytest.approx(1.0, abs=1e-14) for row in rep.rows)


def test_interior_oscillation_radial(line_grid):
    rep = check_interior_oscillation(radial_field(), line_grid)
    assert rep.passed
    assert np.isfinite(rep.l_estimate)


def test_interior_oscillation_product(line_grid):
    rep = check_interior_oscillation(product_field(), line_grid)
    assert rep.passed


def test_interior_oscillation_rejects_escaping_ball(line_grid):
    with pytest.raises(ValueError):
        check_interior_oscillation(radial_field(), line_grid, radii=[2.0], centers=[(0.0,)])


# -- exterior comparison -----------------------------------------------------


def test_exterior_comparison_constant(line_grid):
    rep = check_exterior_comparison(constant_field(2.0), line_grid)
    assert rep.passed
    assert rep.witness["margin"] == pytest.approx(0.0, abs=1e-14)


def test_exterior_comparison_radial(line_grid):
    rep = check_exterior_comparison(radial_field(), line_grid)
    assert rep.passed


def _bump_table(nodes):
    """Symmetric bump active only when one point sits inside B_0.3 and the
    other beyond 0.6: designed to violate the exterior comparison."""
    x = nodes[:, 0]
    inner = np.clip(1.0 - (np.abs(x) / 0.3) ** 2, 0.0, None) ** 2
    outer = np.clip((np.abs(x) - 0.6) / 0.2, 0.0, 1.0) ** 2
    return 2.0 + 0.25 * (np.outer(inner, outer) + np.outer(outer, inner))


def test_exterior_comparison_bump_fails(tmp_path, line_grid):
    xs = line_grid.nodes[:, 0]
    table = _bump_table(line_grid.nodes)
    rows = ["x,y,p"]
    for i, xi in enumerate(xs):
        for j, xj in enumerate(xs):
            rows.append(f"{xi:.17g},{xj:.17g},{table[i, j]:.17g}")
    path = tmp_path / "bump.csv"
    path.write_text("\n".join(rows) + "\n")
    field = tabulated_field(path)
    rep = check_exterior_comparison(field, line_grid, radii=[0.3], centers=[(0.0,)])
    assert not rep.passed
    assert rep.witness["p_plus_cross"] > rep.witness["p_plus_inner"]


def test_tabulated_out_of_domain(line_grid):
    xs = np.linspace(-1.0, 1.0, 11)
    table = np.full((11, 11), 2.0)
    field = tabulated_field(xs=xs, table=table)
    assert field.eval(0.05, -0.05) == 2.0
    with pytest.raises(OutOfDomainError):
        field.eval(3.0, 0.0)


def test_tabulated_rejects_asymmetric():
    xs = np.linspace(-1.0, 1.0, 5)
    table = np.full((5, 5), 2.0)
    table[0, 1] = 2.5
    with pytest.raises(ValueError):
        tabulated_field(xs=xs, table=table)


# -- log-Holder trend ---------------------------------------------------------


def test_log_holder_constant(line_grid):
    rep = check_log_holder(constant_field(2.0), line_grid)
    assert rep.passed
    assert all(row["measure"] == 0.0 for row in rep.rows)


def test_log_holder_radial_passes(line_grid):
    rep = check_log_holder(radial_field(), line_grid)
    assert rep.passed
    measures = [row["measure"] for row in rep.rows]
    assert measures == sorted(measures, reverse=True)


def test_log_holder_product_fails_at_smallest_scale(line_grid):
    rep = check_log_holder(product_field(), line_grid)
    assert not rep.passed
    measures = [row["measure"] for row in rep.rows]
    assert measures[-1] > measures[-2]  # still growing at the smallest scale


def test_log_holder_rejects_degenerate_scales(line_grid):
    with pytest.raises(ValueError):
        check_log_holder(radial_field(), line_grid, scales=[0.1])


def test_log_holder_2d_smoke():
    grid = build_grid(2, (0.0, 0.0), (1.0, 1.0), 3.0, 25)
    rep = check_log_holder(radial_field(), grid, scales=(1e-1, 1e-2), cap=20)
    assert rep.passed
