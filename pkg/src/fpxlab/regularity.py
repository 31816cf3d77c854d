"""Quantitative regularity diagnostics for discrete solutions.

Implements level truncations, the level-set energy (Caccioppoli-type)
estimate with an explicit constant traced through its proof chain, the
pointwise algebraic inequality that drives it, the geometric iteration
lemma with its exact smallness threshold and decay bound, the quantitative
supremum bound, growth-lemma hypothesis/conclusion checking with a
calibrated positivity constant, the sublevel-set energy bound, and a dyadic
oscillation fit that estimates a Holder exponent empirically.

Constants come in two kinds and the reports keep them apart: constants the
theory makes explicit (the algebraic inequality constant, the assembled
level-set estimate constant) are asserted hard; constants the theory only
asserts to exist (supremum bound, sublevel bound, growth threshold) are
fitted and reported, with mesh-refinement stability as their only testable
property.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exponents import ExponentField, extrema_over_product
from .grid import Grid, GridGeometryError, ball_mask
from .operators import PairKernel, tail

__all__ = [
    "truncate_level",
    "algebraic_constant",
    "algebraic_inequality_check",
    "CaccioppoliReport",
    "caccioppoli_report",
    "DeGiorgiParams",
    "DeGiorgiRun",
    "degiorgi_iterate",
    "SupBoundReport",
    "sup_bound_check",
    "GrowthScenario",
    "GrowthReport",
    "growth_lemma_check",
    "calibrate_growth_delta",
    "SublevelReport",
    "sublevel_energy_check",
    "HolderFit",
    "holder_exponent_fit",
    "ResolutionError",
]


class ResolutionError(ValueError):
    """The grid cannot resolve enough dyadic levels for an oscillation fit."""


# ---------------------------------------------------------------------------
# level truncations
# ---------------------------------------------------------------------------


def truncate_level(u: np.ndarray, k: float, sign: str = "plus") -> np.ndarray:
    """Nodal (u - k)_+ or (u - k)_-; both are nonnegative."""
    if sign == "plus":
        return np.maximum(u - k, 0.0)
    if sign == "minus":
        return np.maximum(k - u, 0.0)
    raise ValueError("sign must be plus or minus")


# ---------------------------------------------------------------------------
# pointwise algebraic inequality
# ---------------------------------------------------------------------------


def algebraic_constant(p_minus: float, p_plus: float) -> float:
    """Explicit constant (p_+ / p_-) (2 p_+)^(p_+ - 1) of the cutoff inequality."""
    if not 1.0 < p_minus <= p_plus:
        raise ValueError("need 1 < p_minus <= p_plus")
    return (p_plus / p_minus) * (2.0 * p_plus) ** (p_plus - 1.0)


def algebraic_inequality_check(a, b, tau1, tau2, p, p_minus, p_plus):
    """Check the discrete cutoff inequality on (arrays of) tuples.

    lhs = |a-b|^(p-2) (a-b) (a tau1^p_+ - b tau2^p_+) dominates
    rhs = 1/2 |a-b|^p max(tau1, tau2)^p_+ - C max(a, b)^p |tau1 - tau2|^p
    with the explicit C above.  Returns (lhs, rhs, holds) where ``holds``
    allows 1e-9 absolute slack.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    tau1 = np.asarray(tau1, dtype=float)
    tau2 = np.asarray(tau2, dtype=float)
    p = np.asarray(p, dtype=float)
    if np.any(a < 0) or np.any(b < 0):
        raise ValueError("a, b must be nonnegative")
    if np.any((tau1 < 0) | (tau1 > 1) | (tau2 < 0) | (tau2 > 1)):
        raise ValueError("tau1, tau2 must lie in [0, 1]")
    if np.any((p < p_minus) | (p > p_plus)):
        raise ValueError("p must lie in [p_minus, p_plus]")
    c = algebraic_constant(p_minus, p_plus)
    d = a - b
    signed = np.sign(d) * np.abs(d) ** (p - 1.0)
    lhs = signed * (a * tau1**p_plus - b * tau2**p_plus)
    rhs = 0.5 * np.abs(d) ** p * np.maximum(tau1, tau2) ** p_plus \
        - c * np.maximum(a, b) ** p * np.abs(tau1 - tau2) ** p
    return lhs, rhs, lhs >= rhs - 1e-9


# ---------------------------------------------------------------------------
# level-set energy estimate
# ---------------------------------------------------------------------------


@dataclass
class CaccioppoliReport:
    level: float
    r: float
    R: float
    lhs_modular: float
    lhs_cross: float
    rhs_local: float
    rhs_tail: float
    c_explicit: float
    c_empirical: float
    weak_form_value: float
    satisfied: bool
    p_minus: float
    p_plus: float


def caccioppoli_report(u: np.ndarray, field: ExponentField, s: float, grid: Grid,
                       x0, r: float, R: float, k: float,
                       kernel: PairKernel | None = None) -> CaccioppoliReport:
    """Level-set energy estimate for w_+ = (u - k)_+ on B_r within B_R.

    All pair sums run over the grid's admissible interaction set, which is
    exactly the set the discrete weak form controls; with the interaction
    radius covering 2R they coincide with the unrestricted region sums.  The
    far term sums every grid node outside B_R against the recentred kernel
    weight (2R/(R-r))^(dim + s p) / |y - x0|^(dim + s p), a superset of the
    admissible far pairs, so the bound direction is preserved.

    ``c_explicit`` is assembled from the proof chain: the algebraic-
    inequality constant against the cutoff slope bound (Lipschitz constant
    <= 2/(R-r) <= 4/(R-r) budget), and the branch constants 1/2 and
    min(1, 2^(p_- - 2)).  For an exact discrete solution the estimate is
    guaranteed; ``weak_form_value`` records the residual pairing E(u, w_+ eta)
    so near-solutions are judged with their own slack, and ``satisfied``
    asserts lhs <= c_explicit * rhs + [E]_+ / c_branch.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if not 0.0 < r < R:
        raise GridGeometryError("need 0 < r < R")
    room = np.min(grid.halfwidths - np.abs(x0 - grid.center))
    if not R < room:
        raise GridGeometryError("outer ball must be contained in the domain")
    kernel = PairKernel(grid, field, s) if kernel is None else kernel

    w_plus = truncate_level(u, k, "plus")
    w_minus = truncate_level(u, k, "minus")
    inner = ball_mask(grid, x0, r)
    outer = ball_mask(grid, x0, R)
    mid = ball_mask(grid, x0, (R + r) / 2.0)

    pm = kernel.pmat
    adm = kernel.admissible
    coeff = kernel.coeff
    dist = kernel.dist

    sub = np.ix_(inner, inner)
    dw = np.subtract.outer(w_plus, w_plus)
    lhs_modular = float(np.sum(coeff[sub] * np.abs(dw[sub]) ** pm[sub]))

    cross = np.ix_(inner, outer)
    lhs_cross = float(np.sum(coeff[cross] * np.where(
        adm[cross], w_plus[inner][:, None] * w_minus[outer][None, :] ** (pm[cross] - 1.0), 0.0)))

    both = np.ix_(outer, outer)
    with np.errstate(divide="ignore"):
        flat_kern = np.where(adm[both], dist[both], 1.0) ** ((1.0 - s) * pm[both] - grid.dim)
    wr = (w_plus[outer] / (R - r))[:, None] ** pm[both]
    rhs_local = float(grid.measure**2 * np.sum(np.where(adm[both], wr * flat_kern, 0.0)))

    # far factor: every node outside B_R, radial cell fraction at the sphere
    dist0 = np.sqrt(np.sum((grid.nodes - x0) ** 2, axis=1))
    frac = np.clip((dist0 - R) / grid.h + 0.5, 0.0, 1.0)
    ysel = frac > 0
    xs = grid.nodes[mid]
    ys = grid.nodes[ysel]
    pxy = np.asarray(field.eval(xs[:, None, :], ys[None, :, :]))
    expo = grid.dim + s * pxy
    far = (w_plus[ysel][None, :] ** (pxy - 1.0)
           * (2.0 * R / (R - r)) ** expo
           / dist0[ysel][None, :] ** expo)
    tail_factor = float(np.max(far @ (grid.measure * frac[ysel])))
    rhs_tail = tail_factor * float(grid.measure * np.sum(w_plus[outer]))

    ext = extrema_over_product(field, grid.nodes[outer], grid.nodes[outer])
    p_minus, p_plus = ext.p_minus, ext.p_plus
    c_branch = min(0.5, 2.0 ** (p_minus - 2.0))
    c_explicit = max(2.0**p_plus * algebraic_constant(p_minus, p_plus), 2.0) / c_branch

    # residual pairing with the proof's own test function
    eta = np.clip(((R + r) / 2.0 - dist0) / ((R - r) / 2.0), 0.0, 1.0)
    phi = w_plus * eta**p_plus
    phi[~grid.interior] = 0.0
    weak_value = kernel.weak_residual(u, phi)

    lhs = lhs_modular + lhs_cross
    rhs = c_explicit * (rhs_local + rhs_tail) + max(weak_value, 0.0) / c_branch
    c_emp = lhs / (rhs_local + rhs_tail) if rhs_local + rhs_tail > 0 else 0.0
    return CaccioppoliReport(
        level=float(k), r=float(r), R=float(R),
        lhs_modular=lhs_modular, lhs_cross=lhs_cross,
        rhs_local=rhs_local, rhs_tail=rhs_tail,
        c_explicit=float(c_explicit), c_empirical=float(c_emp),
        weak_form_value=float(weak_value),
        satisfied=bool(lhs <= rhs + 1e-12 * (1.0 + rhs)),
        p_minus=float(p_minus), p_plus=float(p_plus),
    )


# ---------------------------------------------------------------------------
# geometric iteration lemma
# ---------------------------------------------------------------------------


@dataclass
class DeGiorgiParams:
    C: float
    b: float
    betas: tuple
    y0: float

    def __post_init__(self):
        if self.C < 1.0:
            raise ValueError("need C >= 1")
        if self.b <= 1.0:
            raise ValueError("need b > 1")
        betas = tuple(float(x) for x in self.betas)
        if not betas or any(x <= 0 for x in betas):
            raise ValueError("betas must be positive")
        if any(a < b for a, b in zip(betas, betas[1:])):
            raise ValueError("betas must be non-increasing")
        object.__setattr__(self, "betas", betas)
        if self.y0 < 0:
            raise ValueError("need Y0 >= 0")

    @property
    def threshold(self) -> float:
        """Largest starting value for which the decay bound is guaranteed."""
        b_last = self.betas[-1]
        b_first = self.betas[0]
        return min(
            self.C ** (-1.0 / b_last) * self.b ** (-1.0 / b_last**2),
            self.C ** (-1.0 / b_first),
        )

    def decay_bound(self, j) -> np.ndarray:
        b_last = self.betas[-1]
        j = np.asarray(j, dtype=float)
        return self.C ** (-1.0 / b_last) * self.b ** (-1.0 / b_last**2 - j / b_last)


@dataclass
class DeGiorgiRun:
    params: DeGiorgiParams
    ys: np.ndarray
    bounds: np.ndarray
    threshold: float
    threshold_met: bool
    bound_holds: bool
    max_excess: float


def degiorgi_iterate(params: DeGiorgiParams, j_max: int) -> DeGiorgiRun:
    """Simulate the worst-case recursion Y_{j+1} = C b^j max_i Y_j^(1+beta_i).

    When Y0 meets the smallness threshold, asserts the geometric decay bound
    Y_j <= C^(-1/beta_N) b^(-1/beta_N^2 - j/beta_N) for every simulated j.
    Simulation runs in extended precision so sixty-odd levels of decay stay
    representable.
    """
    if j_max < 0:
        raise ValueError("j_max must be nonnegative")
    betas = np.array(params.betas, dtype=np.longdouble)
    ys = np.empty(j_max + 1, dtype=np.longdouble)
    ys[0] = np.longdouble(params.y0)
    c = np.longdouble(params.C)
    b = np.longdouble(params.b)
    with np.errstate(over="ignore"):  # runs above threshold may blow up
        for j in range(j_max):
            ys[j + 1] = c * b ** np.longdouble(j) * np.max(ys[j] ** (1.0 + betas))
    bounds = params.decay_bound(np.arange(j_max + 1))
    met = params.y0 <= params.threshold * (1 + 1e-15)
    with np.errstate(over="ignore"):  # diverging runs overflow float64 harmlessly
        ys64 = ys.astype(float)
    excess = float(np.max(ys64 - bounds))
    return DeGiorgiRun(
        params=params,
        ys=ys64,
        bounds=bounds,
        threshold=float(params.threshold),
        threshold_met=bool(met),
        bound_holds=bool(met and excess <= 1e-12),
        max_excess=excess,
    )


# ---------------------------------------------------------------------------
# quantitative supremum bound
# ---------------------------------------------------------------------------


@dataclass
class SupBoundReport:
    applicable: bool
    radius: float
    q: float
    p_minus: float
    p_plus: float
    lhs_sup: float
    average_term: float
    tail_term: float
    c_empirical: float
    c_reference: float | None
    passed: bool
    reason: str = ""


def sup_bound_check(u: np.ndarray, field: ExponentField, s: float, grid: Grid, x0,
                    sigma: float, q: float | None = None, radius: float | None = None,
                    c_ref: float | None = None) -> SupBoundReport:
    """Bound sup u over B_(R/2) by averages of u_+ plus tail and unit terms.

    The working radius shrinks from ``radius`` (default: most of the room
    available at x0) through a geometric ladder until the ball exponents
    satisfy p_+ < p_-^* = dim p_- / (dim - sigma p_-), taking the largest
    admissible sampled radius; when q is not supplied it is placed mid-way
    inside its admissible window.  The bound's constant is existential, so
    the report carries the smallest empirical constant; ``passed`` uses
    ``c_ref`` when given and is trivially true otherwise.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if not 0.0 < sigma < s < 1.0:
        raise ValueError("need 0 < sigma < s < 1")
    room = float(np.min(grid.halfwidths - np.abs(x0 - grid.center)))
    r_start = 0.95 * room if radius is None else float(radius)

    chosen = None
    for t in range(16):
        rt = r_start * 0.75**t
        if rt < 2 * grid.h:
            break
        sel = ball_mask(grid, x0, rt)
        if np.count_nonzero(sel) < 5:
            break
        ext = extrema_over_product(field, grid.nodes[sel], grid.nodes[sel])
        if sigma * ext.p_minus >= grid.dim:
            continue
        p_star = grid.dim * ext.p_minus / (grid.dim - sigma * ext.p_minus)
        q_low = max(ext.p_plus, grid.dim / (grid.dim - sigma))
        if ext.p_plus < p_star and q_low < p_star:
            qt = 0.5 * (q_low + p_star) if q is None else q
            if q_low < qt < p_star:
                chosen = (rt, qt, ext.p_minus, ext.p_plus)
                break
    if chosen is None:
        return SupBoundReport(False, 0.0, q or 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
                              c_ref, False, reason="no admissible radius/q on the grid")
    rt, qt, p_minus, p_plus = chosen

    half = ball_mask(grid, x0, rt / 2.0)
    outer = ball_mask(grid, x0, rt)
    lhs_sup = float(np.max(u[half]))
    u_plus = np.maximum(u, 0.0)
    avg = float(np.sum(u_plus[outer] ** p_plus) / np.count_nonzero(outer))
    average_term = max(avg ** (1.0 / p_plus),
                       avg ** ((qt - p_minus) / (p_minus * (qt - p_plus))))
    t_rep = tail(grid, field, s, u, x0, rt / 2.0, "plus", sup_radius=rt)
    tail_term = t_rep.value ** (1.0 / (p_plus - 1.0))
    numer = max(lhs_sup - tail_term - 1.0, 0.0)
    c_emp = numer / average_term if average_term > 0 else 0.0
    if c_ref is None:
        passed = True
    else:
        passed = lhs_sup <= c_ref * average_term + tail_term + 1.0 + 1e-12
    return SupBoundReport(
        applicable=True, radius=float(rt), q=float(qt),
        p_minus=float(p_minus), p_plus=float(p_plus),
        lhs_sup=lhs_sup, average_term=float(average_term), tail_term=float(tail_term),
        c_empirical=float(c_emp), c_reference=c_ref, passed=bool(passed),
    )


# ---------------------------------------------------------------------------
# growth lemma
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GrowthScenario:
    x0: tuple
    radius: float
    H: float
    delta: float
    gamma: float
    s: float
    sigma: float
    q: float

    def __post_init__(self):
        if self.H <= 0:
            raise ValueError("need H > 0")
        if not 0.0 < self.delta <= 0.125:
            raise ValueError("need delta in (0, 1/8]")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("need gamma in (0, 1)")
        if not 0.0 < self.radius < 1.0:
            raise ValueError("need radius in (0, 1)")
        if not 0.0 < self.sigma < self.s < 1.0:
            raise ValueError("need 0 < sigma < s < 1")


@dataclass
class GrowthReport:
    scenario: GrowthScenario
    hypotheses: dict
    hypotheses_met: bool
    conclusion_holds: bool
    failed: list
    p_minus: float
    p_plus: float


def growth_lemma_check(u: np.ndarray, field: ExponentField, s: float, grid: Grid,
                       scenario: GrowthScenario) -> GrowthReport:
    """Verify growth-lemma hypotheses on the grid and test its conclusion.

    Hypotheses: 0 <= u <= 2H on B_R; u >= H on at least a gamma-fraction of
    B_(R/2) by measure; H^(p_+ - p_-) <= 2; p_+ < p_-^*; R^s <= delta H; and
    the far-field smallness bound on the negative part.  When all hold, the
    conclusion min u >= delta H over B_(R/4) is asserted; otherwise the
    failing hypotheses are reported and nothing is claimed.
    """
    x0 = np.asarray(scenario.x0, dtype=float)
    R = scenario.radius
    H = scenario.H
    delta = scenario.delta
    room = float(np.min(grid.halfwidths - np.abs(x0 - grid.center)))
    if not R < room:
        raise GridGeometryError("scenario ball must be contained in the domain")

    b_full = ball_mask(grid, x0, R)
    b_half = ball_mask(grid, x0, R / 2.0)
    b_quarter = ball_mask(grid, x0, R / 4.0)
    ext = extrema_over_product(field, grid.nodes[b_full], grid.nodes[b_full])
    p_minus, p_plus = ext.p_minus, ext.p_plus

    checks = {}
    tol = 1e-12
    umin, umax = float(np.min(u[b_full])), float(np.max(u[b_full]))
    checks["range"] = (umin >= -tol and umax <= 2.0 * H + tol, {"min": umin, "max": umax, "cap": 2.0 * H})
    frac = float(np.count_nonzero(u[b_half] >= H) / np.count_nonzero(b_half))
    checks["mass_fraction"] = (frac >= scenario.gamma - tol, {"fraction": frac, "gamma": scenario.gamma})
    spread = H ** (p_plus - p_minus)
    checks["exponent_spread"] = (spread <= 2.0 + tol, {"value": spread})
    if scenario.sigma * p_minus < grid.dim:
        p_star = grid.dim * p_minus / (grid.dim - scenario.sigma * p_minus)
        checks["subcritical"] = (p_plus < p_star, {"p_plus": p_plus, "p_star": p_star})
    else:
        checks["subcritical"] = (False, {"p_plus": p_plus, "p_star": math.inf})
    checks["scale"] = (R**s <= delta * H + tol, {"value": R**s, "bound": delta * H})
    t_rep = tail(grid, field, s, u, x0, R, "minus", sup_radius=0.75 * R)
    t_bound = R ** (-s * p_plus) * (delta * H) ** (p_plus - 1.0) \
        + R ** (-s * p_minus) * (delta * H) ** (p_minus - 1.0)
    checks["tail"] = (t_rep.value <= t_bound + tol, {"value": t_rep.value, "bound": t_bound})

    hypotheses_met = all(ok for ok, _ in checks.values())
    conclusion = float(np.min(u[b_quarter])) >= delta * H - tol
    return GrowthReport(
        scenario=scenario,
        hypotheses={k: {"ok": ok, **info} for k, (ok, info) in checks.items()},
        hypotheses_met=bool(hypotheses_met),
        conclusion_holds=bool(conclusion),
        failed=[k for k, (ok, _) in checks.items() if not ok],
        p_minus=float(p_minus),
        p_plus=float(p_plus),
    )


def calibrate_growth_delta(u: np.ndarray, field: ExponentField, s: float, grid: Grid,
                           x0, radius: float, sigma: float, q: float,
                           bisection_steps: int = 40):
    """Find the largest positivity constant delta that the instance supports.

    H and gamma are measured from the data (H = sup u / 2 over the ball,
    gamma = the measured mass fraction at level H); delta is then located by
    scanning a dyadic ladder for feasibility and bisecting the upper
    boundary of the feasible set inside (0, 1/8].
    """
    b_full = ball_mask(grid, np.atleast_1d(np.asarray(x0, float)), radius)
    b_half = ball_mask(grid, np.atleast_1d(np.asarray(x0, float)), radius / 2.0)
    h_level = float(np.max(u[b_full])) / 2.0
    if h_level <= 0:
        raise ValueError("calibration needs a positive supremum on the ball")
    frac = float(np.count_nonzero(u[b_half] >= h_level) / np.count_nonzero(b_half))
    gamma = min(max(frac, 1e-6), 1.0 - 1e-6)

    def feasible(delta: float):
        scenario = GrowthScenario(x0=tuple(np.atleast_1d(x0)), radius=radius, H=h_level,
                                  delta=delta, gamma=gamma, s=s, sigma=sigma, q=q)
        rep = growth_lemma_check(u, field, s, grid, scenario)
        return (rep.hypotheses_met and rep.conclusion_holds), rep

    lo = None
    for t in range(24):
        delta = 0.125 * 0.5**t
        ok, rep = feasible(delta)
        if ok:
            lo = delta
            lo_rep = rep
            break
    if lo is None:
        return None, rep
    hi = 0.125
    ok_hi, rep_hi = feasible(hi)
    if ok_hi:
        return hi, rep_hi
    for _ in range(bisection_steps):
        mid = 0.5 * (lo + hi)
        ok, rep = feasible(mid)
        if ok:
            lo, lo_rep = mid, rep
        else:
            hi = mid
    return lo, lo_rep


# ---------------------------------------------------------------------------
# sublevel-set energy bound
# ---------------------------------------------------------------------------


@dataclass
class SublevelReport:
    level: float
    radius: float
    lhs: float
    envelope: float
    sublevel_measure: float
    c_empirical: float
    c_reference: float | None
    passed: bool


def sublevel_energy_check(u: np.ndarray, field: ExponentField, s: float, grid: Grid,
                          x0, radius: float, level: float, sigma: float, q: float,
                          c_ref: float | None = None) -> SublevelReport:
    """Constant-exponent seminorm of (u - level)_- against sublevel mass.

    lhs = [(u - level)_-]^q in the order-sigma, exponent-q Gagliardo sense
    over B_(R/2); the competing envelope is level^q R^(-sigma q) times the
    largest of |A|, |A|^(1 + q/p_- - q/p_+), |A|^(1 + q/p_+ - q/p_-) where
    A collects B_R nodes strictly below the level (ties count as not
    below).  The constant is fitted, mirroring its existential status.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    b_full = ball_mask(grid, x0, radius)
    b_half = ball_mask(grid, x0, radius / 2.0)
    ext = extrema_over_product(field, grid.nodes[b_full], grid.nodes[b_full])
    if not 1.0 <= q < ext.p_minus:
        raise ValueError("need 1 <= q < p_- on the ball")

    v = truncate_level(u, level, "minus")
    pts = grid.nodes[b_half]
    vv = v[b_half]
    dist = np.sqrt(np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1))
    off = dist > 0
    with np.errstate(divide="ignore"):
        kern = np.where(off, dist, 1.0) ** -(grid.dim + sigma * q)
    lhs = float(grid.measure**2 * np.sum(
        np.where(off, np.abs(vv[:, None] - vv[None, :]) ** q * kern, 0.0)))

    a_measure = float(np.count_nonzero(u[b_full] < level)) * grid.measure
    envelope = max(a_measure,
                   a_measure ** (1.0 + q / ext.p_minus - q / ext.p_plus),
                   a_measure ** (1.0 + q / ext.p_plus - q / ext.p_minus)) if a_measure > 0 else 0.0
    denom = level**q * radius ** (-sigma * q) * envelope
    c_emp = lhs / denom if denom > 0 else 0.0
    passed = True if c_ref is None else lhs <= c_ref * denom + 1e-12
    return SublevelReport(
        level=float(level), radius=float(radius), lhs=lhs, envelope=float(denom),
        sublevel_measure=a_measure, c_empirical=float(c_emp),
        c_reference=c_ref, passed=bool(passed),
    )


# ---------------------------------------------------------------------------
# dyadic oscillation fit
# ---------------------------------------------------------------------------


@dataclass
class HolderFit:
    center: np.ndarray
    radius: float
    radii: np.ndarray
    oscillations: np.ndarray
    alpha: float
    residual: float
    defined: bool


def holder_exponent_fit(u: np.ndarray, grid: Grid, x0, radius: float,
                        j_max: int = 8) -> HolderFit:
    """Least-squares slope of log oscillation against log radius, ratio 4.

    Oscillations are max - min of u over the nested balls B_(4^-j R).  At
    least three dyadic levels must stay above twice the node spacing;
    otherwise the fit would see mostly quadrature noise and a
    :class:`ResolutionError` is raised.  ``defined`` is false for data that
    is constant on the base ball.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    room = float(np.min(grid.halfwidths - np.abs(x0 - grid.center)))
    if not radius < room:
        raise GridGeometryError("base ball must be contained in the domain")
    radii = []
    for j in range(j_max + 1):
        rj = radius * 4.0**-j
        if rj < 2.0 * grid.h:
            break
        radii.append(rj)
    if len(radii) < 3:
        raise ResolutionError(
            f"only {len(radii)} dyadic levels above 2h; refine the grid or enlarge the ball")
    radii = np.array(radii)
    osc = np.array([
        float(np.max(u[ball_mask(grid, x0, rj)]) - np.min(u[ball_mask(grid, x0, rj)]))
        for rj in radii
    ])
    if osc[0] == 0.0:
        return HolderFit(x0, radius, radii, osc, math.nan, math.nan, False)
    keep = osc > 0
    if np.count_nonzero(keep) < 2:
        return HolderFit(x0, radius, radii, osc, math.nan, math.nan, False)
    logs_r = np.log(radii[keep])
    logs_o = np.log(osc[keep])
    slope, intercept = np.polyfit(logs_r, logs_o, 1)
    fit = slope * logs_r + intercept
    residual = float(np.sqrt(np.mean((fit - logs_o) ** 2)))
    return HolderFit(x0, radius, radii, osc, float(slope), residual, True)
