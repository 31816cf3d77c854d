"""Modulars, Luxemburg norms, and the constant-exponent embedding bound.

Grid functions live on :class:`~fpxlab.grid.Grid` nodes; a *region* is a
boolean node mask.  The Lebesgue modular sums m |u|^pbar over the region
with pbar(x) = p(x, x); the Gagliardo modular sums
m^2 |u_i - u_j|^p_ij / |x_i - x_j|^(dim + s p_ij) over region pairs with the
diagonal excluded.  Region sums are genuine integrals of the atomic measure
sum_i m_i delta_{x_i}, so the modular/norm relations (the unit-ball
trichotomy and the p_-/p_+ sandwiches) hold for them verbatim and are
asserted by the tests rather than re-derived.

Luxemburg norms are computed by bracketing and bisecting the monotone map
lambda -> modular(u / lambda) around 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exponents import ExponentField, extrema_over_product
from .grid import Grid

__all__ = [
    "ModularResult",
    "NormResult",
    "EmbeddingReport",
    "ModularDivergenceError",
    "lebesgue_modular",
    "luxemburg_norm",
    "gagliardo_modular",
    "sobolev_seminorm",
    "combined_modular",
    "combined_norm",
    "lebesgue_norm",
    "holder_product_check",
    "conjugate_exponent",
    "embedding_bound",
]

_SPHERE_MEASURE = {1: 2.0, 2: 2.0 * math.pi}


class ModularDivergenceError(RuntimeError):
    """The modular stayed above 1 for every sampled scaling."""


@dataclass
class ModularResult:
    value: float
    kind: str

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("modular values are nonnegative")


@dataclass
class NormResult:
    value: float
    bracket: tuple
    iterations: int


def _region_mask(grid: Grid, region) -> np.ndarray:
    mask = grid.interior if region is None else np.asarray(region, dtype=bool)
    if mask.shape != (grid.n_nodes,):
        raise ValueError("region mask must cover every grid node")
    if not mask.any():
        raise ValueError("region is empty")
    return mask


def lebesgue_modular(u: np.ndarray, pbar: np.ndarray, grid: Grid, region=None) -> ModularResult:
    """sum over region of m |u|^pbar, pbar the diagonal exponent trace."""
    mask = _region_mask(grid, region)
    value = grid.measure * np.sum(np.abs(u[mask]) ** np.asarray(pbar)[mask])
    return ModularResult(float(value), "lebesgue")


def gagliardo_modular(u: np.ndarray, field: ExponentField, s: float, grid: Grid,
                      region_a=None, region_b=None) -> ModularResult:
    """Double region sum of |u_i - u_j|^p_ij / |x_i - x_j|^(dim + s p_ij)."""
    mask_a = _region_mask(grid, region_a)
    mask_b = _region_mask(grid, mask_a if region_b is None else region_b)
    xa, xb = grid.nodes[mask_a], grid.nodes[mask_b]
    ua, ub = u[mask_a], u[mask_b]
    diff = xa[:, None, :] - xb[None, :, :]
    dist = np.sqrt(np.sum(diff**2, axis=-1))
    off = dist > 0
    p = np.asarray(field.eval(xa[:, None, :], xb[None, :, :]))
    num = np.abs(ua[:, None] - ub[None, :]) ** p
    with np.errstate(divide="ignore"):
        kern = np.where(off, dist, 1.0) ** -(grid.dim + s * p)
    value = grid.measure**2 * np.sum(np.where(off, num * kern, 0.0))
    return ModularResult(float(value), "gagliardo")


def luxemburg_norm(modular: Callable[[float], float], tol: float = 1e-10,
                   max_iter: int = 200) -> NormResult:
    """Smallest lambda with modular(lambda) <= 1 for a monotone modular map.

    ``modular`` evaluates rho(u / lambda); it must be non-increasing in
    lambda.  Bracket by doubling/halving from 1, then bisect until the
    bracket is relatively tight and the modular at the returned value sits
    within ``tol`` of 1.
    """
    base = modular(1.0)
    if base == 0.0:
        return NormResult(0.0, (0.0, 0.0), 0)
    if not np.isfinite(base):
        raise ModularDivergenceError("modular not finite at unit scaling")

    iterations = 0
    if base <= 1.0:
        hi = 1.0
        lo = 0.5
        while modular(lo) <= 1.0:
            hi, lo = lo, lo / 2
            iterations += 1
            if iterations >= max_iter:
                return NormResult(hi, (lo, hi), iterations)
    else:
        lo = 1.0
        hi = 2.0
        while True:
            value = modular(hi)
            if not np.isfinite(value):
                raise ModularDivergenceError("modular diverges for every scaling")
            if value <= 1.0:
                break
            lo, hi = hi, hi * 2
            iterations += 1
            if iterations >= max_iter:
                raise ModularDivergenceError("modular stayed above 1 during bracketing")

    mid = hi
    for _ in range(max_iter):
        iterations += 1
        mid = 0.5 * (lo + hi)
        if modular(mid) <= 1.0:
            hi = mid
        else:
            lo = mid
        if hi - lo <= tol * max(1.0, hi) and abs(modular(hi) - 1.0) <= tol:
            break
    return NormResult(float(hi), (float(lo), float(hi)), iterations)


def lebesgue_norm(u, pbar, grid, region=None, tol: float = 1e-10) -> NormResult:
    return luxemburg_norm(lambda lam: lebesgue_modular(u / lam, pbar, grid, region).value, tol)


def sobolev_seminorm(u, field, s, grid, region=None, tol: float = 1e-10) -> NormResult:
    mask = _region_mask(grid, region)
    return luxemburg_norm(
        lambda lam: gagliardo_modular(u / lam, field, s, grid, mask).value, tol
    )


def combined_modular(u, field, s, grid, region=None) -> ModularResult:
    mask = _region_mask(grid, region)
    pbar = np.asarray(field.diagonal(grid.nodes))
    value = (
        lebesgue_modular(u, pbar, grid, mask).value
        + gagliardo_modular(u, field, s, grid, mask).value
    )
    return ModularResult(value, "combined")


def combined_norm(u, field, s, grid, region=None, tol: float = 1e-10) -> NormResult:
    mask = _region_mask(grid, region)
    return luxemburg_norm(
        lambda lam: combined_modular(u / lam, field, s, grid, mask).value, tol
    )


def conjugate_exponent(p):
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore"):  # entries outside the region may equal 1
        return p / (p - 1.0)


def holder_product_check(u, v, pbar, grid, region=None, tol: float = 1e-10):
    """Measured ratio of sum m|uv| against 2 ||u||_pbar ||v||_pbar'.

    Returns (ok, ratio); the product inequality holds when ratio <= 1.
    """
    mask = _region_mask(grid, region)
    pbar = np.asarray(pbar)
    if np.any(pbar[mask] <= 1.0):
        raise ValueError("conjugate pairing needs pbar > 1 on the region")
    lhs = grid.measure * np.sum(np.abs(u[mask] * v[mask]))
    nu = lebesgue_norm(u, pbar, grid, mask, tol).value
    nv = lebesgue_norm(v, conjugate_exponent(pbar), grid, mask, tol).value
    rhs = 2.0 * nu * nv
    if rhs == 0.0:
        return lhs == 0.0, 0.0
    ratio = lhs / rhs
    return bool(ratio <= 1.0 + 1e-12), float(ratio)


@dataclass
class EmbeddingReport:
    lhs: float
    rhs: float
    passed: bool
    c_explicit: float
    c_empirical: float
    seminorm: float


def embedding_bound(u, field, s, sigma, q, grid, region_small, region=None,
                    tol: float = 1e-10) -> EmbeddingReport:
    """Lower-order double-sum bound by the variable-exponent seminorm.

    lhs = (sum over region_small x region of m^2 |du|^q / |dx|^(dim + sigma q))^(1/q)
    is bounded by C * max_i (|A| d^beta)^(e_i) * [u], where A = region_small,
    d = diam(region) <= 1, beta = (s - sigma) p_+ q / (p_+ - q), and the two
    exponents e_i are (p_+/- - q)/(p_+/- q).  C is assembled from the product
    Holder inequality (factor 2) and the kernel mass K =
    (p_+ - q) |S^(dim-1)| / ((s - sigma) p_+ q):

        C = 2^(1/q) * max(K^e1, K^e2).
    """
    if not 0.0 < sigma < s < 1.0:
        raise ValueError("need 0 < sigma < s < 1")
    mask_small = _region_mask(grid, region_small)
    mask = _region_mask(grid, grid.interior if region is None else region)
    if np.any(mask_small & ~mask):
        raise ValueError("region_small must be contained in region")
    pts = grid.nodes[mask]
    d = float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))  # bounding-box diameter
    if d > 1.0 + 1e-12:
        raise ValueError("region diameter must not exceed 1")

    ext = extrema_over_product(field, pts, pts)
    p_minus, p_plus = ext.p_minus, ext.p_plus
    if not q < p_minus:
        raise ValueError("need q < p_- on the region")
    if q < 1.0:
        raise ValueError("need q >= 1")

    xa = grid.nodes[mask_small]
    xb = pts
    dist = np.sqrt(np.sum((xa[:, None, :] - xb[None, :, :]) ** 2, axis=-1))
    off = dist > 0
    num = np.abs(u[mask_small][:, None] - u[mask][None, :]) ** q
    with np.errstate(divide="ignore"):
        kern = np.where(off, dist, 1.0) ** -(grid.dim + sigma * q)
    lhs = (grid.measure**2 * np.sum(np.where(off, num * kern, 0.0))) ** (1.0 / q)

    seminorm = sobolev_seminorm(u, field, s, grid, mask, tol).value
    a_measure = float(np.count_nonzero(mask_small)) * grid.measure
    beta = (s - sigma) * p_plus * q / (p_plus - q)
    e1 = (p_plus - q) / (p_plus * q)
    e2 = (p_minus - q) / (p_minus * q)
    base = a_measure * d**beta
    kmass = (p_plus - q) * _SPHERE_MEASURE[grid.dim] / ((s - sigma) * p_plus * q)
    c_explicit = 2.0 ** (1.0 / q) * max(kmass**e1, kmass**e2)
    envelope = max(base**e1, base**e2)
    rhs = c_explicit * envelope * seminorm
    c_emp = lhs / (envelope * seminorm) if envelope * seminorm > 0 else 0.0
    return EmbeddingReport(
        lhs=float(lhs),
        rhs=float(rhs),
        passed=bool(lhs <= rhs * (1 + 1e-12)),
        c_explicit=float(c_explicit),
        c_empirical=float(c_emp),
        seminorm=float(seminorm),
    )
