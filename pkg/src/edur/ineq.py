"""Uncertainty inequalities and numerical checks of their bound constants."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import InvalidInput, NumericFailure
from .measmodel import ErrorDisturbanceSummary

SLACK_TOL = 1e-9
NAMES = ("robertson", "ozawa", "heisenberg_product", "mochi", "mochi2")
MOCHI_CONSTANT = 2.0 - math.sqrt(2.0)


@dataclass(frozen=True)
class InequalityReport:
    name: str
    lhs: float
    rhs: float
    slack: float
    satisfied: bool


def summary_from_values(epsilon: float, eta: float, sigma_a: float, sigma_b: float) -> ErrorDisturbanceSummary:
    """Summary for closed-form inputs where no model exists.

    The factored product is taken as (ε²+σ_A²)^½ (η²+σ_B²)^½, i.e. with the
    independence assumption holding exactly; there is no raw product.
    """
    return ErrorDisturbanceSummary(
        epsilon=epsilon, eta=eta, sigma_a=sigma_a, sigma_b=sigma_b,
        product_raw=None,
        product_factored=math.hypot(epsilon, sigma_a) * math.hypot(eta, sigma_b),
    )


def evaluate(name: str, q: ErrorDisturbanceSummary, commutator_abs: float,
             tol: float = SLACK_TOL) -> InequalityReport:
    """Evaluate one named inequality; ``commutator_abs`` is |<[A, B]>|."""
    values = (q.epsilon, q.eta, q.sigma_a, q.sigma_b, q.product_factored, commutator_abs)
    if any(not math.isfinite(v) or v < 0 for v in values):
        raise InvalidInput("inequality inputs must be finite and nonnegative")
    e, h, sa, sb = q.epsilon, q.eta, q.sigma_a, q.sigma_b
    half = 0.5 * commutator_abs
    if name == "robertson":
        lhs, rhs = sa * sb, half
    elif name == "ozawa":
        lhs, rhs = e * h + e * sb + sa * h, half
    elif name == "heisenberg_product":
        lhs, rhs = e * h, half
    elif name == "mochi":
        lhs, rhs = q.product_factored, MOCHI_CONSTANT * commutator_abs
    elif name == "mochi2":
        lhs, rhs = q.product_factored, commutator_abs
    else:
        raise InvalidInput(f"unknown inequality {name!r}; expected one of {NAMES}")
    slack = lhs - rhs
    return InequalityReport(name, lhs, rhs, slack, slack >= -tol)


def evaluate_all(q: ErrorDisturbanceSummary, commutator_abs: float,
                 names=NAMES, tol: float = SLACK_TOL) -> list[InequalityReport]:
    return [evaluate(n, q, commutator_abs, tol) for n in names]


# -- bound constants -------------------------------------------------------

@dataclass(frozen=True)
class BoundConstantResult:
    constraint: str
    minimum_ratio: float
    argmin: tuple[float, float, float, float]  # (ε, η, σ_A, σ_B)
    grid_resolution: float
    grid_ratio: float
    grid_argmin: tuple[float, float, float, float]


class InfeasibleGrid(NumericFailure):
    pass


def _objective(x):
    e, h, a, b = x
    return math.hypot(e, a) * math.hypot(h, b)


def _constraints(constraint: str, c: float):
    half = 0.5 * c
    cons = [lambda x: x[2] * x[3] - half]
    if constraint == "ozawa":
        cons.append(lambda x: x[0] * x[1] + x[0] * x[3] + x[2] * x[1] - half)
    else:
        cons.append(lambda x: x[0] * x[1] - half)
    return cons


def _min_sigma_b(constraint: str, c: float, e, h, a):
    """Smallest feasible σ_B for given (ε, η, σ_A), or inf.

    The objective is nondecreasing in σ_B, so on any slice only the smallest
    feasible σ_B matters.
    """
    half = 0.5 * c
    with np.errstate(divide="ignore", invalid="ignore"):
        b = np.where(a > 0, half / a, np.inf)
        if constraint == "ozawa":
            need = half - e * h - a * h
            from_oz = np.where(e > 0, need / e, np.where(need <= 0, 0.0, np.inf))
            b = np.maximum(b, from_oz)
        else:
            b = np.where(e * h >= half, b, np.inf)
    return np.maximum(b, 0.0)


def _grid_search(constraint, c, lo, hi, step, box_hi):
    axes = [np.arange(l, h + 0.5 * step, step) for l, h in zip(lo, hi)]
    axes = [ax[(ax >= 0) & (ax <= box_hi)] for ax in axes]
    best = (math.inf, None)
    # slab-by-slab over ε keeps memory bounded; result is order independent
    h, a = np.meshgrid(axes[1], axes[2], indexing="ij")
    for e in axes[0]:
        b = _min_sigma_b(constraint, c, e, h, a)
        b = np.where(b <= box_hi, b, np.inf)
        with np.errstate(invalid="ignore"):
            f = np.where(np.isfinite(b), np.hypot(e, a) * np.hypot(h, np.where(np.isfinite(b), b, 0)), np.inf)
        k = np.unravel_index(np.argmin(f), f.shape)
        if f[k] < best[0]:
            best = (float(f[k]), (float(e), float(h[k]), float(a[k]), float(b[k])))
    return best


def verify_bound_constant(constraint: str, commutator_abs: float = 1.0,
                          grid_resolution: float = 1e-3) -> BoundConstantResult:
    """Minimise (ε²+σ_A²)^½ (η²+σ_B²)^½ / C subject to σ_Aσ_B ≥ C/2 and the
    named constraint (Ozawa sum ≥ C/2, or εη ≥ C/2), over [0, 4√C]^4.

    A coarse grid is zoomed around the incumbent until its step is at most
    ``grid_resolution`` (grid result), then polished with SLSQP from that
    point (refined result).
    """
    if constraint not in ("ozawa", "heisenberg_product"):
        raise InvalidInput(f"unknown constraint {constraint!r}")
    c = float(commutator_abs)
    if not c > 0:
        raise InvalidInput("commutator_abs must be positive")
    box_hi = 4.0 * math.sqrt(c)
    if not 0 < grid_resolution <= box_hi / 4:
        raise InfeasibleGrid(f"grid resolution {grid_resolution} too coarse for box [0, {box_hi:g}]")

    step = box_hi / 40
    lo, hi = (0.0,) * 3, (box_hi,) * 3
    fbest, xbest = _grid_search(constraint, c, lo, hi, step, box_hi)
    if xbest is None:
        raise InfeasibleGrid("no feasible point on the coarse grid")
    while step > grid_resolution:
        new_step = max(step / 8, grid_resolution)
        lo = tuple(max(0.0, x - 2 * step) for x in xbest[:3])
        hi = tuple(min(box_hi, x + 2 * step) for x in xbest[:3])
        step = new_step
        f, x = _grid_search(constraint, c, lo, hi, step, box_hi)
        if x is not None and f <= fbest:
            fbest, xbest = f, x

    cons = [{"type": "ineq", "fun": g} for g in _constraints(constraint, c)]
    res = minimize(_objective, np.array(xbest), method="SLSQP", constraints=cons,
                   bounds=[(0.0, box_hi)] * 4, options={"ftol": 1e-12, "maxiter": 500})
    x = tuple(float(v) for v in res.x)
    # SLSQP may report a line-search stall at the optimum; feasibility and
    # improvement over the grid are what matter
    feasible = all(g(res.x) >= -SLACK_TOL for g in _constraints(constraint, c))
    if not feasible or _objective(x) > fbest:
        x = xbest
    return BoundConstantResult(
        constraint=constraint,
        minimum_ratio=_objective(x) / c,
        argmin=x,
        grid_resolution=grid_resolution,
        grid_ratio=fbest / c,
        grid_argmin=xbest,
    )
