"""Spin-1/2 worked example: A = σx sinθ + σz cosθ, B = (σy + σz)/√2, ψ = |+z>.

Two column families are kept apart on purpose:

* ``*_paper`` columns: the closed forms σ(A) = sinθ, σ(B) = 1/√2, ε(A) = 0,
  η(B) = sinθ and everything derived from them (ε lower bounds, bound
  coefficients);
* ``*_model`` columns: the same quantities computed from an explicit
  controlled-shift measurement of A on a qubit probe.

The two disagree on η (the model gives √(1 + sin²θ)); that disagreement is
reported, not reconciled.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np
from scipy.optimize import minimize_scalar

from . import ineq, measmodel
from .errors import EdurError, InvalidInput
from .matcore import SX, SY, SZ
from .qstate import PLUS_Z, Observable, QuantumState, commutator_expectation_abs, sigma

SQRT2 = math.sqrt(2.0)
HALF_PI = 0.5 * math.pi
ASSUMPTIONS = ("heisenberg_product", "ozawa")
DEFAULT_STEPS = 181


@dataclass(frozen=True)
class SpinSetting:
    theta: float
    A: Observable
    B: Observable
    psi: QuantumState


def _check_theta(theta: float) -> float:
    theta = float(theta)
    if not (0.0 <= theta <= HALF_PI + 1e-12):
        raise InvalidInput(f"theta={theta} outside [0, π/2]")
    return min(theta, HALF_PI)


def spin_setting(theta: float) -> SpinSetting:
    theta = _check_theta(theta)
    a = Observable(SX * math.sin(theta) + SZ * math.cos(theta), "A")
    b = Observable((SY + SZ) / SQRT2, "B")
    return SpinSetting(theta, a, b, PLUS_Z)


@dataclass
class SweepRecord:
    theta: float
    sigma_a: float | None = None
    sigma_b: float | None = None
    epsilon_paper: float | None = None
    eta_paper: float | None = None
    epsilon_model: float | None = None
    eta_model: float | None = None
    commutator_abs: float | None = None
    ozawa_lhs_paper: float | None = None
    ozawa_rhs: float | None = None
    ozawa_ok_paper: bool | None = None
    ozawa_ok_model: bool | None = None
    eps_bound_heis: float | None = None
    eps_bound_ozawa: float | None = None
    coeff_mochi21: float | None = None
    coeff_mochi11: float | None = None
    product_factored_model: float | None = None
    ratio_model: float | None = None
    mochi_ok_model: bool | None = None
    # not emitted as columns
    product_raw_model: float | None = field(default=None, metadata={"column": False})
    residuals_model: tuple[float, float] | None = field(default=None, metadata={"column": False})
    robertson_ok_model: bool | None = field(default=None, metadata={"column": False})
    error: str | None = field(default=None, metadata={"column": False})


COLUMNS = tuple(f.name for f in fields(SweepRecord) if f.metadata.get("column", True))


def paper_mode(theta: float) -> SweepRecord:
    """Closed-form quantities at ``theta``."""
    theta = _check_theta(theta)
    s = math.sin(theta)
    rec = SweepRecord(theta=theta)
    rec.sigma_a = s
    rec.sigma_b = 1.0 / SQRT2
    rec.epsilon_paper = 0.0
    rec.eta_paper = s
    rec.ozawa_lhs_paper = s * s
    rec.commutator_abs = SQRT2 * s
    rec.ozawa_rhs = 0.5 * rec.commutator_abs
    rec.ozawa_ok_paper = rec.ozawa_lhs_paper - rec.ozawa_rhs >= -ineq.SLACK_TOL
    rec.eps_bound_heis = epsilon_lower_bound(theta, "heisenberg_product")
    rec.eps_bound_ozawa = epsilon_lower_bound(theta, "ozawa")
    rec.coeff_mochi21 = bound_coefficient(theta, "heisenberg_product") if s > 0 else None
    rec.coeff_mochi11 = bound_coefficient(theta, "ozawa")
    return rec


def epsilon_lower_bound(theta: float, assumption: str) -> float:
    """Smallest ε(A) compatible with the closed forms under ``assumption``."""
    s = math.sin(_check_theta(theta))
    if assumption == "heisenberg_product":
        return 1.0 / SQRT2
    if assumption == "ozawa":
        if s >= 1.0 / SQRT2:
            return 0.0
        return s * (1.0 - SQRT2 * s) / (1.0 + SQRT2 * s)
    raise InvalidInput(f"unknown assumption {assumption!r}")


def _coefficient_from_sin(s: float, assumption: str) -> float:
    if assumption == "heisenberg_product":
        return 1.0 / (2.0 * SQRT2 * s) + s / SQRT2
    if s >= 1.0 / SQRT2:
        return math.sqrt(s * s + 0.5) / SQRT2
    return (1.0 + 2.0 * s * s) / (SQRT2 + 2.0 * s)


def bound_coefficient(theta: float, assumption: str) -> float:
    """Coefficient k(θ) in <𝒩²𝒟²>^½ ≥ k(θ) |<[A, B]>|."""
    theta = _check_theta(theta)
    if assumption not in ASSUMPTIONS:
        raise InvalidInput(f"unknown assumption {assumption!r}")
    s = math.sin(theta)
    if assumption == "heisenberg_product" and s == 0.0:
        raise ZeroDivisionError("heisenberg_product coefficient is singular at theta = 0")
    return _coefficient_from_sin(s, assumption)


def coefficient_minimum(assumption: str) -> tuple[float, float]:
    """(θ*, k(θ*)) minimising the bound coefficient over (0, π/2]."""
    if assumption not in ASSUMPTIONS:
        raise InvalidInput(f"unknown assumption {assumption!r}")
    res = minimize_scalar(
        lambda t: bound_coefficient(t, assumption),
        bounds=(1e-6, HALF_PI), method="bounded", options={"xatol": 1e-12},
    )
    return float(res.x), float(res.fun)


def model_quantities(theta: float, rec: SweepRecord | None = None) -> SweepRecord:
    """Fill model columns from the controlled-shift measurement of A_θ."""
    st = spin_setting(theta)
    rec = rec or SweepRecord(theta=st.theta)
    model = measmodel.make_projective_model(st.A, probe_dim=2, disturbed=st.B)
    summary = measmodel.summarize(model, st.psi)
    c = commutator_expectation_abs(st.A, st.B, st.psi)
    rec.sigma_a = sigma(st.A, st.psi)
    rec.sigma_b = sigma(st.B, st.psi)
    rec.commutator_abs = c
    rec.ozawa_rhs = 0.5 * c
    rec.epsilon_model = summary.epsilon
    rec.eta_model = summary.eta
    rec.product_factored_model = summary.product_factored
    rec.product_raw_model = summary.product_raw
    rec.residuals_model = summary.assumption_residuals
    rec.ozawa_ok_model = ineq.evaluate("ozawa", summary, c).satisfied
    rec.robertson_ok_model = ineq.evaluate("robertson", summary, c).satisfied
    if c > ineq.SLACK_TOL:
        rec.ratio_model = summary.product_factored / c
        rec.mochi_ok_model = ineq.evaluate("mochi", summary, c).satisfied
    return rec


def _record(theta: float, mode: str) -> SweepRecord:
    rec = SweepRecord(theta=theta)
    try:
        if mode in ("paper", "both"):
            rec = paper_mode(theta)
        if mode in ("model", "both"):
            rec = model_quantities(theta, rec)
    except (EdurError, ArithmeticError) as exc:
        rec.error = f"{type(exc).__name__}: {exc}"
    return rec


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("EDUR_THREADS", "1")))
    except ValueError:
        return 1


def default_grid(steps: int = DEFAULT_STEPS, lo: float = 0.0, hi: float = HALF_PI) -> list[float]:
    if steps < 1:
        raise InvalidInput("need at least one grid point")
    if steps == 1:
        return [float(lo)]
    return [float(t) for t in np.linspace(lo, hi, steps)]


def sweep(theta_grid, mode: str = "both", workers: int | None = None) -> list[SweepRecord]:
    """One record per grid point, in grid order.

    Per-point failures are stored in ``record.error`` instead of aborting.
    """
    grid = [float(t) for t in theta_grid]
    if not grid:
        raise InvalidInput("empty theta grid")
    if mode not in ("paper", "model", "both"):
        raise InvalidInput(f"unknown mode {mode!r}")
    for t in grid:
        _check_theta(t)
    workers = workers or _workers()
    if workers == 1:
        return [_record(t, mode) for t in grid]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda t: _record(t, mode), grid))


def testability(records: list[SweepRecord]) -> dict:
    """The two experimental predicates over the model ratio column:
    ratio ≤ 1 at some angle, and ratio ≥ 2-√2 at every angle."""
    ratios = [r.ratio_model for r in records if r.ratio_model is not None]
    if not ratios:
        return {"ratio_le_one_somewhere": None, "ratio_ge_mochi_everywhere": None}
    return {
        "ratio_le_one_somewhere": any(x <= 1.0 + ineq.SLACK_TOL for x in ratios),
        "ratio_ge_mochi_everywhere": all(x >= ineq.MOCHI_CONSTANT - ineq.SLACK_TOL for x in ratios),
    }
