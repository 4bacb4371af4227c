"""Indirect measurement models and Heisenberg-picture error/disturbance.

A model couples a system (measured observable ``A``, disturbed observable
``B``) to a probe prepared in ``xi`` through a unitary ``U``; the meter ``M``
is read on the probe afterwards.  Everything is evaluated on ``psi ⊗ xi``:

    A_in = A ⊗ I            B_in = B ⊗ I
    M_out = U†(I ⊗ M)U (+ I ⊗ δM)
    B_out = U†(B ⊗ I)U
    N(A) = M_out - A_in     D(B) = B_out - B_in
    𝒩(A) = M_out - <A_in>   𝒟(B) = B_out - <B_in>
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from . import matcore
from .errors import DimensionError, InvalidInput
from .qstate import (
    Observable,
    QuantumState,
    basis_state,
    clamp_square,
    expectation,
    raw_expectation,
    sigma,
    spectral_map,
)

UNITARY_TOL = 1e-10
COMMUTE_TOL = 1e-10


@dataclass(frozen=True)
class MeasurementModel:
    probe_state: QuantumState
    interaction: np.ndarray
    meter: Observable
    measured: Observable
    disturbed: Observable
    noise_term: Observable | None = None

    def __post_init__(self):
        u = matcore.as_square(self.interaction)
        ds, dp = self.measured.dim, self.meter.dim
        if self.disturbed.dim != ds:
            raise DimensionError("measured and disturbed observables act on different spaces")
        if self.probe_state.dim != dp:
            raise DimensionError("probe state and meter act on different spaces")
        if u.shape != (ds * dp, ds * dp):
            raise DimensionError(f"interaction shape {u.shape} != ({ds * dp}, {ds * dp})")
        if not matcore.is_unitary(u, UNITARY_TOL):
            raise InvalidInput("interaction is not unitary")
        if self.noise_term is not None and self.noise_term.dim != dp:
            raise InvalidInput("noise term must act on the probe only")
        u = np.array(u, copy=True)
        u.setflags(write=False)
        object.__setattr__(self, "interaction", u)

    @property
    def system_dim(self) -> int:
        return self.measured.dim

    @property
    def probe_dim(self) -> int:
        return self.meter.dim

    def joint_state(self, psi: QuantumState) -> QuantumState:
        if psi.dim != self.system_dim:
            raise DimensionError(f"system state has dim {psi.dim}, model expects {self.system_dim}")
        return psi.tensor(self.probe_state)


@dataclass(frozen=True)
class HeisenbergQuantities:
    a_in: np.ndarray
    b_in: np.ndarray
    m_out: np.ndarray
    b_out: np.ndarray
    n_a: np.ndarray
    d_b: np.ndarray
    script_n: np.ndarray | None = None
    script_d: np.ndarray | None = None


@dataclass(frozen=True)
class ErrorDisturbanceSummary:
    epsilon: float
    eta: float
    sigma_a: float
    sigma_b: float
    product_raw: float | None
    product_factored: float
    assumption_residuals: tuple[float, float] = (0.0, 0.0)


def heisenberg_picture(model: MeasurementModel, psi: QuantumState | None = None) -> HeisenbergQuantities:
    """Assemble the in/out operators on the composite space.

    ``script_n``/``script_d`` need the input means, so they are only filled
    when ``psi`` is given.
    """
    u = model.interaction
    ud = matcore.dagger(u)
    i_s, i_p = np.eye(model.system_dim), np.eye(model.probe_dim)
    a_in = np.kron(model.measured.op, i_p)
    b_in = np.kron(model.disturbed.op, i_p)
    m_out = ud @ np.kron(i_s, model.meter.op) @ u
    if model.noise_term is not None:
        m_out = m_out + np.kron(i_s, model.noise_term.op)
    b_out = ud @ b_in @ u
    m_out = 0.5 * (m_out + matcore.dagger(m_out))
    b_out = 0.5 * (b_out + matcore.dagger(b_out))

    script_n = script_d = None
    if psi is not None:
        state = model.joint_state(psi)
        eye = np.eye(a_in.shape[0])
        script_n = m_out - expectation(a_in, state) * eye
        script_d = b_out - expectation(b_in, state) * eye
    return HeisenbergQuantities(
        a_in=a_in, b_in=b_in, m_out=m_out, b_out=b_out,
        n_a=m_out - a_in, d_b=b_out - b_in,
        script_n=script_n, script_d=script_d,
    )


def meter_disturbance_commutator(hq: HeisenbergQuantities) -> float:
    return matcore.max_abs(matcore.commutator(hq.m_out, hq.b_out))


def _rms(op: np.ndarray, state: QuantumState, what: str) -> float:
    return math.sqrt(clamp_square(expectation(op @ op, state), what))


def epsilon(model: MeasurementModel, psi: QuantumState) -> float:
    """Root-mean-square noise <N(A)^2>^(1/2)."""
    hq = heisenberg_picture(model)
    return _rms(hq.n_a, model.joint_state(psi), "<N(A)^2>")


def eta(model: MeasurementModel, psi: QuantumState) -> float:
    """Root-mean-square disturbance <D(B)^2>^(1/2)."""
    hq = heisenberg_picture(model)
    return _rms(hq.d_b, model.joint_state(psi), "<D(B)^2>")


def product_quantity(model: MeasurementModel, psi: QuantumState) -> tuple[float, float]:
    """Return ``(raw, factored)``.

    raw is <𝒩²𝒟²>^(1/2) using the symmetrised product; factored is
    <𝒩²>^(1/2) <𝒟²>^(1/2). They are equal only when the two factors are
    uncorrelated on the joint state, so both are always returned.
    """
    hq = heisenberg_picture(model, psi)
    state = model.joint_state(psi)
    n2 = hq.script_n @ hq.script_n
    d2 = hq.script_d @ hq.script_d
    raw = expectation(0.5 * (n2 @ d2 + d2 @ n2), state)
    factored = math.sqrt(clamp_square(expectation(n2, state))) * math.sqrt(
        clamp_square(expectation(d2, state))
    )
    return math.sqrt(clamp_square(raw, "<𝒩²𝒟²>")), factored


def _sym_corr(x: np.ndarray, y: np.ndarray, state: QuantumState) -> float:
    return raw_expectation(0.5 * (x @ y + y @ x), state).real


def assumption_residuals(model: MeasurementModel, psi: QuantumState) -> tuple[float, float]:
    """(Re<½{N(A), ΔA}>, Re<½{D(B), ΔB}>) on psi ⊗ xi."""
    hq = heisenberg_picture(model)
    state = model.joint_state(psi)
    eye = np.eye(hq.a_in.shape[0])
    delta_a = hq.a_in - expectation(hq.a_in, state) * eye
    delta_b = hq.b_in - expectation(hq.b_in, state) * eye
    return _sym_corr(hq.n_a, delta_a, state), _sym_corr(hq.d_b, delta_b, state)


def noise_correlation(model: MeasurementModel, psi: QuantumState) -> float:
    """Re<½{I⊗δM, ΔA}>; zero when the added noise is uncorrelated with A."""
    if model.noise_term is None:
        return 0.0
    state = model.joint_state(psi)
    a_in = np.kron(model.measured.op, np.eye(model.probe_dim))
    delta_a = a_in - expectation(a_in, state) * np.eye(a_in.shape[0])
    dm = np.kron(np.eye(model.system_dim), model.noise_term.op)
    return _sym_corr(dm, delta_a, state)


def summarize(model: MeasurementModel, psi: QuantumState) -> ErrorDisturbanceSummary:
    raw, factored = product_quantity(model, psi)
    return ErrorDisturbanceSummary(
        epsilon=epsilon(model, psi),
        eta=eta(model, psi),
        sigma_a=sigma(model.measured, psi),
        sigma_b=sigma(model.disturbed, psi),
        product_raw=raw,
        product_factored=factored,
        assumption_residuals=assumption_residuals(model, psi),
    )


def cyclic_shift(d: int) -> np.ndarray:
    """S|j> = |j+1 mod d>."""
    return np.roll(np.eye(d, dtype=complex), 1, axis=0)


def make_projective_model(
    target: Observable,
    probe_dim: int | None = None,
    disturbed: Observable | None = None,
) -> MeasurementModel:
    """Controlled-shift (von Neumann) model of an ideal measurement of ``target``.

    U = Σ_k P_k ⊗ S^k with P_k the k-th eigenprojector (ascending
    eigenvalues), the probe starts in |0>, and the meter reads λ_k on |k>.
    Pointer states beyond the spectrum read 0.
    """
    smap = spectral_map(target)
    n = len(smap.eigenvalues)
    probe_dim = n if probe_dim is None else probe_dim
    if probe_dim < n:
        raise InvalidInput(f"probe_dim {probe_dim} < {n} distinct eigenvalues")
    s = cyclic_shift(probe_dim)
    u = sum(np.kron(p, np.linalg.matrix_power(s, k)) for k, p in enumerate(smap.projectors))
    readings = np.zeros(probe_dim)
    readings[:n] = smap.eigenvalues
    return MeasurementModel(
        probe_state=basis_state(probe_dim, 0),
        interaction=u,
        meter=Observable(np.diag(readings), f"M[{target.label}]"),
        measured=target,
        disturbed=disturbed if disturbed is not None else target,
    )


def attach_noise(model: MeasurementModel, delta: Observable) -> MeasurementModel:
    """Add a probe-local error operator δM to the meter readout."""
    if delta.dim != model.probe_dim:
        raise InvalidInput(f"δM has dim {delta.dim}; it must act on the probe (dim {model.probe_dim})")
    return dataclasses.replace(model, noise_term=delta)


def with_observables(model: MeasurementModel, measured: Observable | None = None,
                     disturbed: Observable | None = None) -> MeasurementModel:
    return dataclasses.replace(
        model,
        measured=measured if measured is not None else model.measured,
        disturbed=disturbed if disturbed is not None else model.disturbed,
    )


def random_model(rng: np.random.Generator, system_dim: int, probe_dim: int) -> tuple[MeasurementModel, QuantumState]:
    """Random unitary, probe state, meter and system observables plus a random
    system state. Used by the property suites and ``edur model-eval --random``."""
    from scipy.stats import unitary_group

    def herm(d):
        x = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        return (x + x.conj().T) / 2

    def ket(d):
        return QuantumState.pure(rng.normal(size=d) + 1j * rng.normal(size=d), normalize=True)

    u = unitary_group.rvs(system_dim * probe_dim, random_state=rng)
    model = MeasurementModel(
        probe_state=ket(probe_dim),
        interaction=u,
        meter=Observable(herm(probe_dim), "M"),
        measured=Observable(herm(system_dim), "A"),
        disturbed=Observable(herm(system_dim), "B"),
    )
    return model, ket(system_dim)
