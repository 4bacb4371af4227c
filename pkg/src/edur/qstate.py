"""Observables, states, moments and spectral (Borel-set) observable maps."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from . import matcore
from .errors import DimensionError, InvalidInput, NumericFailure

IMAG_TOL = 1e-10
NEG_VARIANCE_TOL = 1e-12
NORM_TOL = 1e-12
MERGE_TOL = 1e-9


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Observable:
    """A Hermitian operator with a human-readable label."""

    op: np.ndarray
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "op", _readonly(matcore.as_hermitian(self.op)))

    @property
    def dim(self) -> int:
        return self.op.shape[0]

    def shifted(self, c: float, label: str | None = None) -> "Observable":
        return Observable(self.op + c * np.eye(self.dim), label or self.label)


OperatorLike = Union[Observable, np.ndarray]


def _op(x: OperatorLike) -> np.ndarray:
    return x.op if isinstance(x, Observable) else matcore.as_square(x)


@dataclass(frozen=True)
class QuantumState:
    """Pure state (unit vector) or mixed state (density operator)."""

    kind: str
    vector: np.ndarray | None = None
    density: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == "pure":
            v = np.asarray(self.vector, dtype=complex).reshape(-1)
            if v.size == 0 or not np.all(np.isfinite(v)):
                raise InvalidInput("state vector must be finite and non-empty")
            if abs(np.linalg.norm(v) - 1.0) > NORM_TOL:
                raise InvalidInput(f"state vector norm {np.linalg.norm(v):.15g} != 1")
            object.__setattr__(self, "vector", _readonly(v))
            object.__setattr__(self, "density", None)
        elif self.kind == "mixed":
            rho = matcore.as_hermitian(self.density)
            if abs(np.trace(rho).real - 1.0) > NORM_TOL:
                raise InvalidInput("density operator must have unit trace")
            if np.linalg.eigvalsh(rho).min() < -NORM_TOL:
                raise InvalidInput("density operator must be positive semidefinite")
            object.__setattr__(self, "density", _readonly(rho))
            object.__setattr__(self, "vector", None)
        else:
            raise InvalidInput(f"unknown state kind {self.kind!r}")

    @classmethod
    def pure(cls, vector, normalize: bool = False) -> "QuantumState":
        v = np.asarray(vector, dtype=complex).reshape(-1)
        if normalize:
            n = np.linalg.norm(v)
            if n == 0:
                raise InvalidInput("cannot normalize the zero vector")
            v = v / n
        return cls("pure", vector=v)

    @classmethod
    def mixed(cls, density) -> "QuantumState":
        return cls("mixed", density=density)

    @property
    def dim(self) -> int:
        return self.vector.size if self.kind == "pure" else self.density.shape[0]

    @property
    def rho(self) -> np.ndarray:
        if self.kind == "pure":
            return np.outer(self.vector, np.conj(self.vector))
        return np.array(self.density)

    def tensor(self, other: "QuantumState") -> "QuantumState":
        if self.kind == other.kind == "pure":
            return QuantumState.pure(np.kron(self.vector, other.vector))
        return QuantumState.mixed(np.kron(self.rho, other.rho))


def basis_state(dim: int, k: int) -> QuantumState:
    v = np.zeros(dim, dtype=complex)
    v[k] = 1.0
    return QuantumState.pure(v)


PLUS_Z = basis_state(2, 0)
MINUS_Z = basis_state(2, 1)


def raw_expectation(op: np.ndarray, s: QuantumState) -> complex:
    """<op> on ``s`` for an arbitrary (not necessarily Hermitian) operator."""
    op = np.asarray(op)
    if op.shape != (s.dim, s.dim):
        raise DimensionError(f"operator shape {op.shape} does not act on dim {s.dim}")
    if s.kind == "pure":
        return complex(np.vdot(s.vector, op @ s.vector))
    return complex(np.trace(s.density @ op))


def expectation(x: OperatorLike, s: QuantumState) -> float:
    val = raw_expectation(_op(x), s)
    if abs(val.imag) > IMAG_TOL:
        raise NumericFailure(f"expectation has imaginary residue {val.imag:.3g}")
    return val.real


def deviation(x: OperatorLike, s: QuantumState) -> Observable:
    """Return X - <X> I."""
    op = _op(x)
    label = x.label if isinstance(x, Observable) else ""
    return Observable(op - expectation(op, s) * np.eye(op.shape[0]), f"Δ{label}" if label else "")


def variance(x: OperatorLike, s: QuantumState) -> float:
    op = _op(x)
    centered = op - expectation(op, s) * np.eye(op.shape[0])
    # centred second moment avoids the <X²> - <X>² cancellation near eigenstates
    if s.kind == "pure":
        return float(np.linalg.norm(centered @ s.vector) ** 2)
    return clamp_square(expectation(centered @ centered, s), "variance")


def clamp_square(value: float, what: str = "second moment") -> float:
    if value < -NEG_VARIANCE_TOL:
        raise NumericFailure(f"{what} is negative ({value:.3g})")
    return max(value, 0.0)


def sigma(x: OperatorLike, s: QuantumState) -> float:
    """Standard deviation sqrt(<X^2> - <X>^2)."""
    return math.sqrt(variance(x, s))


def commutator_expectation_abs(a: OperatorLike, b: OperatorLike, s: QuantumState) -> float:
    return abs(raw_expectation(matcore.commutator(_op(a), _op(b)), s))


# -- Borel sets -------------------------------------------------------------

@dataclass(frozen=True)
class BorelSet:
    """Finite union of pairwise disjoint half-open intervals ``[lo, hi)``.

    ``-inf``/``inf`` endpoints are allowed, so ``BorelSet.real()`` is the
    whole line.
    """

    intervals: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        ivs = []
        for lo, hi in self.intervals:
            lo, hi = float(lo), float(hi)
            if math.isnan(lo) or math.isnan(hi) or lo > hi:
                raise InvalidInput(f"bad interval [{lo}, {hi})")
            if lo < hi:
                ivs.append((lo, hi))
        ivs.sort()
        for (_, h1), (l2, _) in zip(ivs, ivs[1:]):
            if l2 < h1:
                raise InvalidInput("intervals overlap")
        object.__setattr__(self, "intervals", tuple(ivs))

    @classmethod
    def real(cls) -> "BorelSet":
        return cls(((-math.inf, math.inf),))

    @classmethod
    def empty(cls) -> "BorelSet":
        return cls(())

    @classmethod
    def interval(cls, lo: float, hi: float) -> "BorelSet":
        return cls(((lo, hi),))

    def __contains__(self, x: float) -> bool:
        return any(lo <= x < hi for lo, hi in self.intervals)

    def is_disjoint(self, other: "BorelSet") -> bool:
        return all(
            max(l1, l2) >= min(h1, h2)
            for l1, h1 in self.intervals
            for l2, h2 in other.intervals
        )

    def union(self, other: "BorelSet") -> "BorelSet":
        """Disjoint union; overlapping operands are rejected."""
        return BorelSet(self.intervals + other.intervals)

    def complement(self) -> "BorelSet":
        out, cursor = [], -math.inf
        for lo, hi in self.intervals:
            if lo > cursor:
                out.append((cursor, lo))
            cursor = hi
        if cursor < math.inf:
            out.append((cursor, math.inf))
        return BorelSet(tuple(out))


@dataclass(frozen=True)
class SpectralObservableMap:
    """Distinct eigenvalues with their eigenprojectors, usable as a map
    from Borel sets to projections."""

    eigenvalues: tuple[float, ...]
    projectors: tuple[np.ndarray, ...] = field(repr=False)

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    def __call__(self, borel: BorelSet) -> np.ndarray:
        return borel_evaluate(self, borel)


def spectral_map(x: OperatorLike, merge_tol: float = MERGE_TOL) -> SpectralObservableMap:
    es = matcore.hermitian_eigensystem(_op(x))
    groups: list[list[int]] = []
    for k, lam in enumerate(es.eigenvalues):
        if groups and abs(lam - es.eigenvalues[groups[-1][0]]) <= merge_tol:
            groups[-1].append(k)
        else:
            groups.append([k])
    values, projs = [], []
    for g in groups:
        v = es.eigenvectors[:, g]
        values.append(float(np.mean(es.eigenvalues[g])))
        projs.append(_readonly(v @ matcore.dagger(v)))
    return SpectralObservableMap(tuple(values), tuple(projs))


def borel_evaluate(smap: SpectralObservableMap, borel: BorelSet) -> np.ndarray:
    """Sum of the eigenprojectors whose eigenvalue lies in ``borel``."""
    out = np.zeros((smap.dim, smap.dim), dtype=complex)
    for lam, p in zip(smap.eigenvalues, smap.projectors):
        if lam in borel:
            out = out + p
    return out


def borel_sets_for(values: Sequence[float], members: Iterable[int]) -> BorelSet:
    """A Borel set that captures exactly the listed eigenvalues of a spectrum.

    Each selected value ``v`` contributes ``[v - h, v + h)`` with ``h`` half
    the smallest spectral gap.
    """
    vals = sorted(values)
    gaps = [b - a for a, b in zip(vals, vals[1:])]
    h = 0.5 * min(gaps) if gaps else 0.5
    return BorelSet(tuple((values[i] - h, values[i] + h) for i in members))
