"""Projection lattice: orthocomplement, meet, join and compatibility tests.

Two projections ``u`` and ``v`` are compatible when
``v == (v ∧ u) ∨ (v ∧ u⊥)``. In finite dimensions this happens exactly when
they commute, and it is the condition under which the family ``u_n ∧ v``
is again an observable (and so ``u`` and ``v`` are simultaneously
measurable).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import matcore
from .errors import DimensionError, InvalidInput, NumericFailure
from .qstate import OperatorLike, _op, spectral_map

LATTICE_TOL = 1e-9
COMMUTE_TOL = 1e-10
IDEMPOTENT_TOL = 1e-10


def is_projection(p, tol: float = IDEMPOTENT_TOL) -> bool:
    p = np.asarray(p)
    return matcore.is_hermitian(p, tol) and matcore.max_abs(p @ p - p) <= tol


def as_projection(p, tol: float = IDEMPOTENT_TOL) -> np.ndarray:
    m = matcore.as_hermitian(p, tol)
    res = matcore.max_abs(m @ m - m)
    if res > tol:
        raise InvalidInput(f"not idempotent (residual {res:.3g})")
    return m


def rank(p) -> int:
    return int(round(np.trace(np.asarray(p)).real))


def lattice_equal(p, q, tol: float = LATTICE_TOL) -> bool:
    return matcore.max_abs(np.asarray(p) - np.asarray(q)) <= tol


def _pair(p, q):
    p, q = as_projection(p), as_projection(q)
    if p.shape != q.shape:
        raise DimensionError(f"dimension mismatch: {p.shape} vs {q.shape}")
    return p, q


def orthocomplement(p) -> np.ndarray:
    p = as_projection(p)
    return np.eye(p.shape[0]) - p


def meet(p, q) -> np.ndarray:
    """Projector onto range(p) ∩ range(q), as the kernel of (I-p) + (I-q)."""
    p, q = _pair(p, q)
    eye = np.eye(p.shape[0])
    return matcore.null_space_projector((eye - p) + (eye - q))


def join(p, q) -> np.ndarray:
    p, q = _pair(p, q)
    eye = np.eye(p.shape[0])
    return eye - meet(eye - p, eye - q)


def join_all(ps, dim: int) -> np.ndarray:
    out = np.zeros((dim, dim), dtype=complex)
    for p in ps:
        out = join(out, p)
    return out


@dataclass(frozen=True)
class LatticeCheckReport:
    commutes: bool
    distributive: bool
    meet_rank: int
    max_residual: float


def distributivity_holds(u, v) -> LatticeCheckReport:
    """Check ``v == (v ∧ u) ∨ (v ∧ u⊥)`` and, separately, ``[u, v] == 0``."""
    u, v = _pair(u, v)
    uc = np.eye(u.shape[0]) - u
    rebuilt = join(meet(v, u), meet(v, uc))
    residual = matcore.max_abs(v - rebuilt)
    return LatticeCheckReport(
        commutes=matcore.max_abs(u @ v - v @ u) <= COMMUTE_TOL,
        distributive=residual <= LATTICE_TOL,
        meet_rank=rank(meet(u, v)),
        max_residual=residual,
    )


def simultaneously_measurable(a: OperatorLike, b: OperatorLike) -> tuple[bool, list[LatticeCheckReport]]:
    """Lattice test over every pair of spectral projectors of ``a`` and ``b``.

    The verdict is cross-checked against ``[a, b] == 0``; a disagreement
    means the tolerances are inconsistent for this input and raises.
    """
    a, b = _op(a), _op(b)
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    reports = [
        distributivity_holds(pu, pv)
        for pu in spectral_map(a).projectors
        for pv in spectral_map(b).projectors
    ]
    verdict = all(r.distributive for r in reports)
    commute = matcore.max_abs(matcore.commutator(a, b)) <= COMMUTE_TOL
    if verdict != commute:
        raise NumericFailure("lattice verdict disagrees with the commutator test")
    return verdict, reports


@dataclass
class TheoremReport:
    """Axiom checks for the family ``u_n ∧ v`` over all index subsets."""

    completeness: bool
    additivity: bool
    complement: bool
    distributivity: bool
    failures: list[str] = field(default_factory=list)
    max_residual: float = 0.0

    @property
    def passed(self) -> bool:
        return self.distributivity

    @property
    def axioms_hold(self) -> bool:
        return self.completeness and self.additivity and self.complement


def theorem_brute_force(u_list, v) -> TheoremReport:
    """Enumerate every subset ``S`` of the resolution ``u_list`` and check that
    ``w(S) = (⋁_{n∈S} u_n) ∧ v`` behaves as an observable restricted to ``v``.

    Checks: ``w(all) == v``; ``w(S) ∨ w(T) == w(S ∪ T)`` for disjoint S, T;
    ``w(S) ∨ w(S^c) == v`` with ``w(S) w(S^c) == 0``; and distributivity of
    ``v`` against each ``u(S)``.
    """
    us = [as_projection(u) for u in u_list]
    v = as_projection(v)
    if not us:
        raise InvalidInput("empty resolution")
    dim = v.shape[0]
    if any(u.shape != v.shape for u in us):
        raise DimensionError("resolution and v have different dimensions")
    eye = np.eye(dim)
    if matcore.max_abs(sum(us) - eye) > LATTICE_TOL:
        raise InvalidInput("u_list does not sum to the identity")
    for i, j in combinations(range(len(us)), 2):
        if matcore.max_abs(us[i] @ us[j]) > LATTICE_TOL:
            raise InvalidInput("u_list projectors are not mutually orthogonal")

    n = len(us)
    u_of = {}
    for mask in range(1 << n):
        u_of[mask] = sum((us[k] for k in range(n) if mask >> k & 1), np.zeros((dim, dim), dtype=complex))
    w = {mask: meet(u_of[mask], v) for mask in u_of}
    full = (1 << n) - 1

    rep = TheoremReport(True, True, True, True)

    def note(flag: str, what: str, resid: float):
        setattr(rep, flag, False)
        rep.failures.append(f"{what} (residual {resid:.3g})")

    def track(a, b) -> float:
        r = matcore.max_abs(a - b)
        rep.max_residual = max(rep.max_residual, r)
        return r

    r = track(w[full], v)
    if r > LATTICE_TOL:
        note("completeness", "w(R) != v", r)
    for s in range(1 << n):
        for t in range(1 << n):
            if s & t or s > t:
                continue
            r = track(join(w[s], w[t]), w[s | t])
            if r > LATTICE_TOL:
                note("additivity", f"w({s:b}) ∨ w({t:b}) != w({s | t:b})", r)
        sc = full ^ s
        r = max(track(join(w[s], w[sc]), v), matcore.max_abs(w[s] @ w[sc]))
        if r > LATTICE_TOL:
            note("complement", f"w({s:b}) and w({sc:b}) do not resolve v", r)
        r = track(join(meet(v, u_of[s]), meet(v, eye - u_of[s])), v)
        if r > LATTICE_TOL:
            note("distributivity", f"v not distributive over u({s:b})", r)
    return rep


# labelling used throughout: the "+" projectors are onto the -1 eigenspace
def p_x_plus() -> np.ndarray:
    return (matcore.I2 - matcore.SX) / 2


def p_x_minus() -> np.ndarray:
    return (matcore.I2 + matcore.SX) / 2


def sigma_phi(phi: float) -> np.ndarray:
    return matcore.SX * np.cos(phi) + matcore.SY * np.sin(phi)


def p_phi_plus(phi: float) -> np.ndarray:
    return (matcore.I2 - sigma_phi(phi)) / 2
