"""Diagonalization of positive classical Hamiltonians by a positive symplectic map.

For ``A = B S > 0`` the map ``R0 = sgn(B) S`` is positive and symplectic, and
its square root ``R = R0^{1/2}`` block-diagonalizes the generator::

    B = R diag(h_dg, -conj(h_dg)) R^{-1}
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .algebra import (DoubledOperator, QuadraticProblem, _arr,
                      build_generator, classical_hamiltonian, form_s,
                      hermitian_power, is_positive_definite, is_symplectic,
                      matrix_sqrt_psd, min_eigenvalue, sign_real_spectrum)
from .errors import DegenerateP, HNotPositive, NotPositive

CONDITIONING_WARN_A = 0.95


class ConditioningWarning(UserWarning):
    pass


@dataclass(frozen=True)
class DiagonalizationResult:
    R: DoubledOperator
    h_dg: np.ndarray
    offdiag_residual: float
    symplectic_residual: float
    a: Optional[float] = None
    notes: tuple = field(default=())

    @property
    def R_inv(self) -> np.ndarray:
        s = form_s(self.R.m)
        return s @ self.R.data @ s

    @property
    def frequencies(self) -> np.ndarray:
        """Eigenvalues of ``h_dg`` (the normal-mode frequencies), ascending."""
        return np.linalg.eigvalsh(self.h_dg)

    def norm_bounds(self):
        """The interval ``[((1-a)/(1+a))^{1/4}, ((1+a)/(1-a))^{1/4}]`` containing ``||R||``."""
        if self.a is None or self.a >= 1:
            return None
        a = self.a
        return ((1 - a) / (1 + a)) ** 0.25, ((1 + a) / (1 - a)) ** 0.25


class PositiveSymplecticDecomposition(NamedTuple):
    u: np.ndarray
    M: np.ndarray
    plus_part: np.ndarray
    minus_part: np.ndarray
    residual: float


def _require_positive(A: np.ndarray):
    if not is_positive_definite(A):
        raise NotPositive(
            f"classical Hamiltonian A = BS is not positive definite "
            f"(min eigenvalue {min_eigenvalue(A):.6g})")


def _hermitize(x):
    return (x + x.conj().T) / 2


def r0_via_sign(B: DoubledOperator) -> DoubledOperator:
    """``R0 = sgn(B) S``."""
    A = classical_hamiltonian(B)
    _require_positive(A.data)
    r0 = sign_real_spectrum(B) @ form_s(B.m)
    return DoubledOperator(_hermitize(r0), kind="symplectic")


def r0_via_a_form(A) -> DoubledOperator:
    """``R0 = S A^{-1/2} (A^{1/2} S A S A^{1/2})^{1/2} A^{-1/2} S``, using Hermitian roots only."""
    a = _arr(A)
    _require_positive(a)
    s = form_s(a.shape[0] // 2)
    ah = matrix_sqrt_psd(a)
    ahi = hermitian_power(a, -0.5)
    inner = matrix_sqrt_psd(_hermitize(ah @ s @ a @ s @ ah))
    return DoubledOperator(_hermitize(s @ ahi @ inner @ ahi @ s), kind="symplectic")


def relative_bound_a(p: QuadraticProblem) -> float:
    """Operator norm of ``h^{-1/2} g h̄^{-1/2}``; diagonalization needs it below one."""
    if min_eigenvalue(p.h) <= 0:
        raise HNotPositive(f"h is not positive (min eigenvalue {min_eigenvalue(p.h):.6g})")
    hi = hermitian_power(p.h, -0.5)
    return float(np.linalg.norm(hi @ p.g @ hi.conj(), 2))


def diagonalize(B, h=None) -> DiagonalizationResult:
    """Diagonalize a generator with positive classical Hamiltonian.

    ``B`` may be a generator or a :class:`QuadraticProblem`.  The relative
    bound ``a`` is reported only when ``h > 0``.
    """
    if isinstance(B, QuadraticProblem):
        B = build_generator(B)
    m = B.m
    r0 = r0_via_sign(B)
    R = DoubledOperator(_hermitize(matrix_sqrt_psd(r0)), kind="symplectic")
    s = form_s(m)
    r_inv = s @ R.data @ s
    d = r_inv @ B.data @ R.data
    h_dg = _hermitize(d[:m, :m])
    offdiag = float(max(np.linalg.norm(d[:m, m:], 2), np.linalg.norm(d[m:, :m], 2)))

    a = None
    notes = []
    tl = B.tl
    if min_eigenvalue(tl) > 0:
        hi = hermitian_power(tl, -0.5)
        a = float(np.linalg.norm(hi @ (-B.tr) @ hi.conj(), 2))
        if a >= CONDITIONING_WARN_A:
            msg = f"relative bound a = {a:.4f} close to 1; R is ill-conditioned"
            notes.append(msg)
            warnings.warn(msg, ConditioningWarning, stacklevel=2)
    else:
        notes.append("a: not applicable (h is not positive)")
    return DiagonalizationResult(R, h_dg, offdiag, is_symplectic(R).residual, a, tuple(notes))


def decompose_positive_symplectic(R, gaptol: float = 1e-10) -> PositiveSymplecticDecomposition:
    """Unitary diagonalization of a positive symplectic ``R = [[p, q], [q̄, p̄]]``.

    Requires ``p - 1`` (equivalently ``q``) to be invertible.
    """
    r = _arr(R)
    m = r.shape[0] // 2
    p, q = _hermitize(r[:m, :m]), r[:m, m:]
    if np.linalg.svd(p - np.eye(m), compute_uv=False).min() < gaptol:
        raise DegenerateP("p - 1 is singular; q is not invertible")
    w, v = np.linalg.eigh(q.conj().T @ q)
    abs_q_inv = (v / np.sqrt(w)) @ v.conj().T
    u = q @ abs_q_inv
    one = np.eye(m)
    M = np.block([[one, -u], [u.conj().T, one]]) / np.sqrt(2)
    root = matrix_sqrt_psd(_hermitize(p @ p - one))
    plus = p + root
    minus = p.conj() - root.conj()
    z = np.zeros((m, m))
    recon = M @ np.block([[plus, z], [z, minus]]) @ M.conj().T
    return PositiveSymplecticDecomposition(u, M, plus, minus, float(np.linalg.norm(r - recon, 2)))


def shale_bound(R, p: QuadraticProblem, a: float):
    """``(||q||_HS, 2 (1-a)^{-1} ||h^{-1/2} g h̄^{-1/2}||_HS)``; the first must not exceed the second."""
    r = _arr(R)
    m = r.shape[0] // 2
    hi = hermitian_power(p.h, -0.5)
    weighted = np.linalg.norm(hi @ p.g @ hi.conj(), "fro")
    return float(np.linalg.norm(r[:m, m:], "fro")), float(2 * weighted / (1 - a))


class RestrictedGroupMargin(NamedTuple):
    hs_defect: float
    identity_value: float
    lower_bound: float


def restricted_group_margin(R) -> RestrictedGroupMargin:
    """``||1 - R*R||_HS^2`` with its closed form and lower bound.

    For symplectic ``R``, ``pp* = 1 + qq*`` gives
    ``||1 - R*R||_HS^2 = 16 Tr (q*q)^2 + 8 Tr q*q >= 8 Tr q*q``.
    """
    r = _arr(R)
    m = r.shape[0] // 2
    q = r[:m, m:]
    qq = q.conj().T @ q
    lhs = np.linalg.norm(np.eye(2 * m) - r.conj().T @ r, "fro") ** 2
    tr = float(np.trace(qq).real)
    return RestrictedGroupMargin(float(lhs), float(16 * np.trace(qq @ qq).real + 8 * tr), 8 * tr)
