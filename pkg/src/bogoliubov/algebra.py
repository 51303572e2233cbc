"""Doubled phase-space formalism for bosonic quadratic Hamiltonians.

A one-particle space C^m is doubled to C^m + C^m.  Operators on the doubled
space are 2m x 2m complex matrices with m x m blocks::

    [[tl, tr],
     [bl, br]]

The "bar" of a block is entrywise complex conjugation in the fixed basis.
The commutation relations are encoded by ``S = diag(1, -1)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy import linalg

from .errors import (ComplexSpectrum, InvalidInput, NearSingular, NotPSD,
                     NotSymplectic, SingularP)

ATOL = 1e-12
RTOL = 1e-9
IMTOL = 1e-8
GAPTOL = 1e-10

KINDS = ("generator", "classical", "symplectic", "generic")


def _scale(x: np.ndarray) -> float:
    return max(1.0, float(np.linalg.norm(x, 2))) if x.size else 1.0


@dataclass(frozen=True)
class QuadraticProblem:
    """The data ``(h, g)`` of a quadratic Hamiltonian on C^m.

    ``h`` is Hermitian (one-body part), ``g`` symmetric (pairing part).
    ``h0`` is the free part used by the loop expansion and defaults to ``h``;
    ``coupling`` is the perturbative parameter lambda, the problem being
    understood as ``h = h0 + coupling * h1`` and ``g = coupling * g1``.
    """

    h: np.ndarray
    g: np.ndarray
    h0: Optional[np.ndarray] = None
    coupling: float = 1.0
    atol: float = field(default=ATOL, repr=False, compare=False)

    def __post_init__(self):
        h = np.atleast_2d(np.asarray(self.h, dtype=complex))
        m = h.shape[0]
        if m < 1 or h.shape != (m, m):
            raise InvalidInput(f"h must be a non-empty square matrix, got shape {h.shape}")
        g = np.asarray(self.g, dtype=complex)
        if g.ndim == 0 and m == 1:
            g = g.reshape(1, 1)
        if g.shape != (m, m):
            raise InvalidInput(f"g must have shape {(m, m)}, got {g.shape}")
        h0 = h if self.h0 is None else np.atleast_2d(np.asarray(self.h0, dtype=complex))
        if h0.shape != (m, m):
            raise InvalidInput(f"h0 must have shape {(m, m)}, got {h0.shape}")
        for name, x in (("h", h), ("h0", h0)):
            if np.linalg.norm(x - x.conj().T, 2) > self.atol * _scale(x):
                raise InvalidInput(f"{name} is not Hermitian")
        if np.linalg.norm(g - g.T, 2) > self.atol * _scale(g):
            raise InvalidInput("g is not symmetric")
        if not np.isfinite(self.coupling) or self.coupling == 0:
            raise InvalidInput("coupling must be finite and nonzero")
        for x in (h, g, h0):
            x.setflags(write=False)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "h0", h0)
        object.__setattr__(self, "coupling", float(self.coupling))

    @property
    def m(self) -> int:
        return self.h.shape[0]

    @property
    def h1(self) -> np.ndarray:
        return (self.h - self.h0) / self.coupling

    @property
    def g1(self) -> np.ndarray:
        return self.g / self.coupling


@dataclass(frozen=True)
class DoubledOperator:
    """A 2m x 2m matrix on the doubled space, tagged by its role."""

    data: np.ndarray
    kind: str = "generic"

    def __post_init__(self):
        data = np.array(self.data, dtype=complex)
        n = data.shape[0]
        if data.ndim != 2 or data.shape != (n, n) or n % 2 or n == 0:
            raise InvalidInput(f"doubled operator must be 2m x 2m, got {data.shape}")
        if self.kind not in KINDS:
            raise InvalidInput(f"unknown kind {self.kind!r}")
        m = n // 2
        if self.kind in ("classical", "symplectic"):
            scale = _scale(data)
            if (np.linalg.norm(data[m:, :m] - data[:m, m:].conj(), 2) > 1e3 * ATOL * scale
                    or np.linalg.norm(data[m:, m:] - data[:m, :m].conj(), 2) > 1e3 * ATOL * scale):
                raise InvalidInput(f"a {self.kind} operator must have the J-real block pattern")
        if self.kind == "symplectic":
            s = form_s(m)
            res = np.linalg.norm(data.conj().T @ s @ data - s, 2)
            if res > RTOL * _scale(data) ** 2:
                raise NotSymplectic(f"R* S R - S has norm {res:.3e}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @classmethod
    def from_blocks(cls, tl, tr, bl, br, kind="generic"):
        tl, tr, bl, br = (np.atleast_2d(np.asarray(x, dtype=complex)) for x in (tl, tr, bl, br))
        return cls(np.block([[tl, tr], [bl, br]]), kind)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def m(self) -> int:
        return self.data.shape[0] // 2

    @property
    def tl(self):
        return self.data[:self.m, :self.m]

    @property
    def tr(self):
        return self.data[:self.m, self.m:]

    @property
    def bl(self):
        return self.data[self.m:, :self.m]

    @property
    def br(self):
        return self.data[self.m:, self.m:]

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)


class NormReport(NamedTuple):
    op_norm: float
    hs_norm: float
    trace_norm: float


class SymplecticResidual(NamedTuple):
    residual: float
    block_residual: float


def _arr(x) -> np.ndarray:
    return x.data if isinstance(x, DoubledOperator) else np.asarray(x, dtype=complex)


def form_s(m: int) -> np.ndarray:
    """The form ``S = diag(1_m, -1_m)``."""
    if m < 1:
        raise InvalidInput("m must be positive")
    return np.diag(np.r_[np.ones(m), -np.ones(m)]).astype(complex)


def norms(x) -> NormReport:
    s = np.linalg.svd(_arr(x), compute_uv=False)
    return NormReport(float(s.max(initial=0.0)), float(np.sqrt(np.sum(s**2))), float(s.sum()))


def j_real_residual(x) -> float:
    """Distance of ``x`` from the J-real block pattern ``[[p, q], [q̄, p̄]]``."""
    x = DoubledOperator(_arr(x))
    return max(np.linalg.norm(x.bl - x.tr.conj(), 2), np.linalg.norm(x.br - x.tl.conj(), 2))


def generator_from_blocks(h, g) -> DoubledOperator:
    h = np.asarray(h, dtype=complex)
    g = np.asarray(g, dtype=complex)
    return DoubledOperator.from_blocks(h, -g, g.conj(), -h.conj(), kind="generator")


def build_generator(p: QuadraticProblem) -> DoubledOperator:
    """Symplectic generator ``B = [[h, -g], [ḡ, -h̄]]``."""
    return generator_from_blocks(p.h, p.g)


def free_generator(p: QuadraticProblem) -> DoubledOperator:
    """``B0 = diag(h0, -h̄0)``, the generator of the free part."""
    z = np.zeros_like(p.h0)
    return DoubledOperator.from_blocks(p.h0, z, z, -p.h0.conj(), kind="generator")


def classical_hamiltonian(B: DoubledOperator) -> DoubledOperator:
    """``A = B S``; Hermitian and J-real for every generator."""
    if B.kind != "generator":
        raise InvalidInput(f"expected a generator, got kind {B.kind!r}")
    return DoubledOperator(B.data @ form_s(B.m), kind="classical")


def generator_of(A: DoubledOperator) -> DoubledOperator:
    return DoubledOperator(_arr(A) @ form_s(A.m), kind="generator")


def is_symplectic(R) -> SymplecticResidual:
    """Residual of ``R* S R = S`` and of the equivalent block identities.

    The block identities for ``R = [[p, q], [q̄, p̄]]`` are
    ``p*p - qᵀq̄ = 1``, ``p*q - qᵀp̄ = 0``, ``pp* - qq* = 1``, ``pqᵀ - qpᵀ = 0``.
    """
    r = _arr(R)
    m = r.shape[0] // 2
    s = form_s(m)
    res = float(np.linalg.norm(r.conj().T @ s @ r - s, 2))
    p, q = r[:m, :m], r[:m, m:]
    one = np.eye(m)
    blocks = (p.conj().T @ p - q.T @ q.conj() - one,
              p.conj().T @ q - q.T @ p.conj(),
              p @ p.conj().T - q @ q.conj().T - one,
              p @ q.T - q @ p.T)
    return SymplecticResidual(res, float(max(np.linalg.norm(b, 2) for b in blocks)))


def symplectic_inverse(R, rtol: float = 1e-6) -> DoubledOperator:
    """``R^{-1} = S R* S`` for symplectic ``R``."""
    r = _arr(R)
    s = form_s(r.shape[0] // 2)
    inv = s @ r.conj().T @ s
    err = np.linalg.norm(r @ inv - np.eye(r.shape[0]), 2)
    if err > rtol:
        raise NotSymplectic(f"S R* S is not an inverse of R (residual {err:.3e})")
    return DoubledOperator(inv, kind="symplectic")


def d_operators(R, tol: float = 1e-8):
    """The symmetric matrices ``d1 = qᵀ (pᵀ)^{-1}`` and ``d2 = q p̄^{-1}``."""
    r = _arr(R)
    m = r.shape[0] // 2
    p, q = r[:m, :m], r[:m, m:]
    smin = np.linalg.svd(p, compute_uv=False).min()
    if smin < 1 - tol:
        raise SingularP(f"smallest singular value of p is {smin:.6g} < 1")
    d1 = linalg.solve(p, q).T  # qᵀ (pᵀ)^{-1} = (p^{-1} q)ᵀ
    d2 = q @ np.linalg.inv(p.conj())
    return d1, d2


def matrix_sqrt_psd(M, atol: float = ATOL) -> np.ndarray:
    """Hermitian square root of a Hermitian positive semidefinite matrix.

    Eigenvalues in ``[-atol * ||M||, 0)`` are clamped to zero.
    """
    mat = _arr(M)
    mat = (mat + mat.conj().T) / 2
    w, v = np.linalg.eigh(mat)
    tol = atol * _scale(mat)
    if w.size and w.min() < -tol:
        raise NotPSD(f"matrix has eigenvalue {w.min():.6g} < 0")
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def hermitian_power(M, power: float) -> np.ndarray:
    mat = _arr(M)
    w, v = np.linalg.eigh((mat + mat.conj().T) / 2)
    if w.min() <= 0:
        raise NotPSD(f"matrix has eigenvalue {w.min():.6g} <= 0")
    return (v * w**power) @ v.conj().T


def sign_real_spectrum(M, imtol: float = IMTOL, gaptol: float = GAPTOL) -> np.ndarray:
    """Matrix sign of a diagonalizable matrix with real nonzero spectrum.

    ``gaptol`` is relative to ``||M||``; eigenvectors are not assumed orthogonal.
    """
    mat = _arr(M)
    scale = np.linalg.norm(mat, 2)
    lam, vec = linalg.eig(mat)
    if np.max(np.abs(lam.imag)) > imtol * max(scale, 1.0):
        raise ComplexSpectrum("matrix has non-real eigenvalues")
    if np.min(np.abs(lam.real)) < gaptol * scale:
        raise NearSingular("matrix has an eigenvalue close to zero")
    return vec @ np.diag(np.sign(lam.real)) @ np.linalg.inv(vec)


def min_eigenvalue(A) -> float:
    a = _arr(A)
    return float(np.linalg.eigvalsh((a + a.conj().T) / 2)[0])


def is_positive_definite(A, rel: float = 1e-10) -> bool:
    a = _arr(A)
    return min_eigenvalue(a) > rel * np.linalg.norm(a, 2)


def flow(B, t: float) -> np.ndarray:
    """The symplectic one-parameter group ``exp(i t B)``."""
    return linalg.expm(1j * t * _arr(B))
