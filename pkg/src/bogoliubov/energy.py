"""Vacuum energies of the Weyl and normally ordered quantizations.

Every formula is evaluated by an independent route so that they can be
cross-checked against each other:

    Weyl energy  E^w      fun1, fun2, funct, func3
    normal energy E^n     fs1, fs2, fs3, fs4, fs4a, fs5

The τ-integrals use the measure ``dτ/(2π)`` over the whole real line, with
prefactors fixed so that all formulas agree with the closed form
``E^w = Tr|B| / 4``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy import linalg

from .algebra import (ATOL, DoubledOperator, QuadraticProblem,
                      build_generator, form_s, is_positive_definite,
                      matrix_sqrt_psd, min_eigenvalue, sign_real_spectrum)
from .errors import InvalidInput, NotPositive, SigmaPathSingular
from .quadrature import DEFAULT, QuadratureConfig, integrate_sigma, integrate_tau

WEYL_METHODS = ("fun1", "fun2", "funct", "func3")
NORMAL_METHODS = ("fs1", "fs2", "fs3", "fs4", "fs4a", "fs5")
QUADRATURE_METHODS = frozenset({"func3", "fs4", "fs4a", "fs5"})


@dataclass(frozen=True)
class EnergyReport:
    e_weyl: dict
    e_normal: dict
    max_pairwise_discrepancy: float
    quadrature_settings: QuadratureConfig = field(default=DEFAULT)

    def discrepancies(self, family: str = "normal") -> dict:
        vals = self.e_normal if family == "normal" else self.e_weyl
        return {f"{a}-{b}": abs(vals[a] - vals[b]) for a, b in combinations(sorted(vals), 2)}


def _generator(B) -> DoubledOperator:
    if isinstance(B, QuadraticProblem):
        return build_generator(B)
    if not isinstance(B, DoubledOperator):
        B = DoubledOperator(B, kind="generator")
    return B


def _blocks(B: DoubledOperator):
    return B.tl, -B.tr


def _check_nonnegative(A: np.ndarray, atol: float = ATOL):
    lo = min_eigenvalue(A)
    if lo < -atol * max(1.0, np.linalg.norm(A, 2)):
        raise NotPositive(f"classical Hamiltonian has eigenvalue {lo:.6g} < 0")


def _tau_scale(A: np.ndarray) -> float:
    w = np.abs(np.linalg.eigvalsh((A + A.conj().T) / 2))
    w = w[w > 1e-12 * max(w.max(), 1e-300)]
    return float(np.exp(np.mean(np.log(w)))) if w.size else 1.0


def squared_generator_blocks(h, g) -> np.ndarray:
    """``B²`` assembled from its blocks ``[[h²-gḡ, -hg+gh̄], [ḡh-h̄ḡ, h̄²-ḡg]]``."""
    hb, gb = h.conj(), g.conj()
    return np.block([[h @ h - g @ gb, -h @ g + g @ hb],
                     [gb @ h - hb @ gb, hb @ hb - gb @ g]])


def _abs_trace_from_eigs(B) -> float:
    return float(np.sum(np.abs(linalg.eigvals(B))))


def weyl_energy(B, method: str = "fun1", qc: QuadratureConfig = DEFAULT) -> float:
    """Infimum of the Weyl quantization of ``B``."""
    B = _generator(B)
    s = form_s(B.m)
    A = B.data @ s
    _check_nonnegative(A)
    h, g = _blocks(B)
    if method == "fun1":
        return _abs_trace_from_eigs(B.data) / 4
    if method == "fun2":
        mu = linalg.eigvals(squared_generator_blocks(h, g))
        return float(np.sum(np.sqrt(np.clip(mu.real, 0, None)))) / 4
    if method == "funct":
        ah = matrix_sqrt_psd(A)
        inner = ah @ s @ A @ s @ ah
        return float(np.trace(matrix_sqrt_psd((inner + inner.conj().T) / 2)).real) / 4
    if method == "func3":
        if not is_positive_definite(A):
            raise NotPositive("func3 requires a strictly positive classical Hamiltonian")
        b2 = B.data @ B.data
        eye = np.eye(b2.shape[0])

        def f(tau):
            return np.trace(np.linalg.solve(b2 + tau**2 * eye, b2)).real

        return integrate_tau(f, qc, scale=_tau_scale(A)) / 2
    raise InvalidInput(f"unknown Weyl method {method!r}; expected one of {WEYL_METHODS}")


def interpolated_family(B, sigma: float):
    """``(A_σ, B_σ, G)`` with ``B_σ = B0 + σG`` and ``A_σ = B_σ S``."""
    B = _generator(B)
    h, g = _blocks(B)
    z = np.zeros_like(h)
    G = np.block([[z, -g], [g.conj(), z]])
    b0 = np.block([[h, z], [z, -h.conj()]])
    b_sigma = b0 + sigma * G
    return b_sigma @ form_s(B.m), b_sigma, G


def _check_sigma_path(B: DoubledOperator):
    # A_σ is affine in σ, so positivity at both ends covers [0, 1]
    a0, _, _ = interpolated_family(B, 0.0)
    a1, _, _ = interpolated_family(B, 1.0)
    if not (is_positive_definite(a0) and is_positive_definite(a1)):
        raise SigmaPathSingular("A_sigma is not positive on [0, 1]; needs h > 0 and a < 1")


def normal_energy(B, method: str = "fs1", qc: QuadratureConfig = DEFAULT) -> float:
    """Infimum of the normally ordered quantization of ``B``."""
    B = _generator(B)
    m = B.m
    s = form_s(m)
    A = B.data @ s
    _check_nonnegative(A)
    h, g = _blocks(B)
    if method == "fs1":
        return float(weyl_energy(B, "fun1") - np.trace(h).real / 2)
    if method == "fs2":
        z = np.zeros_like(h)
        b0 = np.block([[h, z], [z, -h.conj()]])
        return (_abs_trace_from_eigs(B.data) - _abs_trace_from_eigs(b0)) / 4
    if method == "fs3":
        root = linalg.sqrtm(squared_generator_blocks(h, g))
        return float(np.trace(root).real - 2 * np.trace(h).real) / 4
    if method not in ("fs4", "fs4a", "fs5"):
        raise InvalidInput(f"unknown normal method {method!r}; expected one of {NORMAL_METHODS}")

    _check_sigma_path(B)
    if method == "fs4":
        def fsig(sig):
            _, b_sig, G = interpolated_family(B, sig)
            return np.trace(sign_real_spectrum(b_sig) @ G).real

        return integrate_sigma(fsig, qc) / 4
    if method == "fs4a":
        def fsig(sig):
            a_sig, _, G = interpolated_family(B, sig)
            ah = matrix_sqrt_psd(a_sig)
            inner = ah @ s @ a_sig @ s @ ah
            w, v = np.linalg.eigh((inner + inner.conj().T) / 2)
            inv_root = (v / np.sqrt(w)) @ v.conj().T
            return np.trace(ah @ inv_root @ ah @ s @ G).real

        return integrate_sigma(fsig, qc) / 4

    def fsig(sig):
        a_sig, _, G = interpolated_family(B, sig)
        sg = s @ G

        def ftau(tau):
            x = np.linalg.solve(a_sig + 1j * tau * s, sg)
            return np.trace(x @ x).real

        return (1 - sig) * integrate_tau(ftau, qc, scale=_tau_scale(a_sig))

    return -integrate_sigma(fsig, qc) / 2


def quantization_shifts(B, qc: QuadratureConfig = DEFAULT):
    """``(E^w - E^n, zero-infimum shift)`` = ``(Tr h / 2, -E^w)``."""
    B = _generator(B)
    _check_nonnegative(B.data @ form_s(B.m))
    return float(np.trace(B.tl).real / 2), -weyl_energy(B, "fun1", qc)


def energy_report(B, qc: QuadratureConfig = DEFAULT, methods=None) -> EnergyReport:
    """Evaluate every requested formula (all by default)."""
    B = _generator(B)
    methods = tuple(methods) if methods else WEYL_METHODS + NORMAL_METHODS
    unknown = set(methods) - set(WEYL_METHODS + NORMAL_METHODS)
    if unknown:
        raise InvalidInput(f"unknown methods {sorted(unknown)}")
    ew = {k: weyl_energy(B, k, qc) for k in methods if k in WEYL_METHODS}
    en = {k: normal_energy(B, k, qc) for k in methods if k in NORMAL_METHODS}
    disc = 0.0
    for vals in (ew, en):
        for a, b in combinations(vals.values(), 2):
            disc = max(disc, abs(a - b))
    return EnergyReport(ew, en, disc, qc)


def classical_energy(p: QuadraticProblem, w) -> float:
    """``Σ h_ij w̄_i w_j + Re Σ g_ij w̄_i w̄_j``, the energy of a coherent state."""
    w = np.asarray(w, dtype=complex)
    return float((w.conj() @ p.h @ w).real + (w.conj() @ p.g @ w.conj()).real)
