"""Loop expansion of the Weyl vacuum energy and its renormalization.

With ``B0`` the free generator built from ``h0`` and ``V = B² - B0²``, the
Weyl energy expands as ``E^w = Σ_j L_j`` with

    L_0 = ½ Tr h0
    L_j = ¼ (-1)^{j+1} / (2j) ∫ Tr (V R_τ)^j dτ/π,   R_τ = (B0² + τ²)^{-1}

and the renormalized energy ``E^ren = E^w - L_0 - L_1 - L_2`` has the direct
representation ``¼ ∫ Tr R_τ V (B² + τ²)^{-1} (V R_τ)² τ² dτ/π``.
Here ``dτ/π`` is the ordinary Lebesgue measure on the real line divided by π.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .algebra import (DoubledOperator, QuadraticProblem, _arr, build_generator,
                      free_generator, min_eigenvalue)
from .energy import weyl_energy
from .errors import DifferentiationUnstable, HNotPositive, InvalidInput
from .quadrature import DEFAULT, QuadratureConfig, integrate_tau

RICHARDSON_STEPS = (1e-2, 5e-3, 2.5e-3)
RICHARDSON_TOL = 1e-5


@dataclass(frozen=True)
class LoopExpansion:
    h0: np.ndarray
    V: DoubledOperator
    terms: tuple
    partial_sums: tuple
    target: float


@dataclass(frozen=True)
class RenormReport:
    E0: float
    E1: float
    E2: float
    e_ren_direct: float
    e_ren_identity: float
    a1: float
    L3: float
    L4: float
    loops: tuple = field(default=())
    e_weyl: float = float("nan")

    @property
    def criterion_failed(self) -> bool:
        """True when ``a1 >= 1``, so the direct quadrature is not certified."""
        return not self.a1 < 1

    @property
    def e_ren_counterterms(self) -> float:
        """``E^w - E0 - E1 - E2`` (Taylor counterterms at unit coupling)."""
        return self.e_weyl - self.E0 - self.E1 - self.E2


def _free_part(p: QuadraticProblem) -> DoubledOperator:
    if min_eigenvalue(p.h0) <= 0:
        raise HNotPositive(f"h0 is not positive (min eigenvalue {min_eigenvalue(p.h0):.6g})")
    return free_generator(p)


def potential_split(p: QuadraticProblem):
    """``(V1, V2)`` with ``V = λ V1 + λ² V2`` for ``h = h0 + λ h1``, ``g = λ g1``."""
    h0, h1, g = p.h0, p.h1, p.g1
    h0b, h1b, gb = h0.conj(), h1.conj(), g.conj()
    v1 = np.block([[h0 @ h1 + h1 @ h0, -h0 @ g + g @ h0b],
                   [gb @ h0 - h0b @ gb, h0b @ h1b + h1b @ h0b]])
    v2 = np.block([[h1 @ h1 - g @ gb, -h1 @ g + g @ h1b],
                   [gb @ h1 - h1b @ gb, h1b @ h1b - gb @ g]])
    return DoubledOperator(v1), DoubledOperator(v2)


def potential_v(B, B0) -> DoubledOperator:
    """``V = B² - B0²``."""
    b, b0 = _arr(B), _arr(B0)
    if b.shape != b0.shape:
        raise InvalidInput("B and B0 act on doubled spaces of different size")
    return DoubledOperator(b @ b - b0 @ b0)


def _free_frequencies(B0) -> np.ndarray:
    """Positive square roots of the spectrum of the Hermitian ``B0²``."""
    b0 = _arr(B0)
    sq = b0 @ b0
    w = np.linalg.eigvalsh((sq + sq.conj().T) / 2)
    if w.min() <= 0:
        raise HNotPositive("B0² is not positive; h0 must be positive")
    return np.sqrt(w)


def _tau_scale(B0) -> float:
    return float(np.exp(np.mean(np.log(_free_frequencies(B0)))))


def _integrate_pi(f, qc: QuadratureConfig, scale: float) -> float:
    # integrate_tau uses dτ/2π
    return 2 * integrate_tau(f, qc, scale=scale)


def loop_term(j: int, B0, V, qc: QuadratureConfig = DEFAULT) -> float:
    """The ``j``-vertex loop ``L_j`` by τ-quadrature (``j = 0`` is exact)."""
    if j < 0:
        raise InvalidInput("loop order must be non-negative")
    b0, v = _arr(B0), _arr(V)
    if j == 0:
        _free_frequencies(b0)
        m = b0.shape[0] // 2
        return float(np.trace(b0[:m, :m]).real / 2)
    sq = b0 @ b0
    eye = np.eye(sq.shape[0])

    def f(tau):
        vr = v @ np.linalg.inv(sq + tau**2 * eye)
        return np.trace(np.linalg.matrix_power(vr, j)).real

    return (-1) ** (j + 1) / (8 * j) * _integrate_pi(f, qc, _tau_scale(b0))


def loop_one_closed_form(p: QuadraticProblem) -> float:
    """``L_1 = ¼ Tr (h² - h0² - g ḡ) h0^{-1}``."""
    h, h0, g = p.h, p.h0, p.g
    return float(np.trace((h @ h - h0 @ h0 - g @ g.conj()) @ np.linalg.inv(h0)).real / 4)


def loop_two_spectral(B0, V) -> float:
    """``L_2`` in the eigenbasis of ``B0²``: ``-1/16 Σ |V_ab|² / (ω_a ω_b (ω_a + ω_b))``.

    Written for a general ``V`` as ``V_ab V_ba``; this evaluates the τ-integral
    in closed form and is independent of :func:`loop_term`.
    """
    b0, v = _arr(B0), _arr(V)
    sq = b0 @ b0
    w2, u = np.linalg.eigh((sq + sq.conj().T) / 2)
    w = np.sqrt(w2)
    vt = u.conj().T @ v @ u
    kernel = 1 / (np.outer(w, w) * (w[:, None] + w[None, :]))
    return float(-np.sum(vt * vt.T * kernel).real / 16)


def loop_expansion(p: QuadraticProblem, max_loop: int = 4,
                   qc: QuadratureConfig = DEFAULT) -> LoopExpansion:
    """``L_0 .. L_J`` with partial sums, compared against ``E^w``."""
    B = build_generator(p)
    B0 = _free_part(p)
    V = potential_v(B, B0)
    terms = tuple(loop_term(j, B0, V, qc) for j in range(max_loop + 1))
    return LoopExpansion(p.h0, V, terms, tuple(np.cumsum(terms).tolist()), weyl_energy(B, "fun1"))


def renormalized_energy_direct(B, B0, qc: QuadratureConfig = DEFAULT) -> float:
    """``E^w - L_0 - L_1 - L_2`` as a single τ-integral of the third-order remainder."""
    b, b0 = _arr(B), _arr(B0)
    v = b @ b - b0 @ b0
    sq0, sq = b0 @ b0, b @ b
    eye = np.eye(sq.shape[0])

    def f(tau):
        r0 = np.linalg.inv(sq0 + tau**2 * eye)
        vr = v @ r0
        full = np.linalg.solve(sq + tau**2 * eye, vr @ vr)
        return tau**2 * np.trace(r0 @ v @ full).real

    return _integrate_pi(f, qc, _tau_scale(b0)) / 4


def _weyl_at(p: QuadraticProblem, mu: float) -> float:
    h = p.h0 + mu * p.h1
    b = DoubledOperator.from_blocks(h, -mu * p.g1, mu * p.g1.conj(), -h.conj(), kind="generator")
    return weyl_energy(b, "funct")


def counterterms(p: QuadraticProblem, qc: QuadratureConfig = DEFAULT,
                 steps=RICHARDSON_STEPS, tol: float = RICHARDSON_TOL):
    """``(E0, E1, E2)``: Taylor coefficients of the Weyl energy in the coupling.

    The family is ``h0 + μ h1``, ``μ g1``; ``E1`` and ``E2`` are scaled back to
    the problem's coupling ``λ`` so that ``E^w ≈ E0 + E1 + E2 + O(λ³)``.
    Derivatives at ``μ = 0`` come from central differences on the given steps,
    combined by Richardson extrapolation.  Raises
    :class:`DifferentiationUnstable` if the last two extrapolation levels
    disagree by more than ``tol`` (relative to the size of the coefficient,
    floored at one).
    """
    _free_part(p)
    e0 = _weyl_at(p, 0.0)
    first, second = [], []
    for d in steps:
        ep, em = _weyl_at(p, d), _weyl_at(p, -d)
        first.append((ep - em) / (2 * d))
        second.append((ep - 2 * e0 + em) / (2 * d * d))
    coeffs = []
    for col in (first, second):
        table = [list(col)]
        for k in range(1, len(col)):
            prev = table[-1]
            ratio = (steps[k - 1] / steps[k]) ** (2 * k)
            table.append([(ratio * prev[i + 1] - prev[i]) / (ratio - 1) for i in range(len(prev) - 1)])
        best = table[-1][0]
        spread = abs(best - table[-2][-1]) if len(table) > 1 else 0.0
        if spread > tol * max(1.0, abs(best)):
            raise DifferentiationUnstable(
                f"Richardson levels disagree by {spread:.3e} (tolerance {tol:.1e})")
        coeffs.append(best)
    lam = p.coupling
    return float(np.trace(p.h0).real / 2), lam * coeffs[0], lam * lam * coeffs[1]


def e_ren(p: QuadraticProblem, qc: QuadratureConfig = DEFAULT, with_counterterms: bool = True) -> RenormReport:
    """Renormalized vacuum energy by the direct integral and by subtraction."""
    B = build_generator(p)
    B0 = _free_part(p)
    V = potential_v(B, B0)
    b0_inv = np.linalg.inv(B0.data)
    a1 = float(np.linalg.norm(b0_inv @ V.data @ b0_inv, 2))
    loops = tuple(loop_term(j, B0, V, qc) for j in range(5))
    ew = weyl_energy(B, "fun1")
    direct = renormalized_energy_direct(B, B0, qc)
    identity = ew - sum(loops[:3])
    if with_counterterms:
        e0, e1, e2 = counterterms(p, qc)
    else:
        e0, e1, e2 = loops[0], float("nan"), float("nan")
    return RenormReport(e0, e1, e2, direct, identity, a1, loops[3], loops[4], loops, ew)


def merits_family(h0, h1) -> QuadraticProblem:
    """The problem ``h = h0 + h1``, ``g = h1`` for real symmetric ``h1``.

    Such a pairing satisfies ``h1² = g ḡ`` and ``h1 g = g h̄1``, which makes
    the second-order part of ``V`` vanish.
    """
    h0 = np.atleast_2d(np.asarray(h0, dtype=complex))
    h1 = np.atleast_2d(np.asarray(h1, dtype=complex))
    scale = max(1.0, float(np.linalg.norm(h1, 2)))
    if np.abs(h1.imag).max() > 1e-12 * scale or np.linalg.norm(h1 - h1.T, 2) > 1e-12 * scale:
        raise InvalidInput("h1 must be real symmetric")
    h1 = h1.real.astype(complex)
    g = h1.copy()
    if (np.linalg.norm(h1 @ h1 - g @ g.conj(), 2) > 1e-12 * scale**2
            or np.linalg.norm(h1 @ g - g @ h1.conj(), 2) > 1e-12 * scale**2):
        raise InvalidInput("h1 and g = h1 do not satisfy the vanishing second-order conditions")
    return QuadraticProblem(h0 + h1, g, h0=h0)


def _kappa_samples(kappa, x: np.ndarray) -> np.ndarray:
    if callable(kappa):
        vals = np.asarray(kappa(x), dtype=complex)
    else:
        vals = np.asarray(kappa, dtype=complex)
    if vals.shape != x.shape:
        raise InvalidInput(f"kappa must provide {x.size} grid values, got shape {vals.shape}")
    return vals


def scalar_field_instance(K: int, box_length: float, mass: float,
                          kappa: Union[Callable, np.ndarray],
                          grid_points: Optional[int] = None) -> QuadraticProblem:
    """Mass-perturbed neutral scalar field on a periodic box, cut off at ``|n| <= K``.

    Modes are ``k_n = 2πn / box_length`` for ``n = -K..K`` with
    ``ω_n = sqrt(k_n² + mass²)``.  The perturbation ``κ`` is sampled on the
    symmetric grid ``x_j = j·box_length/G``, ``j = -(G-1)/2 .. (G-1)/2``, and
    enters through its Fourier coefficients
    ``κ̂(q) = G^{-1} Σ_j κ(x_j) e^{-i q x_j}``:

        h0 = diag(ω_n),  h1 = κ̂(k_n - k_n') / (2 sqrt(ω_n ω_n')),
        g  = κ̂(k_n + k_n') / (2 sqrt(ω_n ω_n')).

    ``kappa`` is a callable or an array of ``G`` samples; ``G`` must be odd and
    at least ``4K + 1`` so that every needed Fourier coefficient is resolved.
    """
    if K < 0:
        raise InvalidInput("K must be non-negative")
    if not (mass > 0 and box_length > 0):
        raise InvalidInput("mass and box_length must be positive")
    if grid_points is None:
        grid_points = len(kappa) if not callable(kappa) else max(4 * K + 1, 1025)
    G = int(grid_points)
    if G % 2 == 0 or G < 4 * K + 1:
        raise InvalidInput(f"grid_points must be odd and >= 4K+1 = {4 * K + 1}, got {G}")
    half = (G - 1) // 2
    x = np.arange(-half, half + 1) * box_length / G
    vals = _kappa_samples(kappa, x)
    scale = max(1.0, float(np.abs(vals).max()))
    if np.abs(vals.imag).max() > 1e-12 * scale:
        raise InvalidInput("kappa must be real")
    vals = vals.real
    if np.abs(vals - vals[::-1]).max() > 1e-12 * scale:
        raise InvalidInput("kappa must be even")
    if np.abs(vals).max() >= mass**2:
        raise InvalidInput("need sup|kappa| < mass**2 to keep the problem diagonalizable")

    n = np.arange(-K, K + 1)
    k = 2 * np.pi * n / box_length
    omega = np.sqrt(k**2 + mass**2)
    # κ̂ at integer multiples of 2π/L, indexed by the mode-number difference/sum
    q_index = np.arange(-2 * K, 2 * K + 1)
    phase = np.exp(-2j * np.pi * np.outer(q_index, np.arange(-half, half + 1)) / G)
    khat = (phase @ vals).real / G
    norm = 2 * np.sqrt(np.outer(omega, omega))
    diff = n[:, None] - n[None, :] + 2 * K
    summ = n[:, None] + n[None, :] + 2 * K
    h0 = np.diag(omega)
    h1 = khat[diff] / norm
    g = khat[summ] / norm
    return QuadraticProblem(h0 + h1, g, h0=h0)


def gaussian_kappa(amplitude: float, width: float) -> Callable:
    """``x -> amplitude · exp(-x² / (2 width²))``."""
    return lambda x: amplitude * np.exp(-np.asarray(x) ** 2 / (2 * width**2))
