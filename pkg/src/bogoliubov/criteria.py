"""Finite-dimensional magnitudes behind the existence criteria for quantizations.

At finite dimension every criterion holds trivially, so the report records
the norms and traces whose growth with the cutoff decides the infinite
dimensional question.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, linalg

from .algebra import QuadraticProblem, build_generator, hermitian_power, min_eigenvalue
from .diagonalize import relative_bound_a
from .errors import HNotPositive, InvalidInput
from .quadrature import DEFAULT, QuadratureConfig

GAMMA_METHODS = ("sylvester", "integral")


@dataclass(frozen=True)
class CriteriaReport:
    g_hs: float
    g_tr: float
    gamma_hs: float
    a: float
    hs_weighted: float
    tr_weighted: float
    th2_flags: tuple
    th5_flags: tuple
    th3_flag: bool
    h_trace_norm: float
    pio: tuple
    s_minus: float
    s_plus: float
    split_diagnostic: float
    fractional_traces: tuple

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def _require_h_positive(h):
    lo = min_eigenvalue(h)
    if lo <= 0:
        raise HNotPositive(f"h is not positive (min eigenvalue {lo:.6g})")


def gamma_of_g(h, g, method: str = "sylvester", abs_tol: float = 1e-12) -> np.ndarray:
    """Solve ``h γ + γ h̄ = g``.

    ``sylvester`` uses a direct two-sided solve; ``integral`` evaluates
    ``∫_0^∞ e^{-th} g e^{-th̄} dt`` by adaptive vector quadrature.
    """
    h = np.atleast_2d(np.asarray(h, dtype=complex))
    g = np.atleast_2d(np.asarray(g, dtype=complex))
    _require_h_positive(h)
    if method == "sylvester":
        return linalg.solve_sylvester(h, h.conj(), g)
    if method != "integral":
        raise InvalidInput(f"unknown method {method!r}; expected one of {GAMMA_METHODS}")
    w, u = np.linalg.eigh(h)
    gt = u.conj().T @ g @ u.conj()

    def f(t):
        e = np.exp(-t * w)
        return (e[:, None] * gt * e[None, :]).ravel()

    val, _ = integrate.quad_vec(f, 0, np.inf, epsabs=abs_tol, epsrel=1e-12)
    return u @ val.reshape(gt.shape) @ u.T


def f_of_t(h, g, t: float) -> np.ndarray:
    """``∫_0^t e^{ish} g e^{ish̄} ds``.

    Closed form ``-i e^{ith} γ e^{ith̄} + i γ`` when ``h > 0``; direct
    quadrature otherwise.
    """
    h = np.atleast_2d(np.asarray(h, dtype=complex))
    g = np.atleast_2d(np.asarray(g, dtype=complex))
    if min_eigenvalue(h) > 0:
        gam = gamma_of_g(h, g)
        return -1j * linalg.expm(1j * t * h) @ gam @ linalg.expm(1j * t * h.conj()) + 1j * gam

    def f(s):
        return (linalg.expm(1j * s * h) @ g @ linalg.expm(1j * s * h.conj())).ravel()

    val, _ = integrate.quad_vec(f, 0, t, epsabs=1e-12, epsrel=1e-12)
    return val.reshape(g.shape)


def flow_blocks(p: QuadraticProblem, t: float) -> dict:
    """Blocks of ``e^{itB}`` and the quantities built from them.

    Returns ``p_t``, ``q_t``, ``d2_t = q_t p̄_t^{-1}`` and ``det(p_t* e^{ith})``.
    """
    B = build_generator(p)
    m = B.m
    r = linalg.expm(1j * t * B.data)
    pt, qt = r[:m, :m], r[:m, m:]
    d2 = qt @ np.linalg.inv(pt.conj())
    det = complex(np.linalg.det(pt.conj().T @ linalg.expm(1j * t * p.h)))
    return {"p": pt, "q": qt, "d2": d2, "det": det}


def fractional_trace(h, g, s: float) -> float:
    """``Tr g h̄^{-s} g* h^{-s}``."""
    g = np.atleast_2d(np.asarray(g, dtype=complex))
    hs = hermitian_power(np.atleast_2d(np.asarray(h, dtype=complex)), -s)
    return float(np.trace(g @ hs.conj() @ g.conj().T @ hs).real)


def criteria_report(p: QuadraticProblem, s_minus: float = 0.25, s_plus: float = 0.75,
                    qc: QuadratureConfig = DEFAULT, with_loops: bool = True) -> CriteriaReport:
    """Every magnitude entering the existence criteria, with finiteness flags."""
    if not 0 < s_minus < 0.5 < s_plus:
        raise InvalidInput("need 0 < s_minus < 1/2 < s_plus")
    h, g = p.h, p.g
    _require_h_positive(h)
    sv = np.linalg.svd(g, compute_uv=False)
    g_hs = float(np.sqrt(np.sum(sv**2)))
    g_tr = float(np.sum(sv))
    gamma_hs = float(np.linalg.norm(gamma_of_g(h, g), "fro"))
    hi = hermitian_power(h, -0.5)
    hs_weighted = float(np.linalg.norm(hi @ g @ hi.conj(), "fro"))
    tr_weighted = float(np.trace(g.conj().T @ np.linalg.inv(h) @ g).real)
    traces = (fractional_trace(h, g, s_minus), fractional_trace(h, g, s_plus))
    split = min(g_hs, gamma_hs)
    h_tr = float(np.sum(np.abs(np.linalg.eigvalsh(h))))
    fin = np.isfinite
    th2 = (bool(fin(split)), bool(fin(g_hs)), bool(fin(h_tr) and fin(g_hs)))
    th5 = (bool(fin(g_tr)), bool(all(fin(x) for x in traces)), bool(fin(tr_weighted)))
    if with_loops:
        from .renorm import e_ren
        rr = e_ren(p, qc, with_counterterms=False)
        pio = (rr.a1, rr.L3, rr.L4)
    else:
        pio = (float("nan"),) * 3
    return CriteriaReport(g_hs, g_tr, gamma_hs, relative_bound_a(p), hs_weighted, tr_weighted,
                          th2, th5, bool(fin(h_tr)), h_tr, pio, s_minus, s_plus, split, traces)
