"""Truncated bosonic Fock space: the independent oracle.

The basis holds all occupations ``(n_1, ..., n_m)`` with at most ``cutoff``
quanta, ordered by total quanta and then lexicographically, so the vacuum is
at position 0.  Creation out of the top sector maps to zero.  Normally
ordered products of truncated ladder operators are therefore exact
compressions of the untruncated ones.

Modes are indexed from 0.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp
from scipy import linalg
from scipy.sparse import linalg as splinalg

from ._backend import kernels
from .algebra import QuadraticProblem, _arr, d_operators, hermitian_power
from .errors import EigensolverNotConverged, InvalidInput, SizeLimit

SIZE_CAP = 2_000_000
DENSE_LIMIT = 2000


class TruncationWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class FockBasis:
    m: int
    cutoff: int
    states: np.ndarray

    @property
    def size(self) -> int:
        return self.states.shape[0]

    @property
    def quanta(self) -> np.ndarray:
        return self.states.sum(axis=1)

    def index(self, occupation) -> int:
        occ = np.ascontiguousarray(np.atleast_2d(occupation), dtype=np.int64)
        if occ.shape != (1, self.m) or occ.min() < 0 or occ.sum() > self.cutoff:
            raise InvalidInput(f"occupation {occupation!r} is not in the basis")
        return int(kernels.rank_states(occ, self.cutoff)[0])

    def window(self, max_quanta: int) -> np.ndarray:
        """Positions of the states with at most ``max_quanta`` quanta."""
        return np.flatnonzero(self.quanta <= max_quanta)

    def vacuum(self) -> "StateVector":
        amp = np.zeros(self.size, dtype=complex)
        amp[0] = 1
        return StateVector(self, amp)


@dataclass(frozen=True, eq=False)
class FockOperator:
    basis: FockBasis
    matrix: sp.csr_matrix

    def __post_init__(self):
        n = self.basis.size
        if self.matrix.shape != (n, n):
            raise InvalidInput(f"operator shape {self.matrix.shape} does not match basis size {n}")

    def __matmul__(self, other):
        if isinstance(other, FockOperator):
            return FockOperator(self.basis, (self.matrix @ other.matrix).tocsr())
        if isinstance(other, StateVector):
            return self.matrix @ other.amplitudes
        return self.matrix @ other

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def hermiticity_residual(self) -> float:
        d = self.matrix - self.matrix.conj().T
        return float(abs(d).max()) if d.nnz else 0.0


@dataclass(frozen=True, eq=False)
class StateVector:
    basis: FockBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != (self.basis.size,):
            raise InvalidInput("amplitude vector does not match the basis")
        nrm = np.linalg.norm(amp)
        if nrm == 0:
            raise InvalidInput("state vector is zero")
        object.__setattr__(self, "amplitudes", amp / nrm)

    def expectation(self, op: FockOperator) -> complex:
        return complex(np.vdot(self.amplitudes, op.matrix @ self.amplitudes))


def build_basis(m: int, cutoff: int, size_cap: int = SIZE_CAP) -> FockBasis:
    if m < 1 or cutoff < 0:
        raise InvalidInput("need m >= 1 and cutoff >= 0")
    size = math.comb(m + cutoff, m)
    if size > size_cap:
        raise SizeLimit(f"basis with m={m}, cutoff={cutoff} has {size} states (cap {size_cap})")
    states = kernels.enumerate_states(m, cutoff)
    states.setflags(write=False)
    return FockBasis(m, cutoff, states)


def _coo(basis, triple):
    rows, cols, vals = triple
    n = basis.size
    return sp.coo_matrix((vals, (rows, cols)), shape=(n, n), dtype=complex).tocsr()


def creation(i: int, basis: FockBasis) -> FockOperator:
    if not 0 <= i < basis.m:
        raise InvalidInput(f"mode {i} out of range")
    return FockOperator(basis, _coo(basis, kernels.ladder_coo(basis.states, basis.cutoff, i, True)))


def annihilation(i: int, basis: FockBasis) -> FockOperator:
    if not 0 <= i < basis.m:
        raise InvalidInput(f"mode {i} out of range")
    return FockOperator(basis, _coo(basis, kernels.ladder_coo(basis.states, basis.cutoff, i, False)))


def _quadratic(basis, h, g) -> sp.csr_matrix:
    h = np.asarray(h, dtype=complex)
    g = np.asarray(g, dtype=complex)
    if h.shape != (basis.m, basis.m) or g.shape != (basis.m, basis.m):
        raise InvalidInput("coefficient matrices do not match the mode count")
    return _coo(basis, kernels.quadratic_coo(basis.states, basis.cutoff, h, g))


def d_gamma(h, basis: FockBasis) -> FockOperator:
    """Second quantization ``dΓ(h) = Σ h_ij a_i* a_j``."""
    return FockOperator(basis, _quadratic(basis, h, np.zeros((basis.m, basis.m))))


def pair_creation(g, basis: FockBasis) -> FockOperator:
    """``a*(g) = Σ g_ij a_i* a_j*`` for symmetric ``g``."""
    mat = _quadratic(basis, np.zeros((basis.m, basis.m)), 2 * np.asarray(g, dtype=complex)).tocoo()
    q = basis.quanta
    keep = q[mat.row] > q[mat.col]
    n = basis.size
    return FockOperator(basis, sp.csr_matrix((mat.data[keep], (mat.row[keep], mat.col[keep])),
                                             shape=(n, n)))


def pair_annihilation(g, basis: FockBasis) -> FockOperator:
    """``a(g) = Σ ḡ_ij a_i a_j``, the adjoint of :func:`pair_creation`."""
    return FockOperator(basis, pair_creation(g, basis).matrix.conj().T.tocsr())


def field_operator(w, basis: FockBasis, create: bool) -> FockOperator:
    """``a*(w) = Σ w_i a_i*`` or ``a(w) = Σ w̄_i a_i``."""
    w = np.asarray(w, dtype=complex)
    mat = sp.csr_matrix((basis.size, basis.size), dtype=complex)
    for i in range(basis.m):
        if w[i] != 0:
            op = creation(i, basis) if create else annihilation(i, basis)
            mat = mat + (w[i] if create else np.conj(w[i])) * op.matrix
    return FockOperator(basis, mat.tocsr())


def quadratic_hamiltonian(p: QuadraticProblem, basis: FockBasis, ordering: str = "normal") -> FockOperator:
    """``dΓ(h) + ½ a*(g) + ½ a(g)``, plus ``½ Tr h`` for Weyl ordering."""
    if basis.m != p.m:
        raise InvalidInput("basis and problem have different mode counts")
    mat = _quadratic(basis, p.h, p.g)
    if ordering == "weyl":
        mat = mat + (np.trace(p.h).real / 2) * sp.identity(basis.size, format="csr")
    elif ordering != "normal":
        raise InvalidInput(f"ordering must be 'normal' or 'weyl', got {ordering!r}")
    return FockOperator(basis, mat.tocsr())


def _gershgorin(mat: sp.csr_matrix):
    diag = mat.diagonal().real
    radius = np.asarray(abs(mat).sum(axis=1)).ravel() - np.abs(diag)
    return float((diag - radius).min()), float((diag + radius).max())


def lowest_eigenpairs(H: FockOperator, k: int = 1, tol: float = 1e-9):
    """The ``k`` smallest eigenvalues and eigenvectors of a Hermitian operator."""
    n = H.basis.size
    k = min(k, n)
    if n <= DENSE_LIMIT:
        w, v = linalg.eigh(H.dense(), subset_by_index=[0, k - 1])
    else:
        lo, hi = _gershgorin(H.matrix)
        shifted = (H.matrix - lo * sp.identity(n, format="csr")).tocsr()
        try:
            w, v = splinalg.eigsh(shifted, k=k, which="SA", tol=1e-13, maxiter=20 * n)
        except splinalg.ArpackNoConvergence as exc:
            raise EigensolverNotConverged(str(exc)) from exc
        order = np.argsort(w)
        w, v = w[order] + lo, v[:, order]
    scale = max(1.0, float(abs(H.matrix).sum(axis=1).max()))
    res = np.linalg.norm(H.matrix @ v - v * w, axis=0).max()
    if res > tol * scale:
        raise EigensolverNotConverged(f"eigenpair residual {res:.3e} exceeds {tol:.1e}·||H||")
    return w, v


def ground_energy(H: FockOperator):
    """``(E, Ψ)`` with ``E`` the smallest eigenvalue of ``H``."""
    w, v = lowest_eigenpairs(H, 1)
    return float(w[0]), StateVector(H.basis, v[:, 0])


def oracle_ground_energy(p: QuadraticProblem, tol: float = 1e-4, ordering: str = "normal",
                         start: int = 16, max_cutoff: int = 256, size_cap: int = 400_000):
    """Ground energy with the cutoff doubled until it is stable to ``tol / 10``.

    Returns ``(energy, cutoff)``.
    """
    cutoff = start
    prev = ground_energy(quadratic_hamiltonian(p, build_basis(p.m, cutoff), ordering))[0]
    while True:
        nxt = 2 * cutoff
        if nxt > max_cutoff or math.comb(p.m + nxt, p.m) > size_cap:
            raise SizeLimit(f"oracle did not stabilize below cutoff {cutoff}")
        cur = ground_energy(quadratic_hamiltonian(p, build_basis(p.m, nxt), ordering))[0]
        cutoff = nxt
        if abs(cur - prev) < 0.1 * tol:
            return cur, cutoff
        prev = cur


def coherent_state(w, basis: FockBasis) -> StateVector:
    """``exp(a*(w) - a(w)) Ω``, renormalized on the truncated space."""
    w = np.asarray(w, dtype=complex)
    if w.shape != (basis.m,):
        raise InvalidInput("w must have one entry per mode")
    if np.vdot(w, w).real > basis.cutoff / 4:
        warnings.warn("|w|^2 > cutoff/4: truncation error is significant", TruncationWarning,
                      stacklevel=2)
    gen = (field_operator(w, basis, True).matrix - field_operator(w, basis, False).matrix).tocsc()
    vac = basis.vacuum().amplitudes
    return StateVector(basis, splinalg.expm_multiply(gen, vac))


def _nilpotent_expm(X: sp.csr_matrix, n: int) -> sp.csr_matrix:
    """``exp(X)`` for a nilpotent ``X`` by the terminating Taylor series."""
    result = sp.identity(n, dtype=complex, format="csr")
    term = sp.identity(n, dtype=complex, format="csr")
    for k in range(1, n + 1):
        term = (term @ X) / k
        term.eliminate_zeros()
        if term.nnz == 0:
            break
        result = result + term
    return result.tocsr()


def second_quantize(c, basis: FockBasis) -> FockOperator:
    """The multiplicative second quantization ``Γ(c)``, acting as ``c ⊗ ... ⊗ c``."""
    c = np.asarray(c, dtype=complex)
    if np.allclose(c, np.diag(np.diag(c)), atol=0, rtol=0):
        vals = np.prod(np.diag(c)[None, :] ** basis.states, axis=1)
        return FockOperator(basis, sp.diags(vals, format="csr"))
    gen = d_gamma(linalg.logm(c), basis).matrix.tocsc()
    return FockOperator(basis, sp.csr_matrix(splinalg.expm(gen)))


def natural_implementer(R, basis: FockBasis) -> FockOperator:
    """``|det pp*|^{-1/4} exp(-½ a*(d2)) Γ((p*)^{-1}) exp(½ a(d1))``."""
    r = _arr(R)
    m = r.shape[0] // 2
    if m != basis.m:
        raise InvalidInput("basis and symplectic map have different mode counts")
    p = r[:m, :m]
    d1, d2 = d_operators(r)
    n = basis.size
    raise_part = _nilpotent_expm(-0.5 * pair_creation(d2, basis).matrix, n)
    lower_part = _nilpotent_expm(0.5 * pair_annihilation(d1, basis).matrix, n)
    middle = second_quantize(np.linalg.inv(p.conj().T), basis).matrix
    pref = abs(np.linalg.det(p @ p.conj().T)) ** -0.25
    return FockOperator(basis, (pref * (raise_part @ middle @ lower_part)).tocsr())


def _window_cols(basis, window):
    return basis.window(basis.cutoff // 2 if window is None else window)


def implementation_residual(R, basis: FockBasis, U: FockOperator = None, window: int = None) -> float:
    """How far ``U`` is from implementing ``R`` on states with few quanta.

    Checks ``U a_i = Σ_j (q_ji a_j* + p̄_ji a_j) U`` and
    ``U a_i* = Σ_j (p_ji a_j* + q̄_ji a_j) U`` compressed to the window
    (default ``cutoff // 2`` quanta) and returns the largest operator-norm
    residual.  The truncated implementer is the compression of the exact one,
    so the only error left is roundoff; leakage of ``U`` past the cutoff does
    not enter.
    """
    r = _arr(R)
    m = r.shape[0] // 2
    p, q = r[:m, :m], r[:m, m:]
    U = natural_implementer(r, basis) if U is None else U
    cols = _window_cols(basis, window)
    a = [annihilation(i, basis).matrix for i in range(m)]
    ad = [creation(i, basis).matrix for i in range(m)]
    u = U.matrix
    worst = 0.0
    for i in range(m):
        rhs_a = sum(q[j, i] * ad[j] + np.conj(p[j, i]) * a[j] for j in range(m))
        rhs_ad = sum(p[j, i] * ad[j] + np.conj(q[j, i]) * a[j] for j in range(m))
        for lhs, rhs in ((u @ a[i], rhs_a @ u), (u @ ad[i], rhs_ad @ u)):
            diff = (lhs - rhs)[cols][:, cols].toarray()
            worst = max(worst, float(np.linalg.norm(diff, 2)))
    return worst


def vacuum_overlap(R, basis: FockBasis):
    """``(<Ω|U_R Ω>, det(1 - d2* d2)^{1/4})``; equal for the natural implementer."""
    r = _arr(R)
    U = natural_implementer(r, basis)
    _, d2 = d_operators(r)
    m = d2.shape[0]
    expected = np.linalg.det(np.eye(m) - d2.conj().T @ d2).real ** 0.25
    return complex(U.matrix[0, 0]), float(expected)


def implementer_group_check(R1, R2, basis: FockBasis, window: int = None, headroom: int = None):
    """Compare ``U_{R1 R2}`` with ``U_{R1} U_{R2}`` up to a phase on the window.

    Both sides are compressed to the window.  The product is formed on a basis
    with ``headroom`` extra quanta (default: the window size) so that
    intermediate states just above the cutoff are not dropped.
    Returns ``(phase, residual)`` with the phase minimizing the residual.
    """
    r1, r2 = _arr(R1), _arr(R2)
    w = basis.cutoff // 2 if window is None else window
    extra = w if headroom is None else headroom
    big = build_basis(basis.m, basis.cutoff + extra) if extra > 0 else basis
    # graded ordering is nested, so window positions agree in both bases
    cols = big.window(w)
    u12 = natural_implementer(r1 @ r2, big).matrix[cols][:, cols].toarray()
    prod = natural_implementer(r1, big).matrix @ natural_implementer(r2, big).matrix
    prod = prod[cols][:, cols].toarray()
    overlap = np.vdot(prod, u12)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0 + 0j
    return complex(phase), float(np.linalg.norm(u12 - phase * prod, 2))


def reduced_density_and_pairing(psi: StateVector):
    """One-body density ``γ_ij = <a_j* a_i>`` and pairing ``α_ij = <a_i a_j>``."""
    basis = psi.basis
    v = psi.amplitudes
    av = [annihilation(i, basis).matrix @ v for i in range(basis.m)]
    m = basis.m
    gamma = np.array([[np.vdot(av[j], av[i]) for j in range(m)] for i in range(m)])
    alpha = np.array([[np.vdot(v, annihilation(i, basis).matrix @ av[j]) for j in range(m)]
                      for i in range(m)])
    return gamma, alpha


def pairing_positivity_margin(gamma, alpha) -> float:
    """Smallest eigenvalue of ``[[γ, α], [ᾱ, 1 + γ̄]]``; never negative for a state."""
    m = gamma.shape[0]
    block = np.block([[gamma, alpha], [alpha.conj(), np.eye(m) + gamma.conj()]])
    return float(np.linalg.eigvalsh((block + block.conj().T) / 2)[0])


class EstimateReport(NamedTuple):
    ntau_margins: np.ndarray
    iuy_margin: float
    pairing_margin: float
    c: float


def ntau_and_iuy_checks(p: QuadraticProblem, psi: StateVector, ws=None, seed: int = 0) -> EstimateReport:
    """Margins of the N_τ estimate, the pairing estimate and pairing positivity.

    N_τ: ``||a(w)Ψ||² <= (w|h^{-1}w) <Ψ|dΓ(h)Ψ>`` for each ``w`` in ``ws``.
    Pairing: ``|<Ψ|a*(g)Ψ>| <= c <Ψ|dΓ(h)Ψ> + Tr(g* h^{-1} g) / (2c)`` with
    ``c = max(a, 0.1)``.
    """
    from .diagonalize import relative_bound_a

    basis = psi.basis
    a = relative_bound_a(p)
    c = max(a, 0.1)
    if ws is None:
        rng = np.random.default_rng(seed)
        ws = rng.normal(size=(8, p.m)) + 1j * rng.normal(size=(8, p.m))
    hinv = hermitian_power(p.h, -1.0)
    energy = psi.expectation(d_gamma(p.h, basis)).real
    margins = []
    for w in np.atleast_2d(ws):
        lhs = np.linalg.norm(field_operator(w, basis, False) @ psi) ** 2
        margins.append((np.vdot(w, hinv @ w).real * energy) - lhs)
    pair = abs(psi.expectation(pair_creation(p.g, basis)))
    bound = c * energy + np.trace(p.g.conj().T @ hinv @ p.g).real / (2 * c)
    gamma, alpha = reduced_density_and_pairing(psi)
    return EstimateReport(np.array(margins), float(bound - pair),
                          pairing_positivity_margin(gamma, alpha), c)
