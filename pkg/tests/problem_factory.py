"""Random quadratic problems with controlled relative bound ``a``."""
import numpy as np

from bogoliubov.algebra import QuadraticProblem, hermitian_power


def random_hermitian_positive(rng, m, floor=0.2):
    x = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    return x @ x.conj().T / m + floor * np.eye(m)


def random_symmetric(rng, m):
    z = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    return z + z.T


def pairing_with_bound(rng, h, a):
    """A symmetric ``g`` with ``||h^{-1/2} g h̄^{-1/2}|| = a`` exactly."""
    g = random_symmetric(rng, h.shape[0])
    hh = hermitian_power(h, -0.5)
    return g * a / np.linalg.norm(hh @ g @ hh.conj(), 2)


def random_problem(rng, m, a_max=0.8, floor=0.2):
    h = random_hermitian_positive(rng, m, floor)
    return QuadraticProblem(h, pairing_with_bound(rng, h, a_max * rng.uniform(0.05, 1.0)))


def random_perturbed_problem(rng, m, size=0.1):
    """``h = h0 + h1`` with separate free part, for the loop expansion."""
    h0 = random_hermitian_positive(rng, m, floor=1.0)
    y = rng.normal(size=(m, m)) + 1j * rng.normal(size=(m, m))
    h1 = size * (y + y.conj().T)
    return QuadraticProblem(h0 + h1, size * random_symmetric(rng, m), h0=h0)


def single_mode(gamma=0.6, omega=1.0):
    return QuadraticProblem([[omega]], [[gamma]])
