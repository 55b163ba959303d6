"""Random generators shared by the property tests."""

from modalqt.field import FieldSpec
from modalqt.linalg import Matrix, invert
from modalqt.states import Ket, Measurement, StateSpace, Subspace


def random_nonzero(rng, p, n):
    while True:
        v = rng.integers(0, p, size=n)
        if v.any():
            return v


def random_ket(rng, field, *dims):
    space = StateSpace.composite(field, *dims)
    return Ket(random_nonzero(rng, field.p, space.dim), space)


def random_invertible(rng, field, d):
    while True:
        m = Matrix(rng.integers(0, field.p, size=(d, d)), field)
        if invert(m) is not None:
            return m


def random_maximal_state(rng, field, d):
    coeff = random_invertible(rng, field, d)
    return Ket(coeff.data.reshape(-1), StateSpace.composite(field, d, d))


def random_basis_measurement(rng, field, d, label):
    """A random basis of the dual space, grouped into a random number of outcomes."""
    basis = random_invertible(rng, field, d).data
    space = StateSpace(d, field)
    n_out = int(rng.integers(1, d + 1))
    groups = [[k] for k in range(n_out)]
    for k in range(n_out, d):
        groups[int(rng.integers(0, n_out))].append(k)
    return Measurement(tuple(Subspace(space, basis[g], dual=True) for g in groups), label)


def random_subspace(rng, space, k, dual=False):
    while True:
        s = Subspace(space, rng.integers(0, space.p, size=(k, space.dim)), dual)
        if s.dim == k:
            return s


FIELDS = {p: FieldSpec(p) for p in (2, 3, 5)}
