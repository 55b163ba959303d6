"""States, effects and measurements of modal quantum theory over Z_p.

Mixed states are subspaces of the state space; generalized effects are
subspaces of the dual space. Both are held by :class:`Subspace`, with a
``dual`` flag telling them apart.
"""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .field import FieldSpec
from .linalg import Matrix, extend_to_basis, invert, kernel, kron, matmul_mod, rank, row_space, solve

DEFAULT_BUDGET = 2_000_000


class BudgetExceeded(RuntimeError):
    """An exhaustive search would exceed its configured size limit."""


@dataclass(frozen=True)
class StateSpace:
    dim: int
    field: FieldSpec
    factor_dims: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("state space dimension must be at least 1")
        if self.factor_dims is not None:
            dims = tuple(int(d) for d in self.factor_dims)
            if math.prod(dims) != self.dim:
                raise ValueError(f"factor dims {dims} do not multiply to {self.dim}")
            object.__setattr__(self, "factor_dims", dims if len(dims) > 1 else None)

    @classmethod
    def composite(cls, field: FieldSpec | int, *dims: int) -> StateSpace:
        field = field if isinstance(field, FieldSpec) else FieldSpec(field)
        return cls(math.prod(dims), field, tuple(dims))

    @property
    def p(self) -> int:
        return self.field.p

    @property
    def factors(self) -> tuple[int, ...]:
        return self.factor_dims or (self.dim,)

    def factor(self, k: int) -> StateSpace:
        return StateSpace(self.factors[k], self.field)

    def without(self, k: int) -> StateSpace:
        rest = tuple(d for i, d in enumerate(self.factors) if i != k)
        if not rest:
            raise ValueError("cannot remove the only factor of a space")
        return StateSpace(math.prod(rest), self.field, rest)

    def ket(self, coords: Sequence[int]) -> Ket:
        return Ket(coords, self)

    def bra(self, coords: Sequence[int]) -> Bra:
        return Bra(coords, self)

    def basis_ket(self, i: int) -> Ket:
        v = [0] * self.dim
        v[i] = 1
        return Ket(v, self)

    def full(self, dual: bool = False) -> Subspace:
        return Subspace(self, Matrix.identity(self.dim, self.field), dual)

    def null(self, dual: bool = False) -> Subspace:
        return Subspace(self, np.zeros((0, self.dim), dtype=np.int64), dual)


class _Vector:
    dual = False
    __slots__ = ("coords", "space")

    def __init__(self, coords: Sequence[int], space: StateSpace):
        coords = tuple(int(c) % space.p for c in coords)
        if len(coords) != space.dim:
            raise ValueError(f"vector of length {len(coords)} does not live in dimension {space.dim}")
        self.coords = coords
        self.space = space

    def __eq__(self, other):
        return type(self) is type(other) and self.coords == other.coords and self.space == other.space

    def __hash__(self):
        return hash((type(self).__name__, self.coords, self.space))

    def __repr__(self):
        return f"{type(self).__name__}({list(self.coords)}, Z{self.space.p})"

    def is_zero(self) -> bool:
        return not any(self.coords)

    def array(self) -> np.ndarray:
        return np.array(self.coords, dtype=np.int64)

    def __add__(self, other):
        self._compatible(other)
        return type(self)([a + b for a, b in zip(self.coords, other.coords)], self.space)

    def __sub__(self, other):
        self._compatible(other)
        return type(self)([a - b for a, b in zip(self.coords, other.coords)], self.space)

    def scale(self, c: int):
        return type(self)([int(c) * a for a in self.coords], self.space)

    def _compatible(self, other):
        if type(self) is not type(other) or self.space != other.space:
            raise ValueError("vectors live in different spaces")

    def projective(self):
        """Canonical scalar multiple: first nonzero coordinate equal to 1."""
        for c in self.coords:
            if c:
                return self.scale(self.space.field.inv(c))
        return self

    def span(self) -> Subspace:
        return span([self])


class Ket(_Vector):
    """A state vector (column)."""

    __slots__ = ()
    dual = False


class Bra(_Vector):
    """A dual vector (row), i.e. a basic effect."""

    __slots__ = ()
    dual = True

    def pair(self, ket: Ket) -> int:
        if ket.space.dim != self.space.dim:
            raise ValueError("dimension mismatch in pairing")
        return sum(a * b for a, b in zip(self.coords, ket.coords)) % self.space.p


def tensor(*vectors: _Vector) -> _Vector:
    """Tensor product of kets (or of bras), left factor major."""
    kind = type(vectors[0])
    field = vectors[0].space.field
    if any(type(v) is not kind for v in vectors):
        raise TypeError("cannot tensor kets with bras")
    dims: list[int] = []
    coords = np.ones(1, dtype=np.int64)
    for v in vectors:
        if v.space.field != field:
            raise ValueError("modulus mismatch")
        dims.extend(v.space.factors)
        coords = np.kron(coords, v.array()) % field.p
    return kind(coords, StateSpace(len(coords), field, tuple(dims)))


class Subspace:
    """Canonical (RREF) subspace of a state space (``dual=False``) or of its dual."""

    __slots__ = ("space", "basis", "dual", "_key")

    def __init__(self, space: StateSpace, vectors, dual: bool = False):
        if isinstance(vectors, Matrix):
            mat = vectors
        else:
            arr = np.asarray(vectors, dtype=np.int64)
            mat = Matrix(arr.reshape(-1, space.dim) if arr.size else np.zeros((0, space.dim), np.int64), space.field)
        if mat.cols != space.dim:
            raise ValueError(f"vectors of length {mat.cols} do not live in dimension {space.dim}")
        self.space = space
        self.basis = row_space(mat)
        self.dual = bool(dual)
        self._key = (space, self.dual, self.basis.shape, self.basis.data.tobytes())

    @property
    def dim(self) -> int:
        return self.basis.rows

    def is_null(self) -> bool:
        return self.basis.rows == 0

    def is_full(self) -> bool:
        return self.basis.rows == self.space.dim

    def vectors(self) -> list[_Vector]:
        kind = Bra if self.dual else Ket
        return [kind(row, self.space) for row in self.basis.data]

    def contains(self, v: _Vector) -> bool:
        if v.dual != self.dual:
            raise TypeError("variance mismatch")
        stacked = np.vstack([self.basis.data, v.array().reshape(1, -1)])
        return rank(Matrix(stacked, self.space.field)) == self.dim

    def __le__(self, other: Subspace) -> bool:
        _check_pair(self, other)
        return join(self, other) == other

    def __eq__(self, other):
        return isinstance(other, Subspace) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        kind = "Effect" if self.dual else "State"
        return f"{kind}Subspace(dim={self.dim}, basis={self.basis.tolist()}, Z{self.space.p})"


def _check_pair(a: Subspace, b: Subspace):
    if a.space != b.space:
        raise ValueError("subspaces live in different spaces")
    if a.dual != b.dual:
        raise TypeError("cannot combine a state subspace with an effect subspace")


def span(vectors: Iterable[_Vector], space: StateSpace | None = None) -> Subspace:
    """Canonical subspace spanned by kets (or by bras); empty input gives the null subspace."""
    vectors = list(vectors)
    if not vectors:
        if space is None:
            raise ValueError("span of no vectors needs an explicit space")
        return space.null()
    space = space or vectors[0].space
    dual = vectors[0].dual
    for v in vectors:
        if v.space != space:
            raise ValueError("vector does not live in the given space")
        if v.dual != dual:
            raise TypeError("cannot span kets together with bras")
    return Subspace(space, np.array([v.coords for v in vectors], dtype=np.int64), dual)


def join(a: Subspace, b: Subspace) -> Subspace:
    _check_pair(a, b)
    return Subspace(a.space, np.vstack([a.basis.data, b.basis.data]), a.dual)


def meet(a: Subspace, b: Subspace) -> Subspace:
    _check_pair(a, b)
    constraints = np.vstack([kernel(a.basis).data, kernel(b.basis).data])
    return Subspace(a.space, kernel(Matrix(constraints.reshape(-1, a.space.dim), a.space.field)), a.dual)


def join_all(subspaces: Iterable[Subspace], space: StateSpace, dual: bool = False) -> Subspace:
    rows = [s.basis.data for s in subspaces]
    if not rows:
        return space.null(dual)
    return Subspace(space, np.vstack(rows), dual)


def annihilator(s: Subspace) -> Subspace:
    """Vectors of the opposite variance that pair to zero with all of ``s``."""
    return Subspace(s.space, kernel(s.basis), not s.dual)


def is_possible(e: Subspace, m: Subspace) -> bool:
    """Whether effect ``e`` is possible for mixed state ``m``."""
    if not e.dual or m.dual:
        raise TypeError("is_possible expects (effect subspace, state subspace)")
    if e.space.dim != m.space.dim or e.space.field != m.space.field:
        raise ValueError("effect and state live in different spaces")
    if e.is_null() or m.is_null():
        return False
    return bool(matmul_mod(e.basis.data, m.basis.data.T, e.space.p).any())


@dataclass(frozen=True)
class Measurement:
    """Ordered effects; outcome ``a`` corresponds to ``effects[a]``."""

    effects: tuple[Subspace, ...]
    label: str = ""

    def __post_init__(self):
        effects = tuple(self.effects)
        if not effects:
            raise ValueError("a measurement needs at least one effect")
        space = effects[0].space
        for e in effects:
            if not e.dual:
                raise TypeError("measurement effects must be dual subspaces")
            if e.space != space:
                raise ValueError("measurement effects live in different spaces")
        object.__setattr__(self, "effects", effects)

    @classmethod
    def from_bras(cls, bras: Sequence[Bra], label: str = "") -> Measurement:
        return cls(tuple(span([b]) for b in bras), label)

    @property
    def space(self) -> StateSpace:
        return self.effects[0].space

    @property
    def outcomes(self) -> int:
        return len(self.effects)

    def is_basic(self) -> bool:
        return all(e.dim == 1 for e in self.effects) and rank(
            Matrix(np.vstack([e.basis.data for e in self.effects]), self.space.field)
        ) == len(self.effects) == self.space.dim

    def relabel(self, order: Sequence[int], label: str | None = None) -> Measurement:
        return Measurement(tuple(self.effects[i] for i in order), self.label if label is None else label)


def validate_measurement(m: Measurement) -> bool:
    return join_all(m.effects, m.space, dual=True).is_full()


def _tensordot_mod(e: np.ndarray, t: np.ndarray, axis: int, p: int) -> np.ndarray:
    if (p - 1) ** 2 * max(e.shape[1], 1) >= 2**63:
        e, t = e.astype(object), t.astype(object)
    return np.tensordot(e, t, axes=([1], [axis])) % p


def conditional_state(m: Subspace, e: Subspace, factor: int = 0) -> Subspace:
    """Span of the partial pairings of effect ``e`` on one factor with state ``m``.

    The null subspace means the effect is impossible for ``m``.
    """
    if m.dual or not e.dual:
        raise TypeError("conditional_state expects (state subspace, effect subspace)")
    space = m.space
    if space.factor_dims is None:
        raise ValueError("conditioning needs a composite space with factor metadata")
    if e.space.dim != space.factors[factor] or e.space.field != space.field:
        raise ValueError("effect does not live on the conditioned factor")
    rest = space.without(factor)
    if m.is_null() or e.is_null():
        return rest.null()
    tens = m.basis.data.reshape((m.dim,) + space.factors)
    out = _tensordot_mod(e.basis.data, tens, factor + 1, space.p)
    return Subspace(rest, out.reshape(-1, rest.dim))


def reduce(m: Subspace, traced: int = 0) -> Subspace:
    """Subsystem state left after conditioning ``traced`` on its full dual space."""
    return conditional_state(m, m.space.factor(traced).full(dual=True), traced)


def tensor_subspace(a: Subspace, b: Subspace) -> Subspace:
    """Span of all products of basis vectors of ``a`` and ``b``."""
    if a.dual != b.dual:
        raise TypeError("variance mismatch")
    space = StateSpace(a.space.dim * b.space.dim, a.space.field, a.space.factors + b.space.factors)
    if a.is_null() or b.is_null():
        return space.null(a.dual)
    return Subspace(space, kron(a.basis, b.basis), a.dual)


class SchmidtDecomposition(NamedTuple):
    s: int
    r_basis: Matrix
    q_basis: Matrix


def _bipartite_matrix(psi: Ket) -> np.ndarray:
    if psi.space.factor_dims is None or len(psi.space.factor_dims) != 2:
        raise ValueError("expected a ket on a two-factor space")
    return psi.array().reshape(psi.space.factor_dims)


def schmidt(psi: Ket) -> SchmidtDecomposition:
    """Schmidt number and bases: psi = sum_{k<s} r_basis[k] (x) q_basis[k]."""
    if psi.is_zero():
        raise ValueError("the zero vector has no Schmidt decomposition")
    coeff = _bipartite_matrix(psi)
    field = psi.space.field
    state = span([psi])
    m_r = reduce(state, traced=1)
    m_q = reduce(state, traced=0)
    s = m_r.dim
    if m_q.dim != s:
        raise RuntimeError(f"reduction dimensions disagree: {s} vs {m_q.dim}")
    r_basis = extend_to_basis(m_r.basis)
    # coeff = r_basis^T @ c, with rows of c beyond s vanishing
    c = invert(r_basis.T) @ Matrix(coeff, field)
    q_basis = extend_to_basis(Matrix(c.data[:s], field))
    return SchmidtDecomposition(s, r_basis, q_basis)


def schmidt_number(psi: Ket) -> int:
    return rank(Matrix(_bipartite_matrix(psi), psi.space.field))


def purify(m: Subspace) -> Ket:
    """sum_i |i>_R (x) |m_i>_Q over the canonical basis of ``m``."""
    if m.dual:
        raise TypeError("only state subspaces can be purified")
    if m.is_null():
        raise ValueError("the null subspace has no purification")
    space = StateSpace(m.dim * m.space.dim, m.space.field, (m.dim,) + m.space.factors)
    return Ket(m.basis.data.reshape(-1), space)


def connect_purifications(psi1: Ket, psi2: Ket) -> Matrix | None:
    """Invertible T on R with (T (x) 1) psi1 = psi2, or None if the Q-reductions differ."""
    if psi1.space != psi2.space:
        raise ValueError("purifications live in different spaces")
    m_q = reduce(span([psi1]), traced=0)
    if m_q != reduce(span([psi2]), traced=0):
        return None
    field = psi1.space.field
    pivots = [int(np.nonzero(row)[0][0]) for row in m_q.basis.data]
    completions = []
    for psi in (psi1, psi2):
        # coefficients against the common RREF basis of the Q-reduction
        a = _bipartite_matrix(psi)[:, pivots]
        completions.append(extend_to_basis(Matrix(a.T, field)).T)
    return completions[1] @ invert(completions[0])


def connect_mixtures(set1: Sequence[Ket], set2: Sequence[Ket]) -> Matrix:
    """Invertible T with set2[l] = sum_k T[l, k] set1[k]."""
    if len(set1) != len(set2):
        raise ValueError("mixtures have different cardinalities")
    s1, s2 = span(set1), span(set2)
    if s1 != s2:
        raise ValueError("mixtures span different subspaces")
    if len(set1) != s1.dim:
        raise ValueError("mixture elements must form a basis of their span")
    field = s1.space.field
    a = Matrix(np.array([v.coords for v in set1], dtype=np.int64).T, field)
    rows = []
    for v in set2:
        x = solve(a, v.coords)
        rows.append(x.data.reshape(-1))
    return Matrix(np.array(rows), field)


def is_product(psi: Ket) -> bool:
    return schmidt_number(psi) == 1


def gaussian_binomial(n: int, k: int, q: int) -> int:
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def count(space: StateSpace, what: str) -> int:
    p, d = space.p, space.dim
    if what == "projective_points":
        return (p**d - 1) // (p - 1)
    if what == "subspaces":
        return sum(gaussian_binomial(d, k, p) for k in range(d + 1))
    if what == "bases":
        return math.prod((p**d - p**i) // (p - 1) for i in range(d))
    raise ValueError(f"unknown enumeration {what!r}")


def _projective_arrays(p: int, d: int) -> Iterator[np.ndarray]:
    for lead in range(d - 1, -1, -1):
        for tail in itertools.product(range(p), repeat=d - lead - 1):
            v = np.zeros(d, dtype=np.int64)
            v[lead] = 1
            v[lead + 1 :] = tail
            yield v


def _rref_matrices(p: int, d: int, k: int) -> Iterator[np.ndarray]:
    for pivots in itertools.combinations(range(d), k):
        free = [(i, c) for i, pc in enumerate(pivots) for c in range(pc + 1, d) if c not in pivots]
        for values in itertools.product(range(p), repeat=len(free)):
            m = np.zeros((k, d), dtype=np.int64)
            for i, pc in enumerate(pivots):
                m[i, pc] = 1
            for (i, c), v in zip(free, values):
                m[i, c] = v
            yield m


def enumerate_space(
    space: StateSpace, what: str, dual: bool = False, budget: int = DEFAULT_BUDGET
) -> Iterator:
    """Exhaustively list projective points, subspaces or ordered bases of a space.

    Points carry their canonical representative (first nonzero coordinate 1);
    bases are ordered tuples of such points.
    """
    total = count(space, what)
    if total > budget:
        raise BudgetExceeded(f"{what} of {space}: {total} items exceeds budget {budget}")
    kind = Bra if dual else Ket
    p, d = space.p, space.dim
    if what == "projective_points":
        return (kind(v, space) for v in _projective_arrays(p, d))
    if what == "subspaces":
        return (
            Subspace(space, m, dual)
            for k in range(d + 1)
            for m in _rref_matrices(p, d, k)
        )
    return _ordered_bases(space, kind)


def _ordered_bases(space: StateSpace, kind) -> Iterator[tuple]:
    points = list(_projective_arrays(space.p, space.dim))

    def extend(chosen: list[np.ndarray]):
        if len(chosen) == space.dim:
            yield tuple(kind(v, space) for v in chosen)
            return
        for v in points:
            trial = Matrix(np.vstack(chosen + [v]), space.field)
            if rank(trial) == len(chosen) + 1:
                yield from extend(chosen + [v])

    return extend([])


def mobit_measurements(field: FieldSpec | int = 2) -> tuple[Measurement, Measurement, Measurement]:
    """The X, Y, Z mobit measurements over Z_2, outcomes ordered (+, -).

    With <a| = (1, 0), <b| = (0, 1), <c| = (1, 1):
    X = {<c|, <a|}, Y = {<b|, <c|}, Z = {<a|, <b|}.
    """
    field = field if isinstance(field, FieldSpec) else FieldSpec(field)
    space = StateSpace(2, field)
    a, b, c = space.bra([1, 0]), space.bra([0, 1]), space.bra([1, 1])
    return (
        Measurement.from_bras([c, a], "X"),
        Measurement.from_bras([b, c], "Y"),
        Measurement.from_bras([a, b], "Z"),
    )


def singlet(field: FieldSpec | int = 2) -> Ket:
    """|S> = |0,1> - |1,0>."""
    field = field if isinstance(field, FieldSpec) else FieldSpec(field)
    return Ket([0, 1, -1, 0], StateSpace.composite(field, 2, 2))
