"""Open-system dynamics: Kraus-style maps, their invertible dilations and extensions."""

from __future__ import annotations

import itertools
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from .field import FieldSpec
from .linalg import Matrix, extend_to_basis, invert, kernel, kron, matmul_mod
from .states import (
    DEFAULT_BUDGET,
    BudgetExceeded,
    Ket,
    StateSpace,
    Subspace,
    conditional_state,
    enumerate_space,
    reduce,
    span,
)

SubspaceMap = Callable[[Subspace], Subspace]


def check_unconditional(kraus: Sequence[Matrix]) -> bool:
    """True iff the Kraus operators have no common nonzero kernel vector."""
    if not kraus:
        return False
    stacked = Matrix(np.vstack([a.data for a in kraus]), kraus[0].field)
    return kernel(stacked).rows == 0


@dataclass(frozen=True)
class TypeLMap:
    """Subspace map M -> join_k A_k M."""

    kraus: tuple[Matrix, ...]
    unconditional: bool = True

    def __post_init__(self):
        kraus = tuple(self.kraus)
        if not kraus:
            raise ValueError("a Type L map needs at least one operator")
        d = kraus[0].rows
        for a in kraus:
            if a.shape != (d, d) or a.field != kraus[0].field:
                raise ValueError("Kraus operators must be square, of one size and over one field")
        if self.unconditional and not check_unconditional(kraus):
            raise ValueError("operators share a kernel vector; the map is conditional")
        object.__setattr__(self, "kraus", kraus)

    @classmethod
    def from_lists(cls, kraus, field: FieldSpec | int, unconditional: bool = True) -> TypeLMap:
        return cls(tuple(Matrix(a, field) for a in kraus), unconditional)

    @property
    def dim(self) -> int:
        return self.kraus[0].rows

    @property
    def field(self) -> FieldSpec:
        return self.kraus[0].field

    def __call__(self, m: Subspace) -> Subspace:
        return apply_type_l(self, m)


def apply_type_l(op: TypeLMap, m: Subspace) -> Subspace:
    if m.dual:
        raise TypeError("maps act on state subspaces")
    if m.space.dim != op.dim or m.space.field != op.field:
        raise ValueError(f"map on dimension {op.dim} applied to a state of dimension {m.space.dim}")
    if m.is_null():
        return m
    images = [matmul_mod(m.basis.data, a.data.T, op.field.p) for a in op.kraus]
    return Subspace(m.space, np.vstack(images))


@dataclass(frozen=True)
class Dilation:
    """Invertible joint evolution on S (x) E with the environment starting in |0>."""

    env_dim: int
    env_state: Ket
    joint: Matrix
    s_dim: int

    def __post_init__(self):
        if invert(self.joint) is None:
            raise ValueError("joint evolution is not invertible")
        if self.joint.rows != self.s_dim * self.env_dim:
            raise ValueError("joint evolution has the wrong size")

    @property
    def field(self) -> FieldSpec:
        return self.joint.field

    def __call__(self, m: Subspace) -> Subspace:
        """Reduce out E after evolving M (x) span{|0>}."""
        if m.is_null():
            return m
        se = StateSpace.composite(self.field, self.s_dim, self.env_dim)
        inputs = np.kron(m.basis.data, np.array(self.env_state.coords, dtype=np.int64)) % self.field.p
        evolved = matmul_mod(inputs, self.joint.data.T, self.field.p)
        return reduce(Subspace(se, evolved), traced=1)


def dilate(op: TypeLMap) -> Dilation:
    """Invertible T on S (x) E with T|phi, 0> = sum_k A_k|phi> (x) |k>.

    The environment has one basis state per Kraus operator; T is completed to an
    invertible matrix by greedy standard-basis extension.
    """
    if not op.unconditional or not check_unconditional(op.kraus):
        raise ValueError("only unconditional maps can be dilated")
    d, k_env, p = op.dim, len(op.kraus), op.field.p
    images = np.zeros((d, d * k_env), dtype=np.int64)
    for k, a in enumerate(op.kraus):
        images[:, k::k_env] = a.data.T
    completed = extend_to_basis(Matrix(images, op.field)).data
    joint = np.zeros((d * k_env, d * k_env), dtype=np.int64)
    fixed = [j * k_env for j in range(d)]
    rest = [i for i in range(d * k_env) if i not in fixed]
    joint[:, fixed] = completed[:d].T
    joint[:, rest] = completed[d:].T
    env = StateSpace(k_env, op.field).basis_ket(0)
    return Dilation(k_env, env, Matrix(joint % p, op.field), d)


class ExtendedMap:
    """Joint map on R (x) S: evolve by 1_R (x) T with E in |0>, then reduce out E."""

    def __init__(self, dilation: Dilation, r_dim: int):
        self.dilation = dilation
        self.r_dim = r_dim
        self.space = StateSpace.composite(dilation.field, r_dim, dilation.s_dim)
        self._big = kron(Matrix.identity(r_dim, dilation.field), dilation.joint)

    def __call__(self, m: Subspace) -> Subspace:
        if m.space != self.space:
            raise ValueError("state does not live on R (x) S")
        if m.is_null():
            return m
        p = self.space.p
        d = self.dilation
        rse = StateSpace.composite(d.field, self.r_dim, d.s_dim, d.env_dim)
        inputs = np.kron(m.basis.data, np.array(d.env_state.coords, dtype=np.int64)) % p
        evolved = Subspace(rse, matmul_mod(inputs, self._big.data.T, p))
        return reduce(evolved, traced=2)


def extend_to_joint(d: Dilation, r_dim: int) -> ExtendedMap:
    return ExtendedMap(d, r_dim)


def maximally_entangled(field: FieldSpec, d: int) -> Ket:
    space = StateSpace.composite(field, d, d)
    return Ket(np.eye(d, dtype=np.int64).reshape(-1), space)


def kraus_from_extension(joint_map: SubspaceMap, s_dim: int, field: FieldSpec | None = None) -> TypeLMap:
    """Read Kraus operators off the image of span{sum_k |k,k>} under a joint map."""
    space = getattr(joint_map, "space", None)
    if field is None:
        if space is None:
            raise ValueError("field is required for a bare callable")
        field = space.field
    if space is not None and space.factors != (s_dim, s_dim):
        raise ValueError(f"joint map acts on {space.factors}, expected ({s_dim}, {s_dim})")
    phi = maximally_entangled(field, s_dim)
    image = joint_map(span([phi]))
    if image.space.factors != (s_dim, s_dim):
        raise ValueError("joint map changed the space dimensions")
    if image.is_null():
        raise ValueError("joint map annihilates the maximally entangled state")
    # A[j, k] is the coefficient of |k>_R (x) |j>_S
    kraus = tuple(Matrix(row.reshape(s_dim, s_dim).T, field) for row in image.basis.data)
    return TypeLMap(kraus, unconditional=check_unconditional(kraus))


def projective_states(space: StateSpace, budget: int = DEFAULT_BUDGET):
    return [span([k]) for k in enumerate_space(space, "projective_points", budget=budget)]


def maps_agree(f: SubspaceMap, g: SubspaceMap, space: StateSpace, budget: int = DEFAULT_BUDGET) -> bool:
    """Compare two Type M maps on every one-dimensional subspace."""
    return all(f(m) == g(m) for m in projective_states(space, budget))


def random_subspace(space: StateSpace, k: int, rng: np.random.Generator, dual: bool = False) -> Subspace:
    while True:
        s = Subspace(space, rng.integers(0, space.p, size=(k, space.dim)), dual)
        if s.dim == k:
            return s


def random_type_l(field: FieldSpec, d: int, n_ops: int, rng: np.random.Generator) -> TypeLMap:
    while True:
        kraus = tuple(Matrix(rng.integers(0, field.p, size=(d, d)), field) for _ in range(n_ops))
        if check_unconditional(kraus):
            return TypeLMap(kraus)


def verify_type_e(
    s_map: TypeLMap,
    r_dim: int,
    exhaustive_budget: int = DEFAULT_BUDGET,
    *,
    joint_map: SubspaceMap | None = None,
    state_dims: Sequence[int] | None = None,
    effect_dims: Sequence[int] | None = None,
    samples: int | None = None,
    seed: int | None = None,
) -> bool:
    """Check that conditioning on R commutes with the evolution.

    For every joint state M on R (x) S and R-effect E, compare
    s_map(M / E) with joint_map(M) / E. The joint map defaults to the
    extension induced by the canonical dilation of ``s_map``.
    """
    if joint_map is None:
        joint_map = extend_to_joint(dilate(s_map), r_dim)
    field = s_map.field
    rs = StateSpace.composite(field, r_dim, s_map.dim)
    r_space = StateSpace(r_dim, field)
    state_dims = range(rs.dim + 1) if state_dims is None else state_dims
    effect_dims = range(r_dim + 1) if effect_dims is None else effect_dims

    if samples is not None:
        rng = np.random.default_rng(seed)
        sd, ed = list(state_dims), list(effect_dims)
        pairs = (
            (
                random_subspace(rs, int(rng.choice(sd)), rng),
                random_subspace(r_space, int(rng.choice(ed)), rng, dual=True),
            )
            for _ in range(samples)
        )
    else:
        states = [m for m in enumerate_space(rs, "subspaces", budget=exhaustive_budget) if m.dim in state_dims]
        effects = [
            e for e in enumerate_space(r_space, "subspaces", dual=True, budget=exhaustive_budget) if e.dim in effect_dims
        ]
        if len(states) * len(effects) > exhaustive_budget:
            raise BudgetExceeded(f"{len(states) * len(effects)} diagram instances exceed budget {exhaustive_budget}")
        pairs = itertools.product(states, effects)

    images: dict[Subspace, Subspace] = {}
    for m, e in pairs:
        if m not in images:
            images[m] = joint_map(m)
        lhs = s_map(conditional_state(m, e, 0))
        rhs = conditional_state(images[m], e, 0)
        if lhs != rhs:
            return False
    return True
