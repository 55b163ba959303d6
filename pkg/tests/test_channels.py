import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from modalqt.channels import (
    TypeLMap,
    apply_type_l,
    check_unconditional,
    dilate,
    extend_to_joint,
    kraus_from_extension,
    maps_agree,
    maximally_entangled,
    projective_states,
    random_type_l,
    verify_type_e,
)
from modalqt.field import FieldSpec
from modalqt.linalg import Matrix, invert, kron, rank
from modalqt.states import BudgetExceeded, StateSpace, Subspace, enumerate_space, join, singlet, span

Z2 = FieldSpec(2)
Q = StateSpace(2, Z2)
ID = [[1, 0], [0, 1]]
X = [[0, 1], [1, 0]]
FLIP = TypeLMap.from_lists([ID, X], Z2)


def test_check_unconditional_examples():
    assert check_unconditional([Matrix.identity(2, Z2)])
    assert not check_unconditional([Matrix.zeros(2, 2, Z2)])
    assert check_unconditional([Matrix([[0, 0], [0, 1]], Z2), Matrix([[1, 0], [0, 0]], Z2)])


def test_conditional_maps_are_flagged():
    with pytest.raises(ValueError):
        TypeLMap.from_lists([[[1, 0], [0, 0]]], Z2)
    op = TypeLMap.from_lists([[[1, 0], [0, 0]]], Z2, unconditional=False)
    assert op(span([Q.ket([0, 1])])).is_null()
    with pytest.raises(ValueError):
        dilate(op)


def test_apply_type_l_examples():
    ket0 = span([Q.ket([1, 0])])
    assert apply_type_l(TypeLMap.from_lists([X], Z2), ket0) == span([Q.ket([0, 1])])
    assert apply_type_l(FLIP, ket0).is_full()
    assert apply_type_l(FLIP, Q.null()).is_null()
    with pytest.raises(ValueError):
        apply_type_l(FLIP, StateSpace(3, Z2).full())


def test_type_m_law_exhaustive():
    subs = list(enumerate_space(Q, "subspaces"))
    maps = [FLIP, TypeLMap.from_lists([[[1, 1], [0, 1]], [[0, 0], [1, 0]]], Z2)]
    for op in maps:
        for a, b in itertools.product(subs, repeat=2):
            assert op(join(a, b)) == join(op(a), op(b))
        for m in subs:
            if not m.is_null():
                assert not op(m).is_null()


def test_dilation_identity_and_flip():
    ident = TypeLMap.from_lists([ID], Z2)
    assert maps_agree(ident, dilate(ident), Q)
    d = dilate(FLIP)
    assert invert(d.joint) is not None
    for m in enumerate_space(Q, "subspaces"):
        assert d(m) == FLIP(m)


def test_extension_examples():
    d = dilate(FLIP)
    ext = extend_to_joint(d, 2)
    s = span([singlet()])
    direct = join(*(Subspace(s.space, (kron(Matrix.identity(2, Z2), a) @ s.basis.T).T) for a in FLIP.kraus))
    assert ext(s) == direct
    assert ext(s.space.null()).is_null()
    ident = extend_to_joint(dilate(TypeLMap.from_lists([ID], Z2)), 2)
    assert all(ident(m) == m for m in enumerate_space(s.space, "subspaces"))


def test_kraus_extraction_examples():
    space = StateSpace.composite(Z2, 2, 2)
    identity = kraus_from_extension(lambda m: m, 2, Z2)
    assert maps_agree(identity, lambda m: m, Q)
    collapse = kraus_from_extension(lambda m: span([space.ket([1, 0, 0, 0])]), 2, Z2)
    assert len(collapse.kraus) == 1 and rank(collapse.kraus[0]) == 1
    back = kraus_from_extension(extend_to_joint(dilate(FLIP), 2), 2)
    assert maps_agree(back, FLIP, Q)
    assert all(back(line) == FLIP(line) for line in projective_states(Q))


def test_maximally_entangled():
    phi = maximally_entangled(FieldSpec(3), 3)
    assert phi.coords == tuple(np.eye(3, dtype=int).reshape(-1))


def test_verify_type_e():
    assert verify_type_e(TypeLMap.from_lists([ID], Z2), 2)
    assert verify_type_e(FLIP, 2)
    assert verify_type_e(FLIP, 2, state_dims=[1, 2], effect_dims=[1])


def test_verify_type_e_rejects_a_map_that_drops_join_terms():
    space = StateSpace.composite(Z2, 2, 2)
    first_only = kron(Matrix.identity(2, Z2), FLIP.kraus[0])

    def drops_terms(m):
        # keeps only the (1 x A_0) image, forgetting the join with the X branch
        return Subspace(space, (first_only @ m.basis.T).T) if not m.is_null() else m

    drops_terms.space = space
    assert not verify_type_e(FLIP, 2, joint_map=drops_terms)


def test_verify_type_e_budget():
    with pytest.raises(BudgetExceeded):
        verify_type_e(TypeLMap.from_lists([np.eye(3, dtype=int)], FieldSpec(3)), 3, exhaustive_budget=1000)


def test_verify_type_e_sampled_is_reproducible():
    op = TypeLMap.from_lists([np.eye(3, dtype=int), np.roll(np.eye(3, dtype=int), 1, axis=0)], FieldSpec(3))
    assert verify_type_e(op, 3, samples=40, seed=7)


@given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3]), st.sampled_from([2, 3]), st.integers(1, 3))
def test_representation_round_trip(seed, p, d, k):
    rng = np.random.default_rng(seed)
    op = random_type_l(FieldSpec(p), d, k, rng)
    space = StateSpace(d, op.field)
    dil = dilate(op)
    assert maps_agree(op, dil, space)
    back = kraus_from_extension(extend_to_joint(dil, d), d)
    assert maps_agree(op, back, space)
