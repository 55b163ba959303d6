import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from modalqt.field import FieldSpec
from modalqt.hvgames import (
    ContextFamily,
    JointAssignment,
    SharedState,
    classical_winners,
    count_joint_assignments,
    hardy_check,
    joint_assignment_survivors,
    mobit_family,
    noncontextual_assignments,
    noncontextual_search,
    play_game,
)
from modalqt.states import BudgetExceeded, StateSpace, enumerate_space, mobit_measurements, singlet, span
from modalqt.tables import (
    DeterministicLocalStrategy,
    PossibilityTable,
    Scenario,
    build_table,
    lhv_membership,
    prbox_table,
    singlet_table,
    table_n,
)

X, Y, Z = mobit_measurements()
Q = StateSpace(2, FieldSpec(2))
HARDY = {"A": ("X", False), "B": ("Y", False), "C": ("Z", True), "D": ("Y", True)}


def all_marks(sc):
    return PossibilityTable(sc, [[np.ones(sc.block_shape(i, j), bool) for j in range(sc.n_cols)] for i in range(sc.n_rows)])


def test_mobit_family_has_no_noncontextual_assignment():
    f = mobit_family(2)
    assert len(f.effects) == 3 and len(f.contexts) == 3
    assert noncontextual_search(f) is None
    assert noncontextual_assignments(f) == []


def test_single_context_has_two_assignments():
    a, b = span([Q.bra([1, 0])]), span([Q.bra([0, 1])])
    f = ContextFamily((a, b), ((0, 1),))
    assert noncontextual_assignments(f) == [(False, True), (True, False)]
    assert noncontextual_search(f) == (False, True)


def test_z3_mobit_family():
    f = mobit_family(3)
    assert len(f.effects) == 4
    assert len(f.contexts) == 6  # every pair of distinct lines is a basis
    assert noncontextual_search(f) is None


def test_context_family_validation():
    a = span([Q.bra([1, 0])])
    with pytest.raises(ValueError):
        ContextFamily((a, a), ((0, 1),))
    with pytest.raises(ValueError):
        ContextFamily((a, span([Q.bra([0, 1])])), ((0,),))
    with pytest.raises(ValueError):
        ContextFamily((span([Q.ket([1, 0])]),), ())


def test_noncontextual_budget():
    with pytest.raises(BudgetExceeded):
        noncontextual_search(mobit_family(2), budget=4)


def test_noncontextual_search_is_deterministic():
    f = ContextFamily.from_bases(StateSpace(3, FieldSpec(2)))
    assert noncontextual_search(f) == noncontextual_search(f)


def test_survivor_examples():
    assert count_joint_assignments(singlet_table()) == 64
    assert joint_assignment_survivors(singlet_table()) == []
    assert count_joint_assignments(prbox_table()) == 16
    assert joint_assignment_survivors(prbox_table()) == []
    k0 = Q.ket([1, 0])
    from modalqt.states import tensor

    prod = build_table(tensor(k0, k0), [Z], [Z])
    survivors = joint_assignment_survivors(prod)
    assert survivors == [JointAssignment((0,), (0,))]
    assert survivors[0].outcome(1, 0) == 0 and survivors[0].outcome(2, 0) == 0


def test_hardy_examples():
    s = singlet_table()
    assert hardy_check(s, HARDY)
    plain = {"A": ("X", False), "B": ("Y", False), "C": ("Z", False), "D": ("Y", False)}
    assert not hardy_check(s, plain)
    assert not hardy_check(all_marks(s.scenario), HARDY)


def test_hardy_mapping_errors():
    s = singlet_table()
    with pytest.raises(ValueError):
        hardy_check(s, {"A": ("X", False)})
    with pytest.raises(ValueError):
        hardy_check(s, {**HARDY, "A": ("Q", False)})
    with pytest.raises(ValueError):
        hardy_check(table_n(), {"A": ("U", False), "B": ("V", False), "C": ("U", False), "D": ("V", False)})


def test_game_examples():
    s = singlet_table()
    assert classical_winners(s) == []
    result = play_game(s, SharedState(singlet(), (X, Y, Z), (X, Y, Z)))
    assert result.wins_all and result.won_pairs == 9 and result.losing_pair is None
    everything = all_marks(s.scenario)
    assert play_game(everything, DeterministicLocalStrategy((0, 0, 0), (0, 0, 0))).wins_all


def test_game_reports_first_loss():
    result = play_game(singlet_table(), DeterministicLocalStrategy((0, 0, 0), (0, 0, 0)))
    assert not result.wins_all and result.losing_pair == ("X", "X")


def test_game_rejects_mismatched_strategies():
    with pytest.raises(ValueError):
        play_game(singlet_table(), DeterministicLocalStrategy((0,), (0,)))
    with pytest.raises(ValueError):
        play_game(singlet_table(), SharedState(singlet(), (X,), (X, Y, Z)))


def test_shared_product_state_loses():
    k0 = Q.ket([1, 0])
    from modalqt.states import tensor

    result = play_game(singlet_table(), SharedState(tensor(k0, k0), (X, Y, Z), (X, Y, Z)))
    assert not result.wins_all


SC = Scenario((("A", 2), ("B", 2)), (("C", 2), ("D", 2)))


@st.composite
def random_tables(draw):
    bits = draw(st.lists(st.booleans(), min_size=16, max_size=16))
    blocks = np.array(bits).reshape(2, 2, 2, 2)
    for i in range(2):
        for j in range(2):
            if not blocks[i, j].any():
                blocks[i, j, 0, 0] = True
    return PossibilityTable(SC, blocks.tolist())


@given(random_tables())
def test_survivors_are_exactly_the_winning_strategies(t):
    assert {(h.f1, h.f2) for h in joint_assignment_survivors(t)} == {(h.f1, h.f2) for h in classical_winners(t)}
    if lhv_membership(t) is not None:
        assert joint_assignment_survivors(t)


def test_survivors_without_lhv_membership():
    # one strategy survives, but the singlet marks it cannot cover remain
    t2 = singlet_table() | DeterministicLocalStrategy((0, 0, 0), (0, 0, 0)).table(singlet_table().scenario)
    assert joint_assignment_survivors(t2) and lhv_membership(t2) is None


@given(st.integers(0, 14))
def test_mqt_strategies_win_their_own_game(k):
    psi = list(enumerate_space(StateSpace.composite(FieldSpec(2), 2, 2), "projective_points"))[k]
    t = build_table(psi, [X, Y, Z], [X, Y, Z])
    assert play_game(t, SharedState(psi, (X, Y, Z), (X, Y, Z))).wins_all
