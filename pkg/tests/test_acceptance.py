"""Acceptance criteria, one test each, with their time limits."""

import itertools
import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
from helpers import random_invertible, random_ket, random_maximal_state, random_subspace
from modalqt.channels import (
    TypeLMap,
    dilate,
    extend_to_joint,
    kraus_from_extension,
    projective_states,
    random_type_l,
    verify_type_e,
)
from modalqt.field import FieldSpec
from modalqt.hvgames import (
    SharedState,
    classical_winners,
    count_joint_assignments,
    joint_assignment_survivors,
    mobit_family,
    noncontextual_assignments,
    noncontextual_search,
    play_game,
)
from modalqt.linalg import invert
from modalqt.resolve import (
    ProbabilityTable,
    SearchBounds,
    check_prob_ns,
    classify,
    hall_resolution,
    infeasibility_certificate,
    mqt_search,
    resolution_unique,
    strong_margin,
    strong_resolution,
    weak_resolution,
)
from modalqt.states import (
    Ket,
    StateSpace,
    annihilator,
    connect_purifications,
    enumerate_space,
    is_product,
    join,
    meet,
    mobit_measurements,
    purify,
    reduce,
    schmidt,
    singlet,
    span,
)
from modalqt.tables import (
    DeterministicLocalStrategy,
    Scenario,
    build_table,
    check_modal_ns,
    is_minimal_ns,
    lhv_membership,
    prbox_table,
    singlet_table,
    table_n,
)

H, O = Fraction(1, 2), Fraction(0)
ANTI = [[O, H], [H, O]]
DIAG = [[H, O], [O, H]]
SINGLET_RESOLUTION = [[ANTI, DIAG, DIAG], [DIAG, ANTI, DIAG], [DIAG, DIAG, ANTI]]
PRBOX_RESOLUTION = [[DIAG, DIAG], [DIAG, ANTI]]

CRITERIA = {
    "test_criterion_01_singlet_table": (1, "singlet table reproduction", 1),
    "test_criterion_02_kochen_specker": (2, "no noncontextual mobit assignment", 1),
    "test_criterion_03_joint_assignments": (3, "all 64 joint assignments eliminated", 1),
    "test_criterion_04_pseudo_telepathy": (4, "pseudo-telepathy game", 1),
    "test_criterion_05_prbox": (5, "PR box suite and bounded realization search", 60),
    "test_criterion_06_table_n": (6, "table N has no weak resolution; (W,W) clash", 5),
    "test_criterion_07_singlet_resolution": (7, "singlet resolution unique and only weak", 5),
    "test_criterion_08_hall": (8, "Hall-matching resolutions of maximal states", 120),
    "test_criterion_09_representation": (9, "Type L / I / E round trip", 120),
    "test_criterion_10_structure": (10, "state counts and subspace calculus", 60),
    "test_criterion_11_hierarchy": (11, "hierarchy strictness and LHV => SPR", 60),
}


@contextmanager
def criterion(name):
    limit = CRITERIA[name][2]
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    CRITERIA[f"{name}:elapsed"] = elapsed
    assert elapsed < limit, f"took {elapsed:.2f} s, limit {limit} s"


def test_criterion_01_singlet_table():
    with criterion("test_criterion_01_singlet_table"):
        x, y, z = mobit_measurements()
        t = build_table(singlet(), [x, y, z], [x, y, z])
        assert t == singlet_table()
        for i, j in itertools.product(range(3), repeat=2):
            block = t.block(i, j)
            if i == j:
                assert not block[0, 0] and not block[1, 1] and block[0, 1] and block[1, 0]
            else:
                assert int((~block).sum()) == 1


def test_criterion_02_kochen_specker():
    with criterion("test_criterion_02_kochen_specker"):
        f = mobit_family(2)
        assert noncontextual_search(f) is None
        tried = list(itertools.product((False, True), repeat=len(f.effects)))
        assert len(tried) == 8
        assert all(any(sum(v[k] for k in ctx) != 1 for ctx in f.contexts) for v in tried)
        assert noncontextual_assignments(f) == []


def test_criterion_03_joint_assignments():
    with criterion("test_criterion_03_joint_assignments"):
        assert count_joint_assignments(singlet_table()) == 64
        assert joint_assignment_survivors(singlet_table()) == []


def test_criterion_04_pseudo_telepathy():
    with criterion("test_criterion_04_pseudo_telepathy"):
        s = singlet_table()
        assert classical_winners(s) == []
        x, y, z = mobit_measurements()
        result = play_game(s, SharedState(singlet(), (x, y, z), (x, y, z)))
        assert result.wins_all and result.won_pairs == 9


def test_criterion_05_prbox():
    with criterion("test_criterion_05_prbox"):
        p = prbox_table()
        assert check_modal_ns(p)
        assert is_minimal_ns(p)
        assert strong_resolution(p) == ProbabilityTable(p.scenario, PRBOX_RESOLUTION)
        assert resolution_unique(p)
        assert lhv_membership(p) is None
        bounds = SearchBounds(fields=(2, 3), max_dim=2, max_outcomes=2, non_overlapping=True, states="all")
        found = mqt_search(p, bounds)
        assert found.verdict == "no", found.reason


def test_criterion_06_table_n():
    with criterion("test_criterion_06_table_n"):
        n = table_n()
        assert weak_resolution(n) is None
        report = infeasibility_certificate(n)
        ww = next(c for c in report.conflicts if c.block == ("W", "W"))
        clashes = ww.clashes()
        assert clashes[(0, 0)] == (Fraction(2, 3), Fraction(1, 3))
        assert clashes[(1, 1)] == (Fraction(1, 3), Fraction(2, 3))


def test_criterion_07_singlet_resolution():
    with criterion("test_criterion_07_singlet_resolution"):
        s = singlet_table()
        assert weak_resolution(s) == ProbabilityTable(s.scenario, SINGLET_RESOLUTION)
        assert resolution_unique(s)
        assert strong_resolution(s) is None
        assert strong_margin(s) == 0


def test_criterion_08_hall():
    with criterion("test_criterion_08_hall"):
        x, y, z = mobit_measurements()
        expected = ProbabilityTable(singlet_table().scenario, SINGLET_RESOLUTION)
        assert hall_resolution(singlet(), [x, y, z], [x, y, z]) == expected
        rng = np.random.default_rng(2024)
        for k in range(200):
            field = FieldSpec(int(rng.choice([2, 3, 5])))
            d = int(rng.integers(2, 5))
            psi = random_maximal_state(rng, field, d)
            meas1 = [_random_basis(rng, field, d, f"A{m}") for m in range(2)]
            meas2 = [_random_basis(rng, field, d, f"B{m}") for m in range(2)]
            res = hall_resolution(psi, meas1, meas2)
            assert check_prob_ns(res), k
            assert res.zero_on_blanks(build_table(psi, meas1, meas2)), k


def _random_basis(rng, field, d, label):
    from modalqt.states import Measurement, Subspace

    space = StateSpace(d, field)
    basis = random_invertible(rng, field, d).data
    return Measurement(tuple(Subspace(space, [row], dual=True) for row in basis), label)


def test_criterion_09_representation():
    with criterion("test_criterion_09_representation"):
        rng = np.random.default_rng(99)
        z2_maps = []
        for _ in range(100):
            field = FieldSpec(int(rng.choice([2, 3])))
            d = int(rng.choice([2, 3]))
            op = random_type_l(field, d, int(rng.integers(1, 4)), rng)
            back = kraus_from_extension(extend_to_joint(dilate(op), d), d)
            for line in projective_states(StateSpace(d, field)):
                assert back(line) == op(line)
            if field.p == 2 and d == 2:
                z2_maps.append(op)
        z2_maps.append(TypeLMap.from_lists([[[1, 0], [0, 1]], [[0, 1], [1, 0]]], 2))
        for op in z2_maps:
            assert verify_type_e(op, 2)


def test_criterion_10_structure():
    with criterion("test_criterion_10_structure"):
        points = list(enumerate_space(StateSpace.composite(FieldSpec(2), 2, 2), "projective_points"))
        assert len(points) == 15
        assert sum(map(is_product, points)) == 9
        subs = list(enumerate_space(StateSpace(3, FieldSpec(2)), "subspaces"))
        for a in subs:
            assert annihilator(annihilator(a)) == a
        for a, b in itertools.product(subs, repeat=2):
            if a <= b:
                assert annihilator(b) <= annihilator(a)
            assert annihilator(join(a, b)) == meet(annihilator(a), annihilator(b))
            assert annihilator(meet(a, b)) == join(annihilator(a), annihilator(b))
        rng = np.random.default_rng(10)
        for _ in range(500):
            field = FieldSpec(int(rng.choice([2, 3, 5])))
            psi = random_ket(rng, field, int(rng.integers(1, 5)), int(rng.integers(1, 5)))
            s = span([psi])
            assert schmidt(psi).s == reduce(s, 0).dim == reduce(s, 1).dim
        for _ in range(100):
            field = FieldSpec(int(rng.choice([2, 3, 5])))
            d = int(rng.integers(1, 5))
            m = random_subspace(rng, StateSpace(d, field), int(rng.integers(1, d + 1)))
            psi1 = purify(m)
            assert reduce(span([psi1]), 0) == m
            g = random_invertible(rng, field, m.dim)
            psi2 = Ket((g.data @ m.basis.data % field.p).reshape(-1), psi1.space)
            t = connect_purifications(psi1, psi2)
            assert t is not None and invert(t) is not None
            moved = (t.data @ psi1.array().reshape(m.dim, d)) % field.p
            assert span([Ket(moved.reshape(-1), psi1.space)]) == span([psi2])


def test_criterion_11_hierarchy():
    with criterion("test_criterion_11_hierarchy"):
        bounds = SearchBounds(fields=(2, 3), max_dim=2)
        s = classify(singlet_table(), bounds)
        assert s.wpr and not s.spr and s.mqt == "yes" and s.mqt_witness is not None
        w = s.mqt_witness
        assert build_table(w.state, w.meas1, w.meas2) == singlet_table()
        p = classify(prbox_table(), bounds)
        assert p.spr and not p.lhv and p.mqt == "no"
        n = classify(table_n(), bounds)
        assert n.ns and not n.wpr and n.mqt == "no"
        rng = np.random.default_rng(11)
        for _ in range(100):
            rows = tuple((f"A{i}", int(rng.integers(2, 4))) for i in range(int(rng.integers(1, 4))))
            cols = tuple((f"B{j}", int(rng.integers(2, 4))) for j in range(int(rng.integers(1, 4))))
            sc = Scenario(rows, cols)
            hs = [
                DeterministicLocalStrategy(
                    tuple(int(rng.integers(0, n)) for _, n in rows), tuple(int(rng.integers(0, n)) for _, n in cols)
                )
                for _ in range(int(rng.integers(1, 6)))
            ]
            t = hs[0].table(sc)
            for h in hs[1:]:
                t = t | h.table(sc)
            assert lhv_membership(t) is not None
            res = strong_resolution(t)
            assert res is not None and check_prob_ns(res) and res.zero_on_blanks(t)
