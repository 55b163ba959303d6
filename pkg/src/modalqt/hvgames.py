"""Hidden-variable refutations and the pseudo-telepathy game."""

from __future__ import annotations

import itertools
from collections.abc import Mapping
from dataclasses import dataclass

import numpy as np

from .field import FieldSpec
from .linalg import Matrix, rank
from .states import BudgetExceeded, Ket, Measurement, StateSpace, Subspace, enumerate_space
from .tables import (
    DEFAULT_STRATEGY_BUDGET,
    DeterministicLocalStrategy,
    PossibilityTable,
    all_strategies,
    build_table,
    count_strategies,
)

DEFAULT_ASSIGNMENT_BUDGET = 1 << 20


@dataclass(frozen=True)
class ContextFamily:
    """Projective effects and the measurement bases (contexts) built from them."""

    effects: tuple[Subspace, ...]
    contexts: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        effects = tuple(self.effects)
        if len(set(effects)) != len(effects):
            raise ValueError("effects must be distinct")
        if any(not e.dual or e.dim != 1 for e in effects):
            raise ValueError("effects must be one-dimensional dual subspaces")
        space = effects[0].space
        for ctx in self.contexts:
            rows = np.vstack([effects[k].basis.data for k in ctx])
            if len(ctx) != space.dim or rank(Matrix(rows, space.field)) != space.dim:
                raise ValueError(f"context {ctx} is not a basis")
        object.__setattr__(self, "effects", effects)
        object.__setattr__(self, "contexts", tuple(tuple(c) for c in self.contexts))

    @classmethod
    def from_bases(cls, space: StateSpace) -> ContextFamily:
        """Every projective dual point of ``space`` with every basis among them as a context."""
        points = [b.span() for b in enumerate_space(space, "projective_points", dual=True)]
        index = {e: k for k, e in enumerate(points)}
        contexts = sorted(
            {tuple(sorted(index[b.span()] for b in basis)) for basis in enumerate_space(space, "bases", dual=True)}
        )
        return cls(tuple(points), tuple(contexts))


def mobit_family(field: FieldSpec | int = 2) -> ContextFamily:
    """The single-mobit family: all projective effects, every basis a context."""
    field = field if isinstance(field, FieldSpec) else FieldSpec(field)
    return ContextFamily.from_bases(StateSpace(2, field))


def _assignments(f: ContextFamily, budget: int):
    total = 2 ** len(f.effects)
    if total > budget:
        raise BudgetExceeded(f"{total} assignments exceed budget {budget}")
    for values in itertools.product((False, True), repeat=len(f.effects)):
        if all(sum(values[k] for k in ctx) == 1 for ctx in f.contexts):
            yield values


def noncontextual_search(f: ContextFamily, budget: int = DEFAULT_ASSIGNMENT_BUDGET) -> tuple[bool, ...] | None:
    """First yes/no assignment with exactly one yes per context, in lexicographic order."""
    return next(_assignments(f, budget), None)


def noncontextual_assignments(f: ContextFamily, budget: int = DEFAULT_ASSIGNMENT_BUDGET) -> list[tuple[bool, ...]]:
    return list(_assignments(f, budget))


@dataclass(frozen=True)
class JointAssignment(DeterministicLocalStrategy):
    """Definite outcomes for every measurement of both parties."""

    def outcome(self, party: int, measurement: int) -> int:
        return (self.f1, self.f2)[party - 1][measurement]


def count_joint_assignments(t: PossibilityTable) -> int:
    return count_strategies(t.scenario)


def joint_assignment_survivors(t: PossibilityTable, budget: int = DEFAULT_STRATEGY_BUDGET) -> list[JointAssignment]:
    """Assignments that land on a mark of ``t`` for every pair of measurements."""
    return [JointAssignment(h.f1, h.f2) for h in all_strategies(t.scenario, budget) if h.agrees_with(t)]


HardyMapping = Mapping[str, tuple[str | int, bool]]


def hardy_check(t: PossibilityTable, mapping: HardyMapping) -> bool:
    """Whether the four Hardy facts hold in ``t``.

    ``A`` and ``B`` name party-1 measurements, ``C`` and ``D`` party-2 ones;
    a true polarity negates the measurement by swapping its two outcomes.
    """
    sc = t.scenario
    if set(mapping) != {"A", "B", "C", "D"}:
        raise ValueError("mapping must assign exactly A, B, C and D")
    resolved = {}
    for name, (key, flip) in mapping.items():
        side = sc.rows if name in "AB" else sc.cols
        try:
            k = sc.row_index(key) if name in "AB" else sc.col_index(key)
        except (KeyError, IndexError, ValueError) as exc:
            raise ValueError(f"{name}: unknown measurement {key!r}") from exc
        if side[k][1] != 2:
            raise ValueError(f"{name}: Hardy facts need two-outcome measurements")
        resolved[name] = (k, bool(flip))

    def marked(r: str, c: str, a: int, b: int) -> bool:
        i, fi = resolved[r]
        j, fj = resolved[c]
        return bool(t[i, j, a ^ fi, b ^ fj])

    plus, minus = 0, 1
    return (
        not marked("A", "D", plus, plus)
        and not marked("B", "C", plus, plus)
        and marked("B", "D", plus, plus)
        and not marked("A", "C", minus, minus)
    )


@dataclass(frozen=True)
class SharedState:
    """A quantum strategy: a shared bipartite state and each player's measurements."""

    state: Ket
    meas1: tuple[Measurement, ...]
    meas2: tuple[Measurement, ...]


@dataclass
class GameResult:
    wins_all: bool
    losing_pair: tuple[str, str] | None
    won_pairs: int


def play_game(t: PossibilityTable, strategy: DeterministicLocalStrategy | SharedState) -> GameResult:
    """Referee every question pair; an answer wins when it lands on a mark of ``t``.

    A shared-state strategy wins a pair only if every jointly possible answer does.
    """
    sc = t.scenario
    if isinstance(strategy, SharedState):
        if len(strategy.meas1) != sc.n_rows or len(strategy.meas2) != sc.n_cols:
            raise ValueError("strategy does not fit the scenario")
        played = build_table(strategy.state, strategy.meas1, strategy.meas2).marks
        wins = lambda i, j: not (played[i][j] & ~t.block(i, j)).any()  # noqa: E731
    else:
        if not strategy.conforms(sc):
            raise ValueError("strategy does not fit the scenario")
        wins = lambda i, j: bool(t[i, j, strategy.f1[i], strategy.f2[j]])  # noqa: E731
    losing = None
    won = 0
    for i, j in itertools.product(range(sc.n_rows), range(sc.n_cols)):
        if wins(i, j):
            won += 1
        elif losing is None:
            losing = (sc.rows[i][0], sc.cols[j][0])
    return GameResult(losing is None, losing, won)


def classical_winners(t: PossibilityTable, budget: int = DEFAULT_STRATEGY_BUDGET) -> list[DeterministicLocalStrategy]:
    return [h for h in all_strategies(t.scenario, budget) if play_game(t, h).wins_all]
