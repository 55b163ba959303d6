"""Bipartite possibility tables, modal no-signalling, and local deterministic models."""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterator, Sequence
from dataclasses import dataclass

import numpy as np

from .states import BudgetExceeded, Ket, Measurement, Subspace, is_possible, span, tensor_subspace, validate_measurement

DEFAULT_STRATEGY_BUDGET = 1_000_000


@dataclass(frozen=True)
class Scenario:
    """Measurement labels and outcome counts for each party."""

    rows: tuple[tuple[str, int], ...]
    cols: tuple[tuple[str, int], ...]

    def __post_init__(self):
        rows = tuple((str(lab), int(n)) for lab, n in self.rows)
        cols = tuple((str(lab), int(n)) for lab, n in self.cols)
        if not rows or not cols:
            raise ValueError("each party needs at least one measurement")
        if any(n < 1 for _, n in rows + cols):
            raise ValueError("outcome counts must be at least 1")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)

    @classmethod
    def uniform(cls, labels1: Sequence[str], labels2: Sequence[str], outcomes: int) -> Scenario:
        return cls(tuple((lab, outcomes) for lab in labels1), tuple((lab, outcomes) for lab in labels2))

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    @property
    def n_cols(self) -> int:
        return len(self.cols)

    def block_shape(self, i: int, j: int) -> tuple[int, int]:
        return self.rows[i][1], self.cols[j][1]

    def row_index(self, key: str | int) -> int:
        return _index(self.rows, key)

    def col_index(self, key: str | int) -> int:
        return _index(self.cols, key)


def _index(entries, key) -> int:
    if isinstance(key, int):
        if not 0 <= key < len(entries):
            raise IndexError(f"measurement index {key} out of range")
        return key
    for i, (lab, _) in enumerate(entries):
        if lab == key:
            return i
    raise KeyError(f"no measurement labelled {key!r}")


class PossibilityTable:
    """Boolean marks for every (row measurement, column measurement, outcome pair)."""

    __slots__ = ("scenario", "marks")

    def __init__(self, scenario: Scenario, marks, *, allow_empty: bool = False):
        blocks = []
        for i in range(scenario.n_rows):
            row = []
            for j in range(scenario.n_cols):
                b = np.array(marks[i][j], dtype=bool)
                if b.shape != scenario.block_shape(i, j):
                    raise ValueError(f"block ({i}, {j}) has shape {b.shape}, expected {scenario.block_shape(i, j)}")
                if not allow_empty and not b.any():
                    raise ValueError(f"block ({scenario.rows[i][0]}, {scenario.cols[j][0]}) has no possible outcome")
                b.flags.writeable = False
                row.append(b)
            blocks.append(tuple(row))
        self.scenario = scenario
        self.marks = tuple(blocks)

    def block(self, i: int, j: int) -> np.ndarray:
        return self.marks[i][j]

    def cells(self) -> Iterator[tuple[int, int, int, int]]:
        """All (i, j, a, c) cells in row-major order."""
        for i, j in itertools.product(range(self.scenario.n_rows), range(self.scenario.n_cols)):
            n, m = self.scenario.block_shape(i, j)
            for a, c in itertools.product(range(n), range(m)):
                yield i, j, a, c

    def marked(self) -> list[tuple[int, int, int, int]]:
        return [cell for cell in self.cells() if self.marks[cell[0]][cell[1]][cell[2], cell[3]]]

    def __getitem__(self, cell) -> bool:
        i, j, a, c = cell
        return bool(self.marks[i][j][a, c])

    def row_possible(self, i: int, j: int) -> np.ndarray:
        return self.marks[i][j].any(axis=1)

    def col_possible(self, i: int, j: int) -> np.ndarray:
        return self.marks[i][j].any(axis=0)

    def with_marks(self, cells, value: bool) -> list[list[np.ndarray]]:
        blocks = [[b.copy() for b in row] for row in self.marks]
        for i, j, a, c in cells:
            blocks[i][j][a, c] = value
        return blocks

    def __eq__(self, other):
        return (
            isinstance(other, PossibilityTable)
            and self.scenario == other.scenario
            and all(np.array_equal(a, b) for ra, rb in zip(self.marks, other.marks) for a, b in zip(ra, rb))
        )

    def __hash__(self):
        return hash((self.scenario, tuple(b.tobytes() for row in self.marks for b in row)))

    def __or__(self, other: PossibilityTable) -> PossibilityTable:
        return table_join(self, other)

    def __le__(self, other: PossibilityTable) -> bool:
        return table_leq(self, other)

    def __repr__(self):
        return f"PossibilityTable({len(self.marked())} marks, {self.scenario.n_rows}x{self.scenario.n_cols})"


def build_table(
    state: Subspace | Ket, meas1: Sequence[Measurement], meas2: Sequence[Measurement]
) -> PossibilityTable:
    """Possibility table of a joint state under product measurements."""
    if isinstance(state, Ket):
        state = span([state])
    for m in list(meas1) + list(meas2):
        if not validate_measurement(m):
            raise ValueError(f"measurement {m.label or '?'} does not cover the dual space")
    scenario = Scenario(
        tuple((m.label or f"M{i}", m.outcomes) for i, m in enumerate(meas1)),
        tuple((m.label or f"M{j}", m.outcomes) for j, m in enumerate(meas2)),
    )
    blocks = [
        [
            [[is_possible(tensor_subspace(e, f), state) for f in m2.effects] for e in m1.effects]
            for m2 in meas2
        ]
        for m1 in meas1
    ]
    return PossibilityTable(scenario, blocks, allow_empty=True)


def check_modal_ns(t: PossibilityTable) -> bool:
    """Each party's possible outcomes do not depend on the other party's measurement."""
    sc = t.scenario
    for i in range(sc.n_rows):
        ref = t.row_possible(i, 0)
        if any(not np.array_equal(ref, t.row_possible(i, j)) for j in range(1, sc.n_cols)):
            return False
    for j in range(sc.n_cols):
        ref = t.col_possible(0, j)
        if any(not np.array_equal(ref, t.col_possible(i, j)) for i in range(1, sc.n_rows)):
            return False
    return True


def _same_scenario(a: PossibilityTable, b: PossibilityTable):
    if a.scenario != b.scenario:
        raise ValueError("tables have different scenarios")


def table_join(a: PossibilityTable, b: PossibilityTable) -> PossibilityTable:
    _same_scenario(a, b)
    return PossibilityTable(
        a.scenario, [[x | y for x, y in zip(ra, rb)] for ra, rb in zip(a.marks, b.marks)], allow_empty=True
    )


def table_leq(a: PossibilityTable, b: PossibilityTable) -> bool:
    """Every possible result of ``a`` is possible in ``b``."""
    _same_scenario(a, b)
    return all(not (x & ~y).any() for ra, rb in zip(a.marks, b.marks) for x, y in zip(ra, rb))


def ns_core(scenario: Scenario, blocks) -> list[list[np.ndarray]]:
    """Largest modally no-signalling mark set contained in ``blocks``.

    Sub-rows (sub-columns) that are empty in some block of their measurement
    row (column) are cleared everywhere until nothing changes.
    """
    blocks = [[np.array(b, dtype=bool) for b in row] for row in blocks]
    changed = True
    while changed:
        changed = False
        for i in range(scenario.n_rows):
            poss = np.logical_and.reduce([blocks[i][j].any(axis=1) for j in range(scenario.n_cols)])
            for j in range(scenario.n_cols):
                if blocks[i][j][~poss].any():
                    blocks[i][j][~poss] = False
                    changed = True
        for j in range(scenario.n_cols):
            poss = np.logical_and.reduce([blocks[i][j].any(axis=0) for i in range(scenario.n_rows)])
            for i in range(scenario.n_rows):
                if blocks[i][j][:, ~poss].any():
                    blocks[i][j][:, ~poss] = False
                    changed = True
    return blocks


def is_minimal_ns(t: PossibilityTable) -> bool:
    """No strictly smaller no-signalling table with nonempty blocks lies below ``t``.

    Any such table misses some mark x, hence lies below the no-signalling core of
    ``t`` minus x; checking every single-mark removal is therefore exhaustive.
    """
    if not check_modal_ns(t):
        raise ValueError("minimality is only defined for no-signalling tables")
    for cell in t.marked():
        core = ns_core(t.scenario, t.with_marks([cell], False))
        if all(b.any() for row in core for b in row):
            return False
    return True


@dataclass(frozen=True)
class DeterministicLocalStrategy:
    """One fixed outcome per measurement for each party."""

    f1: tuple[int, ...]
    f2: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "f1", tuple(int(x) for x in self.f1))
        object.__setattr__(self, "f2", tuple(int(x) for x in self.f2))

    def conforms(self, scenario: Scenario) -> bool:
        return (
            len(self.f1) == scenario.n_rows
            and len(self.f2) == scenario.n_cols
            and all(0 <= a < n for a, (_, n) in zip(self.f1, scenario.rows))
            and all(0 <= c < n for c, (_, n) in zip(self.f2, scenario.cols))
        )

    def table(self, scenario: Scenario) -> PossibilityTable:
        if not self.conforms(scenario):
            raise ValueError("strategy does not fit the scenario")
        blocks = []
        for i, a in enumerate(self.f1):
            row = []
            for j, c in enumerate(self.f2):
                b = np.zeros(scenario.block_shape(i, j), dtype=bool)
                b[a, c] = True
                row.append(b)
            blocks.append(row)
        return PossibilityTable(scenario, blocks)

    def agrees_with(self, t: PossibilityTable) -> bool:
        return all(t.marks[i][j][a, c] for i, a in enumerate(self.f1) for j, c in enumerate(self.f2))


def count_strategies(scenario: Scenario) -> int:
    return math.prod(n for _, n in scenario.rows) * math.prod(n for _, n in scenario.cols)


def all_strategies(scenario: Scenario, budget: int = DEFAULT_STRATEGY_BUDGET) -> Iterator[DeterministicLocalStrategy]:
    total = count_strategies(scenario)
    if total > budget:
        raise BudgetExceeded(f"{total} deterministic strategies exceed budget {budget}")
    side1 = itertools.product(*(range(n) for _, n in scenario.rows))
    side2 = list(itertools.product(*(range(n) for _, n in scenario.cols)))
    for f1 in side1:
        for f2 in side2:
            yield DeterministicLocalStrategy(f1, f2)


def compatible_strategies(t: PossibilityTable, budget: int = DEFAULT_STRATEGY_BUDGET) -> list[DeterministicLocalStrategy]:
    """Deterministic strategies whose tables lie below ``t``."""
    return [h for h in all_strategies(t.scenario, budget) if h.agrees_with(t)]


def lhv_membership(t: PossibilityTable, budget: int = DEFAULT_STRATEGY_BUDGET) -> list[DeterministicLocalStrategy] | None:
    """Deterministic strategies whose join is exactly ``t``, or None if none exist."""
    survivors = compatible_strategies(t, budget)
    covered = [[np.zeros_like(b) for b in row] for row in t.marks]
    for h in survivors:
        for i, a in enumerate(h.f1):
            for j, c in enumerate(h.f2):
                covered[i][j][a, c] = True
    if all(np.array_equal(x, y) for rx, ry in zip(covered, t.marks) for x, y in zip(rx, ry)):
        return survivors
    return None


# Published tables. Rows of each block are system-1 outcomes, columns system-2 outcomes,
# outcome 0 being "+" and outcome 1 being "-".
_ANTI = [[0, 1], [1, 0]]
_DIAG = [[1, 0], [0, 1]]
_SINGLET_BLOCKS = [
    [_ANTI, [[1, 0], [1, 1]], [[1, 1], [0, 1]]],
    [[[1, 1], [0, 1]], _ANTI, [[1, 0], [1, 1]]],
    [[[1, 0], [1, 1]], [[1, 1], [0, 1]], _ANTI],
]
_PRBOX_BLOCKS = [[_DIAG, _DIAG], [_DIAG, _ANTI]]
_I3 = np.eye(3, dtype=int).tolist()
# None marks the two blocks that are not printed.
TABLE_N_PRINTED = [
    [[[0, 1, 0], [0, 0, 1], [1, 0, 0]], _I3, None],
    [_I3, _I3, [[1, 0, 0], [0, 1, 0], [0, 1, 0]]],
    [None, [[1, 1, 0], [0, 0, 1], [0, 0, 0]], [[1, 0, 0], [0, 1, 0], [0, 0, 0]]],
]


def singlet_table() -> PossibilityTable:
    return PossibilityTable(Scenario.uniform("XYZ", "XYZ", 2), _SINGLET_BLOCKS)


def prbox_table() -> PossibilityTable:
    return PossibilityTable(Scenario.uniform("AB", "CD", 2), _PRBOX_BLOCKS)


def complete_blocks(scenario: Scenario, blocks) -> list[list[np.ndarray]]:
    """Fill missing (None) blocks with every outcome pair allowed by the printed marginals."""
    filled = []
    for i in range(scenario.n_rows):
        row = []
        for j in range(scenario.n_cols):
            if blocks[i][j] is not None:
                row.append(np.array(blocks[i][j], dtype=bool))
                continue
            rows_ok = np.logical_or.reduce(
                [np.array(blocks[i][k], dtype=bool).any(axis=1) for k in range(scenario.n_cols) if blocks[i][k] is not None]
            )
            cols_ok = np.logical_or.reduce(
                [np.array(blocks[k][j], dtype=bool).any(axis=0) for k in range(scenario.n_rows) if blocks[k][j] is not None]
            )
            row.append(np.outer(rows_ok, cols_ok))
        filled.append(row)
    return filled


def table_n() -> PossibilityTable:
    scenario = Scenario.uniform("UVW", "UVW", 3)
    return PossibilityTable(scenario, complete_blocks(scenario, TABLE_N_PRINTED))


def fixtures() -> dict[str, PossibilityTable]:
    return {"singlet_table": singlet_table(), "prbox_table": prbox_table(), "table_n": table_n()}
