"""Probabilistic resolutions of possibility tables and the table hierarchy.

Feasibility questions are answered exactly with the rational simplex in
:mod:`modalqt.lp`. Each block owns its own no-signalling constraints, tying
its sub-row (sub-column) sums to a shared marginal variable, so an infeasible
system can be traced back to individual blocks.
"""

from __future__ import annotations

import itertools
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .field import FieldSpec
from .linalg import Matrix, matmul_mod, rank
from .lp import LinearProgramRational
from .states import (
    Bra,
    Ket,
    Measurement,
    StateSpace,
    enumerate_space,
    join_all,
    meet,
    schmidt_number,
)
from .tables import PossibilityTable, Scenario, check_modal_ns, is_minimal_ns, lhv_membership


class HallMatchingError(RuntimeError):
    """A sub-table of a maximally entangled state has no perfect matching."""


class ProbabilityTable:
    """Exact rational probabilities for every cell of a scenario."""

    __slots__ = ("scenario", "probs")

    def __init__(self, scenario: Scenario, probs):
        blocks = []
        for i in range(scenario.n_rows):
            row = []
            for j in range(scenario.n_cols):
                b = tuple(tuple(Fraction(v) for v in r) for r in probs[i][j])
                n, m = scenario.block_shape(i, j)
                if len(b) != n or any(len(r) != m for r in b):
                    raise ValueError(f"block ({i}, {j}) does not have shape {(n, m)}")
                row.append(b)
            blocks.append(tuple(row))
        self.scenario = scenario
        self.probs = tuple(blocks)

    def __getitem__(self, cell) -> Fraction:
        i, j, a, c = cell
        return self.probs[i][j][a][c]

    def support(self) -> PossibilityTable:
        return PossibilityTable(
            self.scenario,
            [[[[v != 0 for v in r] for r in b] for b in row] for row in self.probs],
            allow_empty=True,
        )

    def zero_on_blanks(self, t: PossibilityTable) -> bool:
        return all(t[cell] or self[cell] == 0 for cell in t.cells())

    def row_marginal(self, i: int, j: int) -> tuple[Fraction, ...]:
        return tuple(sum(r, Fraction(0)) for r in self.probs[i][j])

    def col_marginal(self, i: int, j: int) -> tuple[Fraction, ...]:
        return tuple(sum(col, Fraction(0)) for col in zip(*self.probs[i][j]))

    def __eq__(self, other):
        return isinstance(other, ProbabilityTable) and self.scenario == other.scenario and self.probs == other.probs

    def __hash__(self):
        return hash((self.scenario, self.probs))

    def __repr__(self):
        return f"ProbabilityTable({self.scenario.n_rows}x{self.scenario.n_cols})"


def check_prob_ns(pt: ProbabilityTable) -> bool:
    """Non-negativity, normalization and no-signalling, all checked exactly."""
    sc = pt.scenario
    for i, j in itertools.product(range(sc.n_rows), range(sc.n_cols)):
        block = pt.probs[i][j]
        if any(v < 0 for r in block for v in r):
            return False
        if sum((v for r in block for v in r), Fraction(0)) != 1:
            return False
    for i in range(sc.n_rows):
        if any(pt.row_marginal(i, j) != pt.row_marginal(i, 0) for j in range(1, sc.n_cols)):
            return False
    for j in range(sc.n_cols):
        if any(pt.col_marginal(i, j) != pt.col_marginal(0, j) for i in range(1, sc.n_rows)):
            return False
    return True


@dataclass
class _TableLP:
    lp: LinearProgramRational
    cell_var: dict[tuple[int, int, int, int], int]
    margin_var: int | None = None

    def table(self, x: Sequence[Fraction], scenario: Scenario) -> ProbabilityTable:
        probs = [
            [np.zeros(scenario.block_shape(i, j), dtype=object) for j in range(scenario.n_cols)]
            for i in range(scenario.n_rows)
        ]
        for b in (b for row in probs for b in row):
            b[...] = Fraction(0)
        for (i, j, a, c), k in self.cell_var.items():
            probs[i][j][a, c] = x[k]
        return ProbabilityTable(scenario, [[b.tolist() for b in row] for row in probs])


def _label(sc: Scenario, i: int, j: int) -> str:
    return f"{sc.rows[i][0]},{sc.cols[j][0]}"


def _table_lp(
    t: PossibilityTable, strong: bool = False, skip: frozenset[str] = frozenset()
) -> _TableLP:
    sc = t.scenario
    marked = t.marked()
    cell_var = {cell: k for k, cell in enumerate(marked)}
    n = len(marked)
    row_marg = {}
    for i, (_, outcomes) in enumerate(sc.rows):
        for a in range(outcomes):
            row_marg[i, a] = n
            n += 1
    col_marg = {}
    for j, (_, outcomes) in enumerate(sc.cols):
        for c in range(outcomes):
            col_marg[j, c] = n
            n += 1
    margin_var = None
    if strong:
        margin_var = n
        n += 1
    lp = LinearProgramRational(n)
    for i, j in itertools.product(range(sc.n_rows), range(sc.n_cols)):
        rows_n, cols_n = sc.block_shape(i, j)
        lab = _label(sc, i, j)
        lp.add({cell_var[cell]: 1 for cell in marked if cell[:2] == (i, j)}, "==", 1, f"norm[{lab}]")
        for a in range(rows_n):
            name = f"row-ns[{lab}]:{a}"
            if name not in skip:
                coeffs = {cell_var[i, j, a, c]: 1 for c in range(cols_n) if (i, j, a, c) in cell_var}
                coeffs[row_marg[i, a]] = -1
                lp.add(coeffs, "==", 0, name)
        for c in range(cols_n):
            name = f"col-ns[{lab}]:{c}"
            if name not in skip:
                coeffs = {cell_var[i, j, a, c]: 1 for a in range(rows_n) if (i, j, a, c) in cell_var}
                coeffs[col_marg[j, c]] = -1
                lp.add(coeffs, "==", 0, name)
    if strong:
        for cell, k in cell_var.items():
            i, j, a, c = cell
            lp.add({k: 1, margin_var: -1}, ">=", 0, f"margin[{_label(sc, i, j)}]:{a},{c}")
        lp.objective = {margin_var: 1}
    return _TableLP(lp, cell_var, margin_var)


def weak_resolution(t: PossibilityTable) -> ProbabilityTable | None:
    """A no-signalling probability table vanishing on blanks, if one exists."""
    tlp = _table_lp(t)
    res = tlp.lp.solve()
    if res.status != "optimal":
        return None
    return tlp.table(res.x, t.scenario)


def strong_margin(t: PossibilityTable) -> Fraction | None:
    """Largest m such that some weak resolution gives every mark probability >= m."""
    tlp = _table_lp(t, strong=True)
    res = tlp.lp.solve()
    return None if res.status != "optimal" else res.value


def strong_resolution(t: PossibilityTable) -> ProbabilityTable | None:
    """A weak resolution positive on every mark, found by maximizing the smallest mark."""
    tlp = _table_lp(t, strong=True)
    res = tlp.lp.solve()
    if res.status != "optimal" or res.value <= 0:
        return None
    return tlp.table(res.x, t.scenario)


def cell_ranges(t: PossibilityTable, skip: frozenset[str] = frozenset(), cells=None):
    """Exact (min, max) of each marked cell over the resolution polytope, or None if empty."""
    tlp = _table_lp(t, skip=skip)
    base = tlp.lp.feasible_region()
    if base is None:
        return None
    cells = tlp.cell_var if cells is None else cells
    ranges = {}
    for cell in cells:
        k = tlp.cell_var[cell]
        hi = base.copy().maximize({k: 1}).value
        lo = -base.copy().maximize({k: -1}).value
        ranges[cell] = (lo, hi)
    return ranges


def resolution_unique(t: PossibilityTable) -> bool:
    ranges = cell_ranges(t)
    if ranges is None:
        raise ValueError("table has no probabilistic resolution")
    return all(lo == hi for lo, hi in ranges.values())


@dataclass
class BlockConflict:
    """A block consistent with its row peers and with its column peers, but not with both.

    ``from_rows`` holds the cell values forced when only the row-side constraints
    of this block are kept; ``from_cols`` the same for the column side.
    """

    block: tuple[str, str]
    from_rows: dict[tuple[int, int], Fraction]
    from_cols: dict[tuple[int, int], Fraction]

    def clashes(self) -> dict[tuple[int, int], tuple[Fraction, Fraction]]:
        return {
            cell: (v, self.from_cols[cell])
            for cell, v in self.from_rows.items()
            if cell in self.from_cols and self.from_cols[cell] != v
        }


@dataclass
class Infeasibility:
    farkas: dict[str, Fraction]
    conflicts: list[BlockConflict] = field(default_factory=list)
    relaxable: list[tuple[str, str]] = field(default_factory=list)


def infeasibility_certificate(t: PossibilityTable) -> Infeasibility | None:
    """Why ``t`` has no weak resolution, or None if it has one.

    Besides a Farkas certificate, every block is tested by dropping its
    column-side (then its row-side) no-signalling constraints; blocks for which
    both relaxations are feasible are listed in ``relaxable``; those where the
    two sides force different cell values are reported in ``conflicts``.
    """
    tlp = _table_lp(t)
    res = tlp.lp.solve()
    if res.status == "optimal":
        return None
    report = Infeasibility(res.farkas)
    sc = t.scenario
    for i, j in itertools.product(range(sc.n_rows), range(sc.n_cols)):
        lab = _label(sc, i, j)
        rows_n, cols_n = sc.block_shape(i, j)
        col_side = frozenset(f"col-ns[{lab}]:{c}" for c in range(cols_n))
        row_side = frozenset(f"row-ns[{lab}]:{a}" for a in range(rows_n))
        block_cells = [cell for cell in t.marked() if cell[:2] == (i, j)]
        from_rows = cell_ranges(t, skip=col_side, cells=block_cells)
        if from_rows is None:
            continue
        from_cols = cell_ranges(t, skip=row_side, cells=block_cells)
        if from_cols is None:
            continue
        conflict = BlockConflict(
            (sc.rows[i][0], sc.cols[j][0]),
            {cell[2:]: lo for cell, (lo, hi) in from_rows.items() if lo == hi},
            {cell[2:]: lo for cell, (lo, hi) in from_cols.items() if lo == hi},
        )
        report.relaxable.append(conflict.block)
        if conflict.clashes():
            report.conflicts.append(conflict)
    return report


def max_matching(adjacency) -> list[tuple[int, int]]:
    """Maximum bipartite matching by augmenting paths.

    Rows are processed in index order and columns are tried lowest index first.
    """
    adj = [list(map(bool, r)) for r in adjacency]
    n_cols = max((len(r) for r in adj), default=0)
    owner: list[int | None] = [None] * n_cols

    def augment(u: int, seen: list[bool]) -> bool:
        for v in range(len(adj[u])):
            if adj[u][v] and not seen[v]:
                seen[v] = True
                if owner[v] is None or augment(owner[v], seen):
                    owner[v] = u
                    return True
        return False

    for u in range(len(adj)):
        augment(u, [False] * n_cols)
    return sorted((u, v) for v, u in enumerate(owner) if u is not None)


def fine_grained_basis(m: Measurement) -> list[tuple[int, Bra]]:
    """A basis of one-dimensional effects refining ``m``, each tagged with its outcome.

    Effects are split into their basis vectors; surplus vectors of an
    over-complete family are dropped greedily, in outcome order.
    """
    chosen: list[tuple[int, Bra]] = []
    rows: list[np.ndarray] = []
    for a, e in enumerate(m.effects):
        for bra in e.vectors():
            trial = Matrix(np.vstack(rows + [bra.array()]), m.space.field)
            if rank(trial) > len(rows):
                rows.append(bra.array())
                chosen.append((a, bra))
    if len(chosen) != m.space.dim:
        raise ValueError(f"measurement {m.label or '?'} does not cover the dual space")
    return chosen


def hall_resolution(
    psi: Ket, meas1: Sequence[Measurement], meas2: Sequence[Measurement]
) -> ProbabilityTable:
    """Weak resolution of the table of a maximally entangled state.

    In every block the fine-grained effects e_j, f_k with <e_j f_k|psi> != 0
    form a bipartite graph; a perfect matching exists by Hall's theorem and its
    edges receive probability 1/s each.
    """
    if psi.space.factor_dims is None or len(psi.space.factor_dims) != 2:
        raise ValueError("expected a bipartite state")
    d1, d2 = psi.space.factor_dims
    s = schmidt_number(psi)
    if not s == d1 == d2:
        raise ValueError(f"state has Schmidt number {s} on a {d1}x{d2} system; expected maximal")
    p = psi.space.p
    coeff = psi.array().reshape(d1, d2)
    scenario = Scenario(
        tuple((m.label or f"M{i}", m.outcomes) for i, m in enumerate(meas1)),
        tuple((m.label or f"M{j}", m.outcomes) for j, m in enumerate(meas2)),
    )
    fine1 = [fine_grained_basis(m) for m in meas1]
    fine2 = [fine_grained_basis(m) for m in meas2]
    weight = Fraction(1, s)
    probs = []
    for i, (m1, f1) in enumerate(zip(meas1, fine1)):
        row = []
        e = np.array([b.coords for _, b in f1], dtype=np.int64)
        for j, (m2, f2) in enumerate(zip(meas2, fine2)):
            f = np.array([b.coords for _, b in f2], dtype=np.int64)
            amp = matmul_mod(matmul_mod(e, coeff, p), f.T, p)
            matching = max_matching(amp != 0)
            if len(matching) != s:
                raise HallMatchingError(f"block ({scenario.rows[i][0]}, {scenario.cols[j][0]}) has no perfect matching")
            block = [[Fraction(0)] * m2.outcomes for _ in range(m1.outcomes)]
            for u, v in matching:
                block[f1[u][0]][f2[v][0]] += weight
            row.append(block)
        probs.append(row)
    return ProbabilityTable(scenario, probs)


# ---------------------------------------------------------------------------
# MQT membership by bounded search


@dataclass(frozen=True)
class SearchBounds:
    """Limits for the search over pure states and product measurements.

    ``states="schmidt"`` tries one state per Schmidt rank, sum_{k<s} |k,k>:
    every pure state is locally equivalent to one of these and local invertible
    maps only relabel measurements, so nothing is lost. ``states="all"`` walks
    every projective point instead. ``non_overlapping=None`` restricts to
    measurements with pairwise-disjoint effects exactly when the table is minimal.
    """

    fields: tuple[int, ...] = (2, 3)
    max_dim: int = 3
    max_outcomes: int = 3
    non_overlapping: bool | None = None
    states: str = "schmidt"
    budget: int = 200_000_000


@dataclass
class MQTWitness:
    state: Ket
    meas1: tuple[Measurement, ...]
    meas2: tuple[Measurement, ...]


@dataclass
class MQTSearchResult:
    verdict: str  # "yes", "no" or "unknown"
    witness: MQTWitness | None = None
    reason: str = ""
    examined: int = 0


class _Space:
    """Dual subspaces of one side, with their line incidences."""

    def __init__(self, field: FieldSpec, d: int):
        space = StateSpace(d, field)
        self.space = space
        self.subspaces = list(enumerate_space(space, "subspaces", dual=True))
        self.lines = np.array([b.coords for b in enumerate_space(space, "projective_points", dual=True)])
        index = {s: k for k, s in enumerate(self.subspaces)}
        self.full = index[space.full(dual=True)]
        self.incidence = np.array(
            [[s.contains(Bra(line, space)) for line in self.lines] for s in self.subspaces], dtype=np.int64
        )
        self._cands: dict[tuple[int, bool], np.ndarray] = {}

    def candidates(self, n: int, non_overlapping: bool) -> np.ndarray:
        key = (n, non_overlapping)
        if key not in self._cands:
            subs = self.subspaces
            out = []
            for combo in itertools.product(range(len(subs)), repeat=n):
                effects = [subs[k] for k in combo]
                if not join_all(effects, self.space, dual=True).is_full():
                    continue
                if non_overlapping and any(
                    not meet(a, b).is_null() for a, b in itertools.combinations(effects, 2)
                ):
                    continue
                out.append(combo)
            self._cands[key] = np.array(out, dtype=np.int64).reshape(-1, n)
        return self._cands[key]

    def measurement(self, combo, label: str) -> Measurement:
        return Measurement(tuple(self.subspaces[k] for k in combo), label)


def _states(field: FieldSpec, d1: int, d2: int, mode: str):
    space = StateSpace.composite(field, d1, d2)
    if mode == "all":
        yield from enumerate_space(space, "projective_points")
        return
    for s in range(1, min(d1, d2) + 1):
        coeff = np.zeros((d1, d2), dtype=np.int64)
        coeff[range(s), range(s)] = 1
        yield Ket(coeff.reshape(-1), space)


def mqt_search(t: PossibilityTable, bounds: SearchBounds = SearchBounds()) -> MQTSearchResult:
    """Look for a pure bipartite state and product measurements producing exactly ``t``."""
    sc = t.scenario
    if not check_modal_ns(t):
        return MQTSearchResult("no", reason="not no-signalling")
    if max(n for _, n in sc.rows + sc.cols) > bounds.max_outcomes:
        return MQTSearchResult("unknown", reason="outcome count beyond search bounds")
    non_overlapping = bounds.non_overlapping
    if non_overlapping is None:
        non_overlapping = is_minimal_ns(t)
    row_poss = [t.row_possible(i, 0) for i in range(sc.n_rows)]
    col_poss = [t.col_possible(0, j) for j in range(sc.n_cols)]
    examined = 0
    for p in bounds.fields:
        field = FieldSpec(p)
        sides = {d: _Space(field, d) for d in range(1, bounds.max_dim + 1)}
        for d1, d2 in itertools.product(range(1, bounds.max_dim + 1), repeat=2):
            s1, s2 = sides[d1], sides[d2]
            for psi in _states(field, d1, d2, bounds.states):
                coeff = psi.array().reshape(d1, d2)
                amp = matmul_mod(matmul_mod(s1.lines, coeff, p), s2.lines.T, p) != 0
                poss = (s1.incidence @ amp.astype(np.int64) @ s2.incidence.T) > 0
                # outcome-level marginals must match the table
                cands1 = []
                for i, (_, n) in enumerate(sc.rows):
                    c = s1.candidates(n, non_overlapping)
                    cands1.append(c[(poss[c, s2.full] == row_poss[i]).all(axis=1)])
                cands2 = []
                for j, (_, m) in enumerate(sc.cols):
                    c = s2.candidates(m, non_overlapping)
                    cands2.append(c[(poss[s1.full, c] == col_poss[j]).all(axis=1)])
                if any(len(c) == 0 for c in cands1 + cands2):
                    continue
                match = {}
                for i, j in itertools.product(range(sc.n_rows), range(sc.n_cols)):
                    c1, c2 = cands1[i], cands2[j]
                    examined += c1.size * c2.size
                    if examined > bounds.budget:
                        return MQTSearchResult("unknown", reason=f"search budget {bounds.budget} exhausted", examined=examined)
                    blocks = poss[c1[:, None, :, None], c2[None, :, None, :]]
                    match[i, j] = (blocks == t.block(i, j)[None, None]).all(axis=(2, 3))
                found = _assign(match, sc.n_rows, sc.n_cols)
                if found is not None:
                    xs, ys = found
                    witness = MQTWitness(
                        psi,
                        tuple(s1.measurement(cands1[i][x], sc.rows[i][0]) for i, x in enumerate(xs)),
                        tuple(s2.measurement(cands2[j][y], sc.cols[j][0]) for j, y in enumerate(ys)),
                    )
                    return MQTSearchResult("yes", witness, f"realized over Z{p} with dims {d1}x{d2}", examined)
    kinds = "non-overlapping " if non_overlapping else ""
    return MQTSearchResult(
        "no",
        reason=(
            f"no pure state over Z_p, p in {list(bounds.fields)}, subsystem dims <= {bounds.max_dim}, "
            f"with {kinds}product measurements reproduces the table"
        ),
        examined=examined,
    )


def _assign(match, n_rows: int, n_cols: int):
    """Pick one candidate per row and column measurement with all blocks matching."""
    domains0 = [np.ones(match[0, j].shape[1], dtype=bool) for j in range(n_cols)]

    def rec(i: int, chosen: list[int], domains: list[np.ndarray]):
        if i == n_rows:
            return chosen, [int(np.flatnonzero(d)[0]) for d in domains]
        for x in range(match[i, 0].shape[0]):
            new = [domains[j] & match[i, j][x] for j in range(n_cols)]
            if all(d.any() for d in new):
                out = rec(i + 1, chosen + [x], new)
                if out is not None:
                    return out
        return None

    return rec(0, [], domains0)


@dataclass
class Classification:
    ns: bool
    wpr: bool
    spr: bool
    lhv: bool
    mqt: str
    mqt_reason: str = ""
    mqt_witness: MQTWitness | None = None

    def flags(self) -> dict[str, object]:
        return {"ns": self.ns, "wpr": self.wpr, "spr": self.spr, "lhv": self.lhv, "mqt": self.mqt}


def classify(t: PossibilityTable, bounds: SearchBounds = SearchBounds()) -> Classification:
    ns = check_modal_ns(t)
    wpr = weak_resolution(t) is not None
    spr = wpr and strong_resolution(t) is not None
    lhv = lhv_membership(t) is not None
    if not ns:
        return Classification(ns, wpr, spr, lhv, "no", "not no-signalling")
    if not wpr:
        return Classification(ns, wpr, spr, lhv, "no", "not in WPR; every MQT table has a weak resolution")
    found = mqt_search(t, bounds)
    return Classification(ns, wpr, spr, lhv, found.verdict, found.reason, found.witness)
