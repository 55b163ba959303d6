"""JSON encoding of tables, states, measurements, maps and strategies.

Schemas (all keys required unless noted)::

    scenario      {"rows": [{"label": str, "outcomes": int}, ...], "cols": [...]}
    table         {"scenario": scenario, "blocks": [{"row": str, "col": str, "marks": [[0|1]]}]}
    probabilities {"scenario": scenario, "blocks": [{"row": str, "col": str, "probs": [["n/d"]]}]}
    ket           {"field": p, "dims": [d, ...], "coords": [int]}
    subspace      {"field": p, "dims": [d, ...], "dual": bool, "basis": [[int]]}
    measurement   {"label": str (optional), "effects": [[[int]], ...]}   each effect a list of spanning vectors
    kraus         {"field": p, "ops": [[[int]], ...]}
    strategy      {"classical": {"f1": [int], "f2": [int]}}
                  or {"shared_state": {"state": ket, "meas1": [measurement], "meas2": [measurement]}}

Fractions are written as "n/d" strings so that every value survives a round trip.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

import numpy as np

from .channels import TypeLMap
from .field import FieldSpec
from .hvgames import SharedState
from .resolve import ProbabilityTable
from .states import Ket, Measurement, StateSpace, Subspace
from .tables import DeterministicLocalStrategy, PossibilityTable, Scenario


class SchemaError(ValueError):
    """Malformed input; ``path`` locates the offending value."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _get(obj: Any, key: str, path: str, kind: type | tuple[type, ...] | None = None):
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an object")
    if key not in obj:
        raise SchemaError(f"{path}.{key}", "missing")
    value = obj[key]
    if kind is not None and (not isinstance(value, kind) or (kind is int and isinstance(value, bool))):
        raise SchemaError(f"{path}.{key}", f"expected {_kind_name(kind)}")
    return value


def _kind_name(kind) -> str:
    names = {int: "an integer", str: "a string", list: "a list", dict: "an object", bool: "a boolean"}
    if isinstance(kind, tuple):
        return " or ".join(names.get(k, k.__name__) for k in kind)
    return names.get(kind, kind.__name__)


def _int_matrix(value, path: str, cols: int | None = None) -> list[list[int]]:
    if not isinstance(value, list):
        raise SchemaError(path, "expected a list of rows")
    out = []
    for r, row in enumerate(value):
        if not isinstance(row, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in row):
            raise SchemaError(f"{path}[{r}]", "expected a list of integers")
        if cols is not None and len(row) != cols:
            raise SchemaError(f"{path}[{r}]", f"expected {cols} entries")
        out.append(row)
    return out


def _field(obj, path: str) -> FieldSpec:
    p = _get(obj, "field", path, int)
    try:
        return FieldSpec(p)
    except ValueError as exc:
        raise SchemaError(f"{path}.field", str(exc)) from exc


# -- fractions


def fraction_to_json(x: Fraction) -> str:
    return str(Fraction(x))


def fraction_from_json(value, path: str = "$") -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise SchemaError(path, 'expected an integer or an "n/d" string')
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise SchemaError(path, f"bad fraction {value!r}") from exc


# -- tables


def scenario_to_json(sc: Scenario) -> dict:
    return {
        "rows": [{"label": label, "outcomes": n} for label, n in sc.rows],
        "cols": [{"label": label, "outcomes": n} for label, n in sc.cols],
    }


def scenario_from_json(obj, path: str = "$") -> Scenario:
    sides = []
    for side in ("rows", "cols"):
        entries = _get(obj, side, path, list)
        parsed = []
        for k, e in enumerate(entries):
            p = f"{path}.{side}[{k}]"
            parsed.append((_get(e, "label", p, str), _get(e, "outcomes", p, int)))
        sides.append(tuple(parsed))
    try:
        return Scenario(*sides)
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from exc


def _blocks(obj, path: str, sc: Scenario, key: str, convert):
    entries = _get(obj, "blocks", path, list)
    grid: list[list[Any]] = [[None] * sc.n_cols for _ in range(sc.n_rows)]
    for k, e in enumerate(entries):
        p = f"{path}.blocks[{k}]"
        try:
            i = sc.row_index(_get(e, "row", p, (str, int)))
        except (KeyError, IndexError, ValueError) as exc:
            raise SchemaError(f"{p}.row", "unknown measurement") from exc
        try:
            j = sc.col_index(_get(e, "col", p, (str, int)))
        except (KeyError, IndexError, ValueError) as exc:
            raise SchemaError(f"{p}.col", "unknown measurement") from exc
        if grid[i][j] is not None:
            raise SchemaError(p, "duplicate block")
        n, m = sc.block_shape(i, j)
        rows = _get(e, key, p, list)
        if len(rows) != n:
            raise SchemaError(f"{p}.{key}", f"expected {n} rows")
        block = []
        for a, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != m:
                raise SchemaError(f"{p}.{key}[{a}]", f"expected a list of {m} entries")
            block.append([convert(v, f"{p}.{key}[{a}][{c}]") for c, v in enumerate(row)])
        grid[i][j] = block
    for i in range(sc.n_rows):
        for j in range(sc.n_cols):
            if grid[i][j] is None:
                raise SchemaError(f"{path}.blocks", f"missing block ({sc.rows[i][0]}, {sc.cols[j][0]})")
    return grid


def _mark(v, path: str) -> bool:
    if v not in (0, 1) or isinstance(v, float):
        raise SchemaError(path, "expected 0 or 1")
    return bool(v)


def table_to_json(t: PossibilityTable) -> dict:
    sc = t.scenario
    return {
        "scenario": scenario_to_json(sc),
        "blocks": [
            {"row": sc.rows[i][0], "col": sc.cols[j][0], "marks": t.block(i, j).astype(int).tolist()}
            for i in range(sc.n_rows)
            for j in range(sc.n_cols)
        ],
    }


def table_from_json(obj, path: str = "$") -> PossibilityTable:
    sc = scenario_from_json(_get(obj, "scenario", path, dict), f"{path}.scenario")
    grid = _blocks(obj, path, sc, "marks", _mark)
    try:
        return PossibilityTable(sc, grid)
    except ValueError as exc:
        raise SchemaError(f"{path}.blocks", str(exc)) from exc


def probabilities_to_json(pt: ProbabilityTable) -> dict:
    sc = pt.scenario
    return {
        "scenario": scenario_to_json(sc),
        "blocks": [
            {
                "row": sc.rows[i][0],
                "col": sc.cols[j][0],
                "probs": [[fraction_to_json(v) for v in r] for r in pt.probs[i][j]],
            }
            for i in range(sc.n_rows)
            for j in range(sc.n_cols)
        ],
    }


def probabilities_from_json(obj, path: str = "$") -> ProbabilityTable:
    sc = scenario_from_json(_get(obj, "scenario", path, dict), f"{path}.scenario")
    return ProbabilityTable(sc, _blocks(obj, path, sc, "probs", fraction_from_json))


# -- states and measurements


def _space(obj, path: str) -> StateSpace:
    field = _field(obj, path)
    dims = _get(obj, "dims", path, list)
    if not dims or not all(isinstance(d, int) and not isinstance(d, bool) and d >= 1 for d in dims):
        raise SchemaError(f"{path}.dims", "expected a non-empty list of positive integers")
    return StateSpace.composite(field, *dims)


def _space_json(space: StateSpace) -> dict:
    return {"field": space.p, "dims": list(space.factors)}


def ket_to_json(k: Ket) -> dict:
    return {**_space_json(k.space), "coords": list(k.coords)}


def ket_from_json(obj, path: str = "$") -> Ket:
    space = _space(obj, path)
    coords = _int_matrix([_get(obj, "coords", path, list)], f"{path}.coords", space.dim)[0]
    return Ket(coords, space)


def subspace_to_json(s: Subspace) -> dict:
    return {**_space_json(s.space), "dual": s.dual, "basis": s.basis.tolist()}


def subspace_from_json(obj, path: str = "$") -> Subspace:
    space = _space(obj, path)
    dual = _get(obj, "dual", path, bool) if "dual" in obj else False
    basis = _int_matrix(_get(obj, "basis", path, list), f"{path}.basis", space.dim)
    return Subspace(space, np.array(basis, dtype=np.int64).reshape(-1, space.dim), dual=dual)


def measurement_to_json(m: Measurement) -> dict:
    return {"label": m.label, "effects": [e.basis.tolist() for e in m.effects]}


def measurement_from_json(obj, field: FieldSpec, path: str = "$") -> Measurement:
    effects = _get(obj, "effects", path, list)
    if not effects:
        raise SchemaError(f"{path}.effects", "a measurement needs at least one effect")
    dim = None
    spans = []
    for a, e in enumerate(effects):
        p = f"{path}.effects[{a}]"
        vectors = _int_matrix(e, p, dim)
        if vectors:
            dim = len(vectors[0])
        spans.append(vectors)
    if dim is None:
        raise SchemaError(f"{path}.effects", "cannot infer the dimension from empty effects")
    space = StateSpace(dim, field)
    label = obj.get("label", "")
    if not isinstance(label, str):
        raise SchemaError(f"{path}.label", "expected a string")
    return Measurement(
        tuple(Subspace(space, np.array(v, dtype=np.int64).reshape(-1, dim), dual=True) for v in spans), label
    )


def measurements_from_json(value, field: FieldSpec, path: str = "$") -> tuple[Measurement, ...]:
    if not isinstance(value, list):
        raise SchemaError(path, "expected a list of measurements")
    return tuple(measurement_from_json(m, field, f"{path}[{k}]") for k, m in enumerate(value))


# -- maps and strategies


def kraus_to_json(m: TypeLMap) -> dict:
    return {"field": m.field.p, "ops": [a.tolist() for a in m.kraus]}


def kraus_from_json(obj, path: str = "$", unconditional: bool = True) -> TypeLMap:
    field = _field(obj, path)
    ops = _get(obj, "ops", path, list)
    if not ops:
        raise SchemaError(f"{path}.ops", "expected at least one operator")
    mats = [_int_matrix(a, f"{path}.ops[{k}]") for k, a in enumerate(ops)]
    try:
        return TypeLMap.from_lists(mats, field, unconditional)
    except ValueError as exc:
        raise SchemaError(f"{path}.ops", str(exc)) from exc


def strategy_to_json(s: DeterministicLocalStrategy | SharedState) -> dict:
    if isinstance(s, SharedState):
        return {
            "shared_state": {
                "state": ket_to_json(s.state),
                "meas1": [measurement_to_json(m) for m in s.meas1],
                "meas2": [measurement_to_json(m) for m in s.meas2],
            }
        }
    return {"classical": {"f1": list(s.f1), "f2": list(s.f2)}}


def strategy_from_json(obj, path: str = "$") -> DeterministicLocalStrategy | SharedState:
    if isinstance(obj, dict) and "classical" in obj:
        c = _get(obj, "classical", path, dict)
        p = f"{path}.classical"
        f1 = _int_matrix([_get(c, "f1", p, list)], f"{p}.f1")[0]
        f2 = _int_matrix([_get(c, "f2", p, list)], f"{p}.f2")[0]
        return DeterministicLocalStrategy(tuple(f1), tuple(f2))
    if isinstance(obj, dict) and "shared_state" in obj:
        s = _get(obj, "shared_state", path, dict)
        p = f"{path}.shared_state"
        state = ket_from_json(_get(s, "state", p, dict), f"{p}.state")
        return SharedState(
            state,
            measurements_from_json(_get(s, "meas1", p, list), state.space.field, f"{p}.meas1"),
            measurements_from_json(_get(s, "meas2", p, list), state.space.field, f"{p}.meas2"),
        )
    raise SchemaError(path, 'expected a "classical" or "shared_state" strategy')


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=2)


def loads(text: str, path: str = "$"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(path, f"invalid JSON ({exc.msg} at line {exc.lineno}, column {exc.colno})") from exc
