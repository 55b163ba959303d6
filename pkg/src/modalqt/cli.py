"""Command-line interface.

Exit codes: 0 for an affirmative or successful result, 1 for a decided
negative one (infeasible, signalling, no winning strategy), 2 for errors and
undecided searches.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .channels import dilate, extend_to_joint, kraus_from_extension, maps_agree, verify_type_e
from .field import FieldSpec
from .hvgames import (
    SharedState,
    classical_winners,
    count_joint_assignments,
    hardy_check,
    joint_assignment_survivors,
    mobit_family,
    noncontextual_assignments,
    play_game,
)
from .render import format_infeasibility, format_probabilities, format_table
from .resolve import (
    SearchBounds,
    classify,
    infeasibility_certificate,
    strong_margin,
    strong_resolution,
    weak_resolution,
)
from .serialize import (
    SchemaError,
    fraction_to_json,
    ket_from_json,
    ket_to_json,
    kraus_from_json,
    kraus_to_json,
    measurement_to_json,
    measurements_from_json,
    probabilities_to_json,
    strategy_from_json,
    subspace_from_json,
    subspace_to_json,
    table_from_json,
    table_to_json,
)
from .states import BudgetExceeded, Ket, StateSpace, conditional_state, purify, reduce, schmidt, span
from .tables import build_table, check_modal_ns, is_minimal_ns, prbox_table, singlet_table, table_n

FIXTURES = {"singlet": singlet_table, "prbox": prbox_table, "table-n": table_n}


@dataclass
class CommandResult:
    code: int
    text: str = ""
    payload: object | None = None
    error: str = ""


class UsageError(Exception):
    pass


def _fixture(name: str):
    return FIXTURES[name]()


def _read_json(value: str, option: str):
    """Inline JSON, ``-`` for stdin, or a file path."""
    text = value
    if value == "-":
        text = sys.stdin.read()
    elif not value.lstrip().startswith(("{", "[")):
        try:
            text = Path(value).read_text()
        except OSError as exc:
            raise UsageError(f"{option}: cannot read {value!r} ({exc.strerror})") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{option}: $", f"invalid JSON ({exc.msg} at line {exc.lineno}, column {exc.colno})") from exc


def _with_field(obj, field: int | None, option: str):
    if isinstance(obj, dict) and "field" not in obj:
        if field is None:
            raise UsageError(f"{option}: no field given; add a \"field\" key or pass --field")
        obj = {**obj, "field": field}
    return obj


def _prefixed(option: str, parse, *args):
    try:
        return parse(*args)
    except SchemaError as exc:
        raise SchemaError(f"{option}: {exc.path}", str(exc).split(": ", 1)[1]) from exc


def _table_arg(value: str):
    if value.startswith("fixture:"):
        name = value.split(":", 1)[1]
        if name not in FIXTURES:
            raise UsageError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}")
        return _fixture(name)
    return _prefixed("table", table_from_json, _read_json(value, "table"))


def _state_arg(value: str, field: int | None, option: str = "--state"):
    """A ket (``coords``) or a subspace (``basis``)."""
    obj = _with_field(_read_json(value, option), field, option)
    if isinstance(obj, dict) and "coords" in obj:
        return _prefixed(option, ket_from_json, obj)
    return _prefixed(option, subspace_from_json, obj)


def _as_subspace(state):
    return span([state]) if isinstance(state, Ket) else state


def _plot(plot_dir: str | None, name: str, t, probs=None, title: str = "") -> list[str]:
    if not plot_dir:
        return []
    from .plotting import save_table_figure

    return [str(save_table_figure(t, Path(plot_dir) / f"{name}.png", probs, title))]


# -- commands


def cmd_demo(args) -> CommandResult:
    t = _fixture(args.name)
    bounds = SearchBounds(max_dim=args.max_dim)
    lines = [f"table {args.name}", format_table(t), ""]
    ns = check_modal_ns(t)
    lines.append(f"modal no-signalling: {'yes' if ns else 'no'}")
    lines.append(f"minimal: {'yes' if ns and is_minimal_ns(t) else 'no'}")
    payload = {"table": table_to_json(t), "ns": ns}
    plots = _plot(args.plot_dir, f"{args.name}-table", t, title=args.name)
    weak = weak_resolution(t)
    if weak is None:
        lines.append(format_infeasibility(infeasibility_certificate(t), t))
    else:
        strong = strong_resolution(t)
        shown = strong if strong is not None else weak
        kind = "strong" if strong is not None else "weak"
        margin = strong_margin(t)
        lines += ["", f"{kind} probabilistic resolution (max-min mark probability {margin}):", format_probabilities(shown)]
        payload["resolution"] = probabilities_to_json(shown)
        payload["strong_margin"] = fraction_to_json(margin)
        plots += _plot(args.plot_dir, f"{args.name}-resolution", t, shown, f"{args.name}: {kind} resolution")
    c = classify(t, bounds)
    flags = c.flags()
    lines += ["", "classification: " + " ".join(f"{k}={_flag(v)}" for k, v in flags.items())]
    if c.mqt_reason:
        lines.append(f"mqt: {c.mqt_reason}")
    payload["classification"] = flags
    if plots:
        lines.append("figures: " + ", ".join(plots))
        payload["figures"] = plots
    return CommandResult(0, "\n".join(lines), payload)


def _flag(v) -> str:
    return ("yes" if v else "no") if isinstance(v, bool) else str(v)


def cmd_table_build(args) -> CommandResult:
    state = _as_subspace(_state_arg(args.state, args.field))
    field = state.space.field
    meas1 = _prefixed("--meas1", measurements_from_json, _read_json(args.meas1, "--meas1"), field)
    meas2 = _prefixed("--meas2", measurements_from_json, _read_json(args.meas2, "--meas2"), field)
    dims = state.space.factors
    if len(dims) != 2:
        raise UsageError("--state must live on a two-factor space")
    for option, ms, d in (("--meas1", meas1, dims[0]), ("--meas2", meas2, dims[1])):
        for k, m in enumerate(ms):
            if m.space.dim != d:
                raise UsageError(f"{option}[{k}]: effects have dimension {m.space.dim}, expected {d}")
    try:
        t = build_table(state, meas1, meas2)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    plots = _plot(args.plot_dir, "table", t)
    text = format_table(t) + (f"\nfigures: {', '.join(plots)}" if plots else "")
    return CommandResult(0, text, table_to_json(t))


def cmd_table_check_ns(args) -> CommandResult:
    t = _table_arg(args.table)
    ns = check_modal_ns(t)
    minimal = ns and is_minimal_ns(t)
    text = f"modal no-signalling: {'yes' if ns else 'no'}" + (f"\nminimal: {'yes' if minimal else 'no'}" if ns else "")
    return CommandResult(0 if ns else 1, text, {"ns": ns, "minimal": minimal})


def cmd_table_resolve(args) -> CommandResult:
    t = _table_arg(args.table)
    if args.strong:
        res = strong_resolution(t)
        margin = strong_margin(t)
        if res is None:
            why = "no weak resolution either" if margin is None else f"best max-min mark probability is {margin}"
            return CommandResult(1, f"no strong probabilistic resolution ({why})", {"resolution": None, "strong_margin": None if margin is None else fraction_to_json(margin)})
        plots = _plot(args.plot_dir, "strong-resolution", t, res, "strong resolution")
        return CommandResult(
            0,
            f"strong probabilistic resolution (max-min mark probability {margin}):\n" + format_probabilities(res),
            {"resolution": probabilities_to_json(res), "strong_margin": fraction_to_json(margin), "figures": plots},
        )
    res = weak_resolution(t)
    if res is None:
        report = infeasibility_certificate(t)
        payload = {
            "resolution": None,
            "farkas": {k: fraction_to_json(v) for k, v in report.farkas.items()},
            "conflicts": [
                {
                    "block": list(c.block),
                    "cells": [
                        {"cell": list(cell), "from_rows": fraction_to_json(r), "from_cols": fraction_to_json(q)}
                        for cell, (r, q) in c.clashes().items()
                    ],
                }
                for c in report.conflicts
            ],
        }
        return CommandResult(1, format_infeasibility(report, t), payload)
    plots = _plot(args.plot_dir, "weak-resolution", t, res, "weak resolution")
    return CommandResult(0, "weak probabilistic resolution:\n" + format_probabilities(res), {"resolution": probabilities_to_json(res), "figures": plots})


def cmd_table_classify(args) -> CommandResult:
    t = _table_arg(args.table)
    try:
        fields = tuple(int(p) for p in args.fields.split(","))
        for p in fields:
            FieldSpec(p)
    except ValueError as exc:
        raise UsageError(f"--fields: {exc}") from exc
    overlap = {"auto": None, "yes": True, "no": False}[args.non_overlapping]
    bounds = SearchBounds(fields, args.max_dim, args.max_outcomes, overlap, args.states, args.budget)
    c = classify(t, bounds)
    lines = [" ".join(f"{k}={_flag(v)}" for k, v in c.flags().items())]
    if c.mqt_reason:
        lines.append(f"mqt: {c.mqt_reason}")
    payload = {**c.flags(), "mqt_reason": c.mqt_reason}
    if c.mqt_witness is not None:
        w = c.mqt_witness
        payload["mqt_witness"] = {
            "state": ket_to_json(w.state),
            "meas1": [measurement_to_json(m) for m in w.meas1],
            "meas2": [measurement_to_json(m) for m in w.meas2],
        }
        lines.append(f"witness state: {w.state.coords} on {'x'.join(map(str, w.state.space.factors))} over Z{w.state.space.p}")
        for system, ms in ((1, w.meas1), (2, w.meas2)):
            for m in ms:
                lines.append(f"  system {system} {m.label}: " + ", ".join(str(e.basis.tolist()) for e in m.effects))
    return CommandResult(2 if c.mqt == "unknown" else 0, "\n".join(lines), payload)


def cmd_state_schmidt(args) -> CommandResult:
    psi = _state_arg(args.state, args.field)
    if not isinstance(psi, Ket):
        raise UsageError("--state: the Schmidt decomposition needs a ket")
    try:
        dec = schmidt(psi)
    except ValueError as exc:
        raise UsageError(f"--state: {exc}") from exc
    text = f"Schmidt number: {dec.s}\nfirst factor basis: {dec.r_basis.tolist()}\nsecond factor basis: {dec.q_basis.tolist()}"
    return CommandResult(0, text, {"s": dec.s, "r_basis": dec.r_basis.tolist(), "q_basis": dec.q_basis.tolist()})


def _subspace_result(s) -> CommandResult:
    text = f"dimension {s.dim}" + (f", basis {s.basis.tolist()}" if s.dim else " (null)")
    return CommandResult(0, text, subspace_to_json(s))


def cmd_state_reduce(args) -> CommandResult:
    m = _as_subspace(_state_arg(args.state, args.field))
    try:
        return _subspace_result(reduce(m, traced=args.traced))
    except (ValueError, IndexError) as exc:
        raise UsageError(str(exc)) from exc


def cmd_state_conditional(args) -> CommandResult:
    m = _as_subspace(_state_arg(args.state, args.field))
    e = _state_arg(args.effect, args.field, "--effect")
    if isinstance(e, Ket) or not e.dual:
        raise UsageError('--effect: expected a dual subspace ("dual": true)')
    try:
        return _subspace_result(conditional_state(m, e, factor=args.factor))
    except (ValueError, IndexError, TypeError) as exc:
        raise UsageError(str(exc)) from exc


def cmd_state_purify(args) -> CommandResult:
    m = _as_subspace(_state_arg(args.state, args.field))
    psi = purify(m)
    return CommandResult(0, f"purification: {psi.coords} on {'x'.join(map(str, psi.space.factors))}", ket_to_json(psi))


def cmd_channel_roundtrip(args) -> CommandResult:
    obj = _with_field(_read_json(args.kraus, "--kraus"), args.field, "--kraus")
    op = _prefixed("--kraus", kraus_from_json, obj)
    if args.dim is not None and op.dim != args.dim:
        raise UsageError(f"--kraus: operators are {op.dim}x{op.dim}, expected {args.dim}x{args.dim}")
    space = StateSpace(op.dim, op.field)
    dil = dilate(op)
    extended = extend_to_joint(dil, args.r_dim or op.dim)
    back = kraus_from_extension(extended, op.dim)
    dilation_ok = maps_agree(op, dil, space)
    extraction_ok = maps_agree(op, back, space)
    mode = "exhaustive"
    try:
        if args.samples is not None:
            raise BudgetExceeded("sampling requested")
        commutes = verify_type_e(op, args.r_dim or op.dim, args.budget, joint_map=extended)
    except BudgetExceeded:
        mode = f"{args.samples or 200} samples, seed {args.seed}"
        commutes = verify_type_e(op, args.r_dim or op.dim, joint_map=extended, samples=args.samples or 200, seed=args.seed)
    ok = dilation_ok and extraction_ok and commutes
    text = "\n".join(
        [
            f"dilation agrees with the map: {_flag(dilation_ok)}",
            f"extracted operators agree with the map: {_flag(extraction_ok)}",
            f"conditioning commutes with the extension ({mode}): {_flag(commutes)}",
            f"extracted operators: {[a.tolist() for a in back.kraus]}",
        ]
    )
    payload = {
        "dilation_agrees": dilation_ok,
        "extraction_agrees": extraction_ok,
        "type_e": commutes,
        "type_e_mode": mode,
        "extracted": kraus_to_json(back),
    }
    return CommandResult(0 if ok else 1, text, payload)


def cmd_hv_ks(args) -> CommandResult:
    f = mobit_family(args.field)
    valid = noncontextual_assignments(f)
    total = 2 ** len(f.effects)
    effects = [e.basis.tolist()[0] for e in f.effects]
    lines = [
        f"effects: {effects}",
        f"contexts: {[list(c) for c in f.contexts]}",
        f"assignments with one yes per context: {len(valid)} of {total}",
    ]
    if valid:
        lines.append(f"first: {['yes' if v else 'no' for v in valid[0]]}")
    payload = {"effects": effects, "contexts": [list(c) for c in f.contexts], "total": total, "valid": [list(v) for v in valid]}
    return CommandResult(0 if valid else 1, "\n".join(lines), payload)


def cmd_hv_survivors(args) -> CommandResult:
    t = _table_arg(args.table)
    survivors = joint_assignment_survivors(t)
    total = count_joint_assignments(t)
    lines = [f"surviving joint assignments: {len(survivors)} of {total}"]
    lines += [f"  {list(h.f1)} / {list(h.f2)}" for h in survivors]
    payload = {"total": total, "survivors": [{"f1": list(h.f1), "f2": list(h.f2)} for h in survivors]}
    return CommandResult(0 if survivors else 1, "\n".join(lines), payload)


def _hardy_mapping(spec: str):
    mapping = {}
    for part in spec.split(","):
        name, _, target = part.partition("=")
        name, target = name.strip(), target.strip()
        if not target:
            raise UsageError(f"--map: bad entry {part!r}; expected NAME=MEASUREMENT or NAME=~MEASUREMENT")
        flip = target.startswith("~")
        mapping[name] = (target.lstrip("~"), flip)
    return mapping


def cmd_hv_hardy(args) -> CommandResult:
    t = _table_arg(args.table)
    try:
        holds = hardy_check(t, _hardy_mapping(args.map))
    except ValueError as exc:
        raise UsageError(f"--map: {exc}") from exc
    return CommandResult(0 if holds else 1, f"Hardy facts hold: {_flag(holds)}", {"holds": holds})


def cmd_game_play(args) -> CommandResult:
    t = _table_arg(args.table)
    if args.all_classical:
        winners = classical_winners(t)
        total = count_joint_assignments(t)
        text = f"winning classical strategies: {len(winners)} of {total}"
        return CommandResult(0 if winners else 1, text, {"total": total, "winners": [{"f1": list(h.f1), "f2": list(h.f2)} for h in winners]})
    if args.strategy is None:
        raise UsageError("pass --strategy or --all-classical")
    strategy = _prefixed("--strategy", strategy_from_json, _read_json(args.strategy, "--strategy"))
    try:
        result = play_game(t, strategy)
    except ValueError as exc:
        raise UsageError(f"--strategy: {exc}") from exc
    total = t.scenario.n_rows * t.scenario.n_cols
    kind = "shared-state" if isinstance(strategy, SharedState) else "classical"
    text = f"{kind} strategy wins {result.won_pairs} of {total} question pairs"
    if result.losing_pair:
        text += f"; first loss on ({result.losing_pair[0]}, {result.losing_pair[1]})"
    payload = {"wins_all": result.wins_all, "won_pairs": result.won_pairs, "losing_pair": list(result.losing_pair) if result.losing_pair else None}
    return CommandResult(0 if result.wins_all else 1, text, payload)


# -- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print the JSON payload instead of text")
    common.add_argument("-o", "--output", help="also write the JSON payload to this file")
    table_src = "table JSON (inline, a file path, '-' for stdin) or fixture:singlet|prbox|table-n"

    parser = argparse.ArgumentParser(prog="modalqt", description="Modal quantum theory over prime fields.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    demo = sub.add_parser("demo", parents=[common], help="walk through a published table")
    demo.add_argument("name", choices=list(FIXTURES))
    demo.add_argument("--max-dim", type=int, default=2, help="subsystem dimension bound for the realization search")
    demo.add_argument("--plot-dir", help="write PNG figures here")
    demo.set_defaults(func=cmd_demo)

    table = sub.add_parser("table", help="possibility tables").add_subparsers(dest="action", required=True)
    build = table.add_parser("build", parents=[common], help="table of a state under product measurements")
    build.add_argument("--field", type=int)
    build.add_argument("--state", required=True, help="ket or subspace JSON")
    build.add_argument("--meas1", required=True, help="JSON list of measurements for the first system")
    build.add_argument("--meas2", required=True, help="JSON list of measurements for the second system")
    build.add_argument("--plot-dir")
    build.set_defaults(func=cmd_table_build)
    ns = table.add_parser("check-ns", parents=[common], help="modal no-signalling check")
    ns.add_argument("table", help=table_src)
    ns.set_defaults(func=cmd_table_check_ns)
    res = table.add_parser("resolve", parents=[common], help="probabilistic resolution")
    res.add_argument("table", help=table_src)
    kind = res.add_mutually_exclusive_group(required=True)
    kind.add_argument("--weak", action="store_true")
    kind.add_argument("--strong", action="store_true")
    res.add_argument("--plot-dir", help="write PNG figures here")
    res.set_defaults(func=cmd_table_resolve)
    cls = table.add_parser("classify", parents=[common], help="place a table in the hierarchy")
    cls.add_argument("table", help=table_src)
    cls.add_argument("--budget", type=int, default=SearchBounds.budget, help="cell comparisons allowed in the realization search")
    cls.add_argument("--fields", default="2,3", help="comma-separated primes to search over")
    cls.add_argument("--max-dim", type=int, default=2)
    cls.add_argument("--max-outcomes", type=int, default=3)
    cls.add_argument("--non-overlapping", choices=["auto", "yes", "no"], default="auto")
    cls.add_argument("--states", choices=["schmidt", "all"], default="schmidt")
    cls.set_defaults(func=cmd_table_classify)

    state = sub.add_parser("state", help="state calculus").add_subparsers(dest="action", required=True)
    for name, func, help_text in (
        ("schmidt", cmd_state_schmidt, "Schmidt decomposition of a bipartite ket"),
        ("reduce", cmd_state_reduce, "reduced state"),
        ("conditional", cmd_state_conditional, "state of one factor given an effect on the other"),
        ("purify", cmd_state_purify, "pure state reducing to the given subspace"),
    ):
        p = state.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--field", type=int)
        p.add_argument("--state", required=True, help="ket or subspace JSON")
        p.set_defaults(func=func)
        if name == "reduce":
            p.add_argument("--traced", type=int, default=0, help="factor to trace out")
        if name == "conditional":
            p.add_argument("--effect", required=True, help="dual subspace JSON")
            p.add_argument("--factor", type=int, default=0, help="factor the effect acts on")

    channel = sub.add_parser("channel", help="Type L maps").add_subparsers(dest="action", required=True)
    rt = channel.add_parser("roundtrip", parents=[common], help="dilate, extend, extract and compare")
    rt.add_argument("--field", type=int)
    rt.add_argument("--dim", type=int)
    rt.add_argument("--kraus", required=True, help='JSON {"ops": [...]}')
    rt.add_argument("--r-dim", type=int, help="dimension of the reference system (default: the map's)")
    rt.add_argument("--budget", type=int, default=2_000_000, help="largest exhaustive check before sampling")
    rt.add_argument("--samples", type=int, help="check this many random state/effect pairs instead")
    rt.add_argument("--seed", type=int, default=0)
    rt.set_defaults(func=cmd_channel_roundtrip)

    hv = sub.add_parser("hv", help="hidden-variable refutations").add_subparsers(dest="action", required=True)
    ks = hv.add_parser("ks", parents=[common], help="noncontextual assignments for one mobit")
    ks.add_argument("--field", type=int, default=2)
    ks.set_defaults(func=cmd_hv_ks)
    surv = hv.add_parser("survivors", parents=[common], help="joint assignments consistent with a table")
    surv.add_argument("table", help=table_src)
    surv.set_defaults(func=cmd_hv_survivors)
    hardy = hv.add_parser("hardy", parents=[common], help="check the four Hardy facts")
    hardy.add_argument("table", help=table_src)
    hardy.add_argument("--map", default="A=X,B=Y,C=~Z,D=~Y", help="A,B on system 1 and C,D on system 2; ~ negates")
    hardy.set_defaults(func=cmd_hv_hardy)

    game = sub.add_parser("game", help="pseudo-telepathy game").add_subparsers(dest="action", required=True)
    play = game.add_parser("play", parents=[common], help="referee a strategy against a table")
    play.add_argument("table", help=table_src)
    play.add_argument("--strategy", help="strategy JSON")
    play.add_argument("--all-classical", action="store_true", help="count winning deterministic strategies")
    play.set_defaults(func=cmd_game_play)
    return parser


def run(argv: Sequence[str] | None = None) -> CommandResult:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return CommandResult(int(exc.code or 0), error="" if not exc.code else "invalid arguments")
    try:
        result = args.func(args)
    except (SchemaError, UsageError, BudgetExceeded) as exc:
        return CommandResult(2, error=str(exc))
    if getattr(args, "output", None) and result.payload is not None:
        Path(args.output).write_text(json.dumps(result.payload, indent=2) + "\n")
    result.json_mode = getattr(args, "json", False)
    return result


def main(argv: Sequence[str] | None = None) -> int:
    result = run(argv)
    if result.error:
        print(f"error: {result.error}", file=sys.stderr)
    elif getattr(result, "json_mode", False) and result.payload is not None:
        print(json.dumps(result.payload, indent=2))
    elif result.text:
        print(result.text)
    return result.code


if __name__ == "__main__":
    sys.exit(main())
