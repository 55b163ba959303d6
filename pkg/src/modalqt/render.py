"""Plain-text grids for possibility and probability tables."""

from __future__ import annotations

from fractions import Fraction

from .resolve import Infeasibility, ProbabilityTable
from .tables import PossibilityTable, Scenario


def outcome_labels(n: int) -> list[str]:
    return ["+", "-"] if n == 2 else [str(k + 1) for k in range(n)]


def _grid(sc: Scenario, cell) -> str:
    """``cell(i, j, a, c)`` returns the text of one entry."""
    width = max(
        [1]
        + [
            len(cell(i, j, a, c))
            for i in range(sc.n_rows)
            for j in range(sc.n_cols)
            for a in range(sc.rows[i][1])
            for c in range(sc.cols[j][1])
        ]
    )
    width = max(width, max(len(lab) for lab in outcome_labels(max(n for _, n in sc.cols))))
    head_w = max(len(label) for label, _ in sc.rows) + 1 + max(len(lab) for _, n in sc.rows for lab in outcome_labels(n))

    def block_width(j):
        return sc.cols[j][1] * (width + 1) - 1

    top = " " * head_w + " |" + "|".join(f" {label:^{block_width(j)}} " for j, (label, _) in enumerate(sc.cols))
    sub = " " * head_w + " |" + "|".join(
        " " + " ".join(f"{o:>{width}}" for o in outcome_labels(n)) + " " for _, n in sc.cols
    )
    rule = "-" * (head_w + 1) + "+" + "+".join("-" * (block_width(j) + 2) for j in range(sc.n_cols))
    lines = [top, sub, rule]
    for i, (label, n) in enumerate(sc.rows):
        for a, o in enumerate(outcome_labels(n)):
            head = f"{label if a == 0 else '':<{head_w - len(o) - 1}} {o}"
            cells = [
                " " + " ".join(f"{cell(i, j, a, c):>{width}}" for c in range(sc.cols[j][1])) + " "
                for j in range(sc.n_cols)
            ]
            lines.append(f"{head} |" + "|".join(cells))
        lines.append(rule)
    return "\n".join(line.rstrip() for line in lines)


def format_table(t: PossibilityTable) -> str:
    """Marks as "X", impossible outcome pairs left blank."""
    return _grid(t.scenario, lambda i, j, a, c: "X" if t[i, j, a, c] else "")


def format_fraction(x: Fraction) -> str:
    return str(Fraction(x))


def format_probabilities(pt: ProbabilityTable) -> str:
    return _grid(pt.scenario, lambda i, j, a, c: format_fraction(pt[i, j, a, c]))


def format_infeasibility(report: Infeasibility, t: PossibilityTable) -> str:
    sc = t.scenario
    lines = ["no weak probabilistic resolution exists"]
    for conflict in report.conflicts:
        i = sc.row_index(conflict.block[0])
        j = sc.col_index(conflict.block[1])
        rows_lab = outcome_labels(sc.rows[i][1])
        cols_lab = outcome_labels(sc.cols[j][1])
        for (a, c), (by_rows, by_cols) in conflict.clashes().items():
            lines.append(
                f"  block ({conflict.block[0]},{conflict.block[1]}) cell ({rows_lab[a]},{cols_lab[c]}): "
                f"{by_rows} forced by its row constraints, {by_cols} by its column constraints"
            )
    if not report.conflicts:
        lines.append("  no single block carries the contradiction")
    return "\n".join(lines)
