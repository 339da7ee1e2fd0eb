"""Tabular statistic reports with exact rational values.

Every percentage keeps its numerator and denominator so reports can be
merged across datasets (language-level views) without rounding drift.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction


def _format(value: Fraction | None, decimals: int) -> str:
    if value is None:
        return "n/a"
    return f"{float(value):.{decimals}f}"


@dataclass(frozen=True)
class StatRow:
    key: str
    numerator: int | Fraction
    denominator: int
    kind: str = "percent"  # percent | mean | rate | count

    @property
    def value(self) -> Fraction | None:
        """Exact value; None when the denominator is empty (rendered n/a)."""
        if self.kind == "count":
            return Fraction(self.numerator)
        if self.denominator == 0:
            return None
        if self.kind == "percent":
            return Fraction(self.numerator, self.denominator) * 100
        return Fraction(self.numerator) / self.denominator

    def rendered(self) -> str:
        if self.kind == "count":
            return str(self.numerator)
        return _format(self.value, 2)

    def as_json(self) -> dict:
        value = self.value
        return {
            "key": self.key,
            "numerator": [self.numerator.numerator, self.numerator.denominator]
            if isinstance(self.numerator, Fraction) else self.numerator,
            "denominator": self.denominator,
            "kind": self.kind,
            "value": None if value is None else float(value),
            "rendered": self.rendered(),
        }


@dataclass
class DatasetReport:
    dataset: str
    statistic: str
    rows: list[StatRow] = field(default_factory=list)

    def row(self, key: str) -> StatRow:
        for row in self.rows:
            if row.key == key:
                return row
        raise KeyError(key)

    def value(self, key: str) -> Fraction | None:
        return self.row(key).value

    def to_tsv(self) -> str:
        lines = ["key\tvalue\tnumerator\tdenominator"]
        for row in self.rows:
            numerator = (f"{float(row.numerator):.6f}"
                         if isinstance(row.numerator, Fraction)
                         else str(row.numerator))
            lines.append(f"{row.key}\t{row.rendered()}\t{numerator}"
                         f"\t{row.denominator}")
        return "\n".join(lines) + "\n"

    def as_json(self) -> dict:
        return {"dataset": self.dataset, "statistic": self.statistic,
                "rows": [row.as_json() for row in self.rows]}


def merge_reports(reports: list[DatasetReport],
                  dataset: str = "all") -> DatasetReport:
    """Sum matching rows across reports; row order follows the first report.

    Count rows add numerators; ratio rows add numerators and denominators,
    so the merged value is the pooled (not averaged) statistic.
    """
    if not reports:
        raise ValueError("no reports to merge")
    merged: dict[str, StatRow] = {}
    order: list[str] = []
    for report in reports:
        for row in report.rows:
            if row.key not in merged:
                merged[row.key] = row
                order.append(row.key)
            else:
                prev = merged[row.key]
                if prev.kind != row.kind:
                    raise ValueError(f"row {row.key!r} has mixed kinds")
                merged[row.key] = StatRow(
                    row.key, prev.numerator + row.numerator,
                    prev.denominator + row.denominator, row.kind)
    return DatasetReport(dataset=dataset, statistic=reports[0].statistic,
                         rows=[merged[key] for key in order])
