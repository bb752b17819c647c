"""CSV ingestion for study data.

Two accepted headers:
    study,y,se                              effect estimates with standard errors
    study,events_t,n_t,events_c,n_c         2x2 counts, converted to log odds ratios
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

from .data import CountTable, Dataset, Study, log_or_from_counts
from .errors import DataError

EFFECT_HEADER = ("study", "y", "se")
COUNTS_HEADER = ("study", "events_t", "n_t", "events_c", "n_c")


def parse_csv(path: str | Path) -> Dataset:
    """Read a dataset from a CSV file; errors carry the offending row number."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return parse_csv_text(text)


def parse_csv_text(text: str) -> Dataset:
    """Parse CSV content already in memory (used by the service endpoints)."""
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if not rows:
        raise DataError("empty CSV: missing header row")
    header = tuple(cell.strip().lower() for cell in rows[0])
    if header == EFFECT_HEADER:
        return _parse_effect_rows(rows[1:])
    if header == COUNTS_HEADER:
        return _parse_count_rows(rows[1:])
    raise DataError(
        f"malformed header {','.join(header)!r}: expected "
        f"{','.join(EFFECT_HEADER)!r} or {','.join(COUNTS_HEADER)!r}")


def _float_field(value: str, name: str, row_num: int) -> float:
    try:
        return float(value)
    except ValueError:
        raise DataError(f"row {row_num}: non-numeric {name} field {value.strip()!r}") from None


def _int_field(value: str, name: str, row_num: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise DataError(f"row {row_num}: non-integer {name} field {value.strip()!r}") from None


def _check_width(row: list[str], expected: int, row_num: int) -> None:
    if len(row) != expected:
        raise DataError(f"row {row_num}: expected {expected} fields, got {len(row)}")


def _build(studies: list[Study]) -> Dataset:
    if not studies:
        raise DataError("CSV contains a header but no data rows")
    seen: dict[str, int] = {}
    for i, s in enumerate(studies, start=2):
        if s.label in seen:
            raise DataError(f"row {i}: duplicate label {s.label!r} (first at row {seen[s.label]})")
        seen[s.label] = i
    return Dataset(tuple(studies))


def _parse_effect_rows(rows: list[list[str]]) -> Dataset:
    studies = []
    for row_num, row in enumerate(rows, start=2):
        _check_width(row, 3, row_num)
        label = row[0].strip()
        y = _float_field(row[1], "y", row_num)
        se = _float_field(row[2], "se", row_num)
        if not se > 0.0:
            raise DataError(f"row {row_num}: non-positive se {se}")
        try:
            studies.append(Study(label=label, y=y, sigma=se))
        except DataError as exc:
            raise DataError(f"row {row_num}: {exc}") from None
    return _build(studies)


def _parse_count_rows(rows: list[list[str]]) -> Dataset:
    studies = []
    for row_num, row in enumerate(rows, start=2):
        _check_width(row, 5, row_num)
        label = row[0].strip()
        fields = [_int_field(row[i], COUNTS_HEADER[i], row_num) for i in range(1, 5)]
        try:
            table = CountTable(*fields)
            y, se = log_or_from_counts(table)
        except DataError as exc:
            raise DataError(f"row {row_num}: {exc}") from None
        studies.append(Study(label=label, y=y, sigma=se))
    return _build(studies)
