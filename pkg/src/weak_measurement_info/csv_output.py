"""CSV tables with ``#`` headers carrying the resolved run configuration."""

import csv
import io
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import TextIO

from .errors import ValidationError

Cell = float | int | str | bool


def format_value(value: Cell) -> str:
    """
    Render a cell: reals with 17 significant digits, NaN as ``nan``.

    Examples:
        >>> format_value(0.1)
        '0.10000000000000001'
        >>> format_value(float("nan"))
        'nan'
    """
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.17g}"
    return str(value)


@dataclass
class CsvTable:
    """Column names, rows and the comment header written above them."""

    columns: Sequence[str]
    rows: list[Sequence[Cell]] = field(default_factory=list)
    header: list[str] = field(default_factory=list)

    def add_row(self, *cells: Cell) -> None:
        """Append one row; its width must match the columns."""
        if len(cells) != len(self.columns):
            raise ValidationError(f"row has {len(cells)} cells, expected {len(self.columns)}")
        self.rows.append(cells)

    def extend(self, rows: Iterable[Sequence[Cell]]) -> None:
        """Append several rows."""
        for row in rows:
            self.add_row(*row)

    def to_text(self) -> str:
        """UTF-8 CSV text with ``\\n`` line endings."""
        buffer = io.StringIO()
        for line in self.header:
            buffer.write(line + "\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.columns)
        writer.writerows([format_value(cell) for cell in row] for row in self.rows)
        return buffer.getvalue()

    def write(self, target: Path | TextIO) -> None:
        """Write to a path or an open text stream."""
        if isinstance(target, Path):
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(self.to_text(), encoding="utf-8", newline="\n")
        else:
            target.write(self.to_text())


@dataclass(frozen=True)
class ParsedCsv:
    """Header values, column names and raw string rows of a CSV written by :class:`CsvTable`."""

    program: str | None
    values: dict[str, str]
    columns: list[str]
    rows: list[list[str]]

    def column(self, name: str) -> list[str]:
        """All cells of one column."""
        index = self.columns.index(name)
        return [row[index] for row in self.rows]


def parse_csv(text: str) -> ParsedCsv:
    """Split a CSV into its ``# key=value`` header and its table."""
    header_lines: list[str] = []
    body_lines: list[str] = []
    for line in text.splitlines():
        if line.startswith("#") and not body_lines:
            header_lines.append(line)
        elif line:
            body_lines.append(line)
    program: str | None = None
    values: dict[str, str] = {}
    for line in header_lines:
        key, sep, value = line.lstrip("#").strip().partition("=")
        if not sep:
            continue
        if key == "program":
            program = value
        else:
            values[key] = value
    if not body_lines:
        raise ValidationError("CSV has no column header")
    reader = csv.reader(body_lines)
    columns = next(reader)
    return ParsedCsv(program=program, values=values, columns=columns, rows=list(reader))


def read_csv(path: Path) -> ParsedCsv:
    """Read and parse a CSV file."""
    try:
        return parse_csv(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ValidationError(f"cannot read {path}: {e}") from e
