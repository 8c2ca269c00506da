"""Labeled numeric tables with a plain-CSV serialization.

Layout::

    # title: <title>
    # <key>: <value>        (zero or more metadata lines)
    <x_label>,<series 1>,...,<series m>
    <x>,<y1>,...,<ym>

Floats are written with ``repr`` (shortest string that round-trips), so
parsing a file and writing it back reproduces it byte for byte.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = ["CurveTable", "format_float"]


def format_float(v: float) -> str:
    return repr(float(v))


@dataclass
class CurveTable:
    title: str
    x_label: str
    series_labels: list[str]
    rows: list[tuple[float, list[float]]] = field(default_factory=list)
    meta: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        self.series_labels = list(self.series_labels)
        self.rows = [(float(x), [float(v) for v in vals]) for x, vals in self.rows]
        width = len(self.series_labels)
        prev = -math.inf
        for x, vals in self.rows:
            if len(vals) != width:
                raise ValueError(f"row at x={x!r} has {len(vals)} values, expected {width}")
            if not x > prev:
                raise ValueError(f"x must be strictly increasing (got {x!r} after {prev!r})")
            prev = x
        self.meta = {str(k): str(v) for k, v in self.meta.items()}

    @property
    def x(self) -> np.ndarray:
        return np.array([x for x, _ in self.rows])

    def column(self, label: str) -> np.ndarray:
        j = self.series_labels.index(label)
        return np.array([vals[j] for _, vals in self.rows])

    def add_series(self, label: str, values) -> None:
        values = [float(v) for v in values]
        if len(values) != len(self.rows):
            raise ValueError("series length does not match the number of rows")
        self.series_labels.append(label)
        self.rows = [(x, vals + [v]) for (x, vals), v in zip(self.rows, values)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# title: {self.title}\n")
        for k, v in self.meta.items():
            buf.write(f"# {k}: {v}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([self.x_label, *self.series_labels])
        for x, vals in self.rows:
            w.writerow([format_float(x), *(format_float(v) for v in vals)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "CurveTable":
        lines = text.splitlines()
        title = None
        meta: dict[str, str] = {}
        i = 0
        while i < len(lines) and lines[i].startswith("#"):
            key, sep, value = lines[i][1:].strip().partition(": ")
            if not sep:
                raise ValueError(f"malformed metadata line {i + 1}: {lines[i]!r}")
            if key == "title" and title is None:
                title = value
            else:
                meta[key] = value
            i += 1
        if title is None:
            raise ValueError("missing '# title:' line")
        reader = csv.reader(lines[i:])
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError("missing header row") from None
        rows = [(float(r[0]), [float(v) for v in r[1:]]) for r in reader if r]
        return cls(title=title, x_label=header[0], series_labels=header[1:], rows=rows, meta=meta)

    def write(self, path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8")

    @classmethod
    def read(cls, path) -> "CurveTable":
        return cls.from_csv(Path(path).read_text(encoding="utf-8"))
