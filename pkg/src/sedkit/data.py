"""Categorical datasets, CSV ingestion, and sufficient statistics.

Cells are stored as small integer codes against a per-column label table;
state order is fixed by an accompanying network schema when one is given,
otherwise by first occurrence in the file.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import NodeNotFound, ParseError, UnknownState


@dataclass(frozen=True)
class Variable:
    """A named categorical variable with an ordered state space."""

    name: str
    states: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.states) < 2:
            raise ValueError(f"variable {self.name!r} needs at least two states")
        if len(set(self.states)) != len(self.states):
            raise ValueError(f"variable {self.name!r} has duplicate states")

    @property
    def card(self) -> int:
        return len(self.states)


class Dataset:
    """Immutable table of state codes over a fixed variable schema."""

    def __init__(self, schema: Sequence[Variable], codes: np.ndarray):
        self.schema = tuple(schema)
        codes = np.asarray(codes, dtype=np.int32)
        if codes.ndim != 2 or codes.shape[1] != len(self.schema):
            raise ValueError("codes must be an (N, n_columns) array")
        for j, var in enumerate(self.schema):
            if codes.shape[0] and (codes[:, j].min() < 0 or codes[:, j].max() >= var.card):
                raise ValueError(f"column {var.name!r} holds out-of-range codes")
        self.codes = codes
        self.codes.setflags(write=False)
        self._index = {v.name: j for j, v in enumerate(self.schema)}
        if len(self._index) != len(self.schema):
            raise ValueError("duplicate column names")

    @property
    def n_rows(self) -> int:
        return self.codes.shape[0]

    @property
    def columns(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.schema)

    def column_index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise NodeNotFound(name) from None

    def variable(self, name: str) -> Variable:
        return self.schema[self.column_index(name)]

    def column(self, name: str) -> np.ndarray:
        return self.codes[:, self.column_index(name)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.schema == other.schema and np.array_equal(self.codes, other.codes)

    def __repr__(self) -> str:
        return f"Dataset({self.n_rows} rows, {len(self.schema)} columns)"


def config_strides(cards: Sequence[int]) -> np.ndarray:
    """Mixed-radix strides with the last position varying fastest."""
    strides = np.ones(len(cards), dtype=np.int64)
    for i in range(len(cards) - 2, -1, -1):
        strides[i] = strides[i + 1] * cards[i + 1]
    return strides


def config_index(data: Dataset, names: Sequence[str]) -> tuple[np.ndarray, int]:
    """Per-record mixed-radix configuration index over ``names``.

    Returns the index array and the number of configurations; an empty name
    list yields all-zero indices and a single configuration.
    """
    if not names:
        return np.zeros(data.n_rows, dtype=np.int64), 1
    cards = [data.variable(v).card for v in names]
    strides = config_strides(cards)
    cols = np.stack([data.column(v) for v in names], axis=1).astype(np.int64)
    return cols @ strides, int(np.prod(cards))


@dataclass(frozen=True)
class SufficientStats:
    """Contingency counts for one (child, parent-set) family.

    ``counts[j, k]`` is the number of records with parent configuration ``j``
    (mixed-radix, last parent fastest) and child state ``k``.
    """

    child: str
    parents: tuple[str, ...]
    counts: np.ndarray

    @property
    def margins(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def n(self) -> int:
        return int(self.counts.sum())


def counts(data: Dataset, child: str, parents: Sequence[str]) -> SufficientStats:
    """Exact N_ijk counts for the family of ``child`` given ``parents``."""
    from ._kernels import joint_counts

    r = data.variable(child).card
    cfg, q = config_index(data, parents)
    table = joint_counts(cfg, np.ascontiguousarray(data.column(child)), q, r)
    return SufficientStats(child, tuple(parents), table)


# ------------------------------------------------------------------- CSV I/O


def _decode_rows(rows: Iterable[list[str]], path_hint: str) -> tuple[list[str], list[list[str]]]:
    it = iter(rows)
    try:
        header = next(it)
    except StopIteration:
        raise ParseError(f"{path_hint}: empty file, expected a header row") from None
    body = []
    for lineno, row in enumerate(it, start=2):
        if len(row) != len(header):
            raise ParseError(
                f"ragged row: {len(row)} cells, expected {len(header)}", line=lineno
            )
        for cell in row:
            if "," in cell:
                raise ParseError(f"cell {cell!r} contains a comma", line=lineno)
        body.append(row)
    return header, body


def read_csv(path: str | Path, schema: Sequence[Variable] | None = None) -> Dataset:
    """Load a categorical CSV; a supplied schema fixes column and state order."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        header, body = _decode_rows(csv.reader(fh), str(path))

    if schema is not None:
        by_name = {v.name: v for v in schema}
        missing = [name for name in header if name not in by_name]
        if missing:
            raise NodeNotFound(missing[0])
        cols = [by_name[name] for name in header]
        lookup = [{s: i for i, s in enumerate(v.states)} for v in cols]
        codes = np.empty((len(body), len(header)), dtype=np.int32)
        for i, row in enumerate(body):
            for j, cell in enumerate(row):
                try:
                    codes[i, j] = lookup[j][cell]
                except KeyError:
                    raise UnknownState(header[j], cell) from None
        return Dataset(cols, codes)

    # Infer states in first-occurrence order.
    lookup = [dict() for _ in header]
    codes = np.empty((len(body), len(header)), dtype=np.int32)
    for i, row in enumerate(body):
        for j, cell in enumerate(row):
            codes[i, j] = lookup[j].setdefault(cell, len(lookup[j]))
    inferred = []
    for j, name in enumerate(header):
        states = tuple(lookup[j])
        if len(states) < 2:
            # Pad degenerate columns so the r >= 2 invariant holds.
            states = states + tuple(
                f"_unseen{k}" for k in range(2 - len(states))
            )
        inferred.append(Variable(name, states))
    return Dataset(inferred, codes)


def write_csv(data: Dataset, path: str | Path) -> None:
    """Write a dataset as UTF-8 CSV with LF line endings."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(data.columns)
        labels = [v.states for v in data.schema]
        for row in data.codes:
            writer.writerow([labels[j][code] for j, code in enumerate(row)])
