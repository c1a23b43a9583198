from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionMismatch, MalformedRow, UnknownAccount


@dataclass
class FeatureMatrix:
    """Dense per-account feature rows keyed by address.

    ``prefix`` names the CSV columns: ``f`` for manual features (f1..f15),
    ``e`` for embeddings (e1..eD).
    """

    ids: list[str]
    values: np.ndarray
    prefix: str = "f"

    def __post_init__(self):
        self.ids = list(self.ids)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            self.values = self.values.reshape(len(self.ids), -1)
        if len(self.ids) != self.values.shape[0]:
            raise DimensionMismatch(f"{len(self.ids)} ids for {self.values.shape[0]} rows")
        self._pos = None

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def __len__(self):
        return len(self.ids)

    def position(self, v: str) -> int:
        if self._pos is None:
            # first occurrence wins when an id is listed twice
            self._pos = {}
            for i, a in enumerate(self.ids):
                self._pos.setdefault(a, i)
        try:
            return self._pos[v]
        except KeyError:
            raise UnknownAccount(v) from None

    def __contains__(self, v: str) -> bool:
        try:
            self.position(v)
        except UnknownAccount:
            return False
        return True

    def row(self, v: str) -> np.ndarray:
        return self.values[self.position(v)]

    def select(self, ids) -> "FeatureMatrix":
        idx = [self.position(v) for v in ids]
        return FeatureMatrix(list(ids), self.values[idx].copy(), self.prefix)

    def copy(self) -> "FeatureMatrix":
        return FeatureMatrix(list(self.ids), self.values.copy(), self.prefix)

    def to_csv(self, path) -> None:
        header = ["address"] + [f"{self.prefix}{j + 1}" for j in range(self.dim)]
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for a, row in zip(self.ids, self.values):
                # repr keeps the shortest round-tripping float text
                w.writerow([a] + [repr(float(x)) for x in row])

    @classmethod
    def from_csv(cls, path) -> "FeatureMatrix":
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if not header or header[0].strip().lower() != "address":
                raise MalformedRow(1, "feature CSV must start with an 'address' column")
            prefix = header[1].rstrip("0123456789") if len(header) > 1 else "f"
            ids, rows = [], []
            for line_no, rec in enumerate(reader, start=2):
                if not rec:
                    continue
                if len(rec) != len(header):
                    raise MalformedRow(line_no, f"expected {len(header)} fields, got {len(rec)}")
                try:
                    rows.append([float(x) for x in rec[1:]])
                except ValueError as exc:
                    raise MalformedRow(line_no, str(exc)) from None
                ids.append(rec[0].strip().lower())
        values = np.array(rows, dtype=float).reshape(len(ids), len(header) - 1)
        return cls(ids, values, prefix or "f")


def read_features(path: Path | str) -> FeatureMatrix:
    return FeatureMatrix.from_csv(path)
