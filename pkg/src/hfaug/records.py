"""Reading and writing the account / edge / label record files.

Three line-oriented files make up a dataset::

    accounts.csv   address,kind              kind in {EOA, CA}
    edges.csv      src,dst,etype,amount,timestamp
    labels.csv     address,label             label in {ponzi, nonponzi}

Each has a JSONL mirror with one object per line using the same keys.
Addresses are lower-cased on ingest.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import IO, Iterable, Iterator

from .errors import MalformedRow, NegativeAmount, UnknownEdgeType


class Kind(str, Enum):
    EOA = "EOA"
    CA = "CA"


class EdgeType(str, Enum):
    TRANS = "trans"
    CALL = "call"


class Label(str, Enum):
    PONZI = "ponzi"
    NON_PONZI = "nonponzi"


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str
    etype: EdgeType
    amount: int = 0
    timestamp: int = 0


ACCOUNT_COLUMNS = ("address", "kind")
EDGE_COLUMNS = ("src", "dst", "etype", "amount", "timestamp")
LABEL_COLUMNS = ("address", "label")


@dataclass
class Records:
    accounts: list[tuple[str, Kind]] = field(default_factory=list)
    edges: list[Edge] = field(default_factory=list)
    labels: dict[str, Label] = field(default_factory=dict)
    skipped: list[MalformedRow] = field(default_factory=list)

    def __iter__(self):
        # allows ``accounts, edges, labels = parse_records(...)``
        return iter((self.accounts, self.edges, self.labels))

    def counts(self) -> dict[str, int]:
        return {
            "accounts": len(self.accounts),
            "edges": len(self.edges),
            "labels": len(self.labels),
            "skipped": len(self.skipped),
        }


def _rows(stream: IO[str], fmt: str, columns: tuple[str, ...]) -> Iterator[tuple[int, dict]]:
    """Yield ``(line_no, row)`` pairs; line numbers are 1-based and physical."""
    fmt = fmt.lower()
    if fmt == "csv":
        first = True
        for line_no, line in enumerate(stream, start=1):
            if not line.strip():
                continue
            values = next(csv.reader([line]))
            values = [v.strip() for v in values]
            if first:
                first = False
                header = [h.lower() for h in values]
                missing = [c for c in columns if c not in header]
                if missing:
                    raise MalformedRow(line_no, f"header lacks column(s) {', '.join(missing)}")
                continue
            if len(values) != len(header):
                yield line_no, MalformedRow(line_no, f"expected {len(header)} fields, got {len(values)}")
                continue
            yield line_no, dict(zip(header, values))
    elif fmt == "jsonl":
        for line_no, line in enumerate(stream, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                yield line_no, MalformedRow(line_no, f"invalid JSON ({exc.msg})")
                continue
            if not isinstance(obj, dict):
                yield line_no, MalformedRow(line_no, "expected a JSON object")
                continue
            yield line_no, {k.lower(): ("" if v is None else v) for k, v in obj.items()}
    else:
        raise ValueError(f"unknown record format {fmt!r}")


def _int_field(row: dict, key: str, line_no: int, required: bool) -> int:
    raw = row.get(key, "")
    if isinstance(raw, bool):
        raise MalformedRow(line_no, f"{key} must be an integer")
    if isinstance(raw, int):
        return raw
    raw = str(raw).strip()
    if raw == "":
        if required:
            raise MalformedRow(line_no, f"missing {key}")
        return 0
    try:
        return int(raw, 10)
    except ValueError:
        raise MalformedRow(line_no, f"{key} is not a base-10 integer: {raw!r}") from None


def _address(row: dict, key: str, line_no: int) -> str:
    addr = str(row.get(key, "")).strip().lower()
    if not addr:
        raise MalformedRow(line_no, f"empty {key}")
    return addr


def _parse_account(row: dict, line_no: int) -> tuple[str, Kind]:
    addr = _address(row, "address", line_no)
    raw = str(row.get("kind", "")).strip().upper()
    try:
        return addr, Kind(raw)
    except ValueError:
        raise MalformedRow(line_no, f"unknown account kind {raw!r}") from None


def _parse_edge(row: dict, line_no: int) -> Edge:
    src = _address(row, "src", line_no)
    dst = _address(row, "dst", line_no)
    raw = str(row.get("etype", "")).strip().lower()
    try:
        etype = EdgeType(raw)
    except ValueError:
        raise UnknownEdgeType(line_no, f"unknown edge type {raw!r}") from None
    is_trans = etype is EdgeType.TRANS
    amount = _int_field(row, "amount", line_no, required=is_trans)
    if amount < 0:
        raise NegativeAmount(line_no, f"negative amount {amount}")
    timestamp = _int_field(row, "timestamp", line_no, required=is_trans)
    return Edge(src, dst, etype, amount, timestamp)


def _parse_label(row: dict, line_no: int) -> tuple[str, Label]:
    addr = _address(row, "address", line_no)
    raw = str(row.get("label", "")).strip().lower().replace("_", "").replace("-", "")
    try:
        return addr, Label(raw)
    except ValueError:
        raise MalformedRow(line_no, f"unknown label {raw!r}") from None


def _collect(stream, fmt, columns, parse_one, lenient, skipped):
    out = []
    for line_no, row in _rows(stream, fmt, columns):
        try:
            if isinstance(row, MalformedRow):
                raise row
            out.append(parse_one(row, line_no))
        except MalformedRow as exc:
            if not lenient:
                raise
            skipped.append(exc)
    return out


def parse_accounts(stream, fmt="csv", lenient=False, skipped=None):
    skipped = [] if skipped is None else skipped
    seen = set()

    def one(row, line_no):
        addr, kind = _parse_account(row, line_no)
        if addr in seen:
            raise MalformedRow(line_no, f"duplicate account {addr}")
        seen.add(addr)
        return addr, kind

    return _collect(stream, fmt, ACCOUNT_COLUMNS, one, lenient, skipped)


def parse_edges(stream, fmt="csv", lenient=False, skipped=None):
    skipped = [] if skipped is None else skipped
    return _collect(stream, fmt, EDGE_COLUMNS, _parse_edge, lenient, skipped)


def parse_labels(stream, fmt="csv", lenient=False, skipped=None):
    skipped = [] if skipped is None else skipped
    labels = {}

    def one(row, line_no):
        addr, label = _parse_label(row, line_no)
        if addr in labels and labels[addr] is not label:
            raise MalformedRow(line_no, f"conflicting label for {addr}")
        labels[addr] = label
        return addr, label

    _collect(stream, fmt, LABEL_COLUMNS, one, lenient, skipped)
    return labels


def parse_records(accounts=None, edges=None, labels=None, fmt="csv", lenient=False) -> Records:
    """Parse any of the three record streams.

    Each argument is an open text stream, a path, or ``None`` (treated as empty).
    With ``lenient=True`` malformed rows are skipped and collected in
    ``Records.skipped``; otherwise the first one raises :class:`MalformedRow`.
    """
    rec = Records()
    for arg, parser, attr in (
        (accounts, parse_accounts, "accounts"),
        (edges, parse_edges, "edges"),
        (labels, parse_labels, "labels"),
    ):
        if arg is None:
            continue
        with _open(arg) as stream:
            setattr(rec, attr, parser(stream, fmt, lenient, rec.skipped))
    return rec


class _open:
    def __init__(self, arg):
        self.arg = arg
        self.fh = None

    def __enter__(self):
        if isinstance(self.arg, (str, Path)):
            self.fh = open(self.arg, encoding="utf-8", newline="")
            return self.fh
        return self.arg

    def __exit__(self, *exc):
        if self.fh is not None:
            self.fh.close()


def read_dataset(directory: Path | str, fmt="csv", lenient=False) -> Records:
    """Read ``accounts``, ``edges`` and (if present) ``labels`` from a directory."""
    directory = Path(directory)
    ext = "csv" if fmt == "csv" else "jsonl"
    labels = directory / f"labels.{ext}"
    return parse_records(
        directory / f"accounts.{ext}",
        directory / f"edges.{ext}",
        labels if labels.exists() else None,
        fmt=fmt,
        lenient=lenient,
    )


def write_accounts(out: IO[str], accounts: Iterable[tuple[str, Kind]]) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(ACCOUNT_COLUMNS)
    for addr, kind in accounts:
        w.writerow((addr, Kind(kind).value))


def write_edges(out: IO[str], edges: Iterable[Edge]) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(EDGE_COLUMNS)
    for e in edges:
        w.writerow((e.src, e.dst, e.etype.value, e.amount, e.timestamp))


def write_labels(out: IO[str], labels: dict[str, Label]) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(LABEL_COLUMNS)
    for addr, label in labels.items():
        w.writerow((addr, Label(label).value))


def write_dataset(directory: Path | str, accounts, edges, labels=None) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "accounts.csv", "w", encoding="utf-8", newline="") as fh:
        write_accounts(fh, accounts)
    with open(directory / "edges.csv", "w", encoding="utf-8", newline="") as fh:
        write_edges(fh, edges)
    if labels is not None:
        with open(directory / "labels.csv", "w", encoding="utf-8", newline="") as fh:
            write_labels(fh, labels)


def to_text(writer, *args) -> str:
    buf = io.StringIO()
    writer(buf, *args)
    return buf.getvalue()
