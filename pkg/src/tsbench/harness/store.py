"""Dataset-level score records and their CSV/JSON persistence."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable

from ..errors import MissingMethod
from ..evaluation import MEASURES

CSV_COLUMNS = ("dataset", "method", "measure", "value", "runs", "seed_base")
STATUS_COLUMNS = ("dataset", "method", "status", "runs", "message")


@dataclass(frozen=True)
class ScoreRecord:
    dataset: str
    method: str
    measure: str
    value: float
    runs: int
    seed_base: int

    def __post_init__(self):
        if self.measure not in MEASURES:
            raise ValueError(f"unknown measure {self.measure!r}")

    @property
    def key(self):
        return self.dataset, self.method, self.measure


def format_value(v: float) -> str:
    s = f"{v:.6f}"
    # "-0.000000" and "0.000000" must serialize identically
    return "0.000000" if s == "-0.000000" else s


def quantize(v: float) -> float:
    return float(format_value(v))


def sort_records(records: Iterable[ScoreRecord]) -> list:
    return sorted(records, key=lambda r: r.key)


def records_to_csv(records: Iterable[ScoreRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in sort_records(records):
        w.writerow([r.dataset, r.method, r.measure, format_value(r.value), r.runs, r.seed_base])
    return buf.getvalue()


def records_from_csv(text: str) -> list:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_COLUMNS:
        raise ValueError(f"expected header {','.join(CSV_COLUMNS)}")
    return [ScoreRecord(d, m, s, float(v), int(n), int(b)) for d, m, s, v, n, b in rows[1:]]


def records_to_json(records: Iterable[ScoreRecord]) -> str:
    rows = []
    for r in sort_records(records):
        row = asdict(r)
        row["value"] = quantize(r.value)
        rows.append(row)
    return json.dumps(rows, indent=1) + "\n"


def records_from_json(text: str) -> list:
    return [ScoreRecord(**row) for row in json.loads(text)]


def export_scores(records, path, fmt: str = "csv") -> Path:
    """Write records as ``csv`` or ``json``; returns the written path."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(records_to_csv(records) if fmt == "csv" else records_to_json(records))
    return path


def import_scores(path) -> list:
    path = Path(path)
    text = path.read_text()
    return records_from_json(text) if path.suffix == ".json" else records_from_csv(text)


def status_to_csv(rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, STATUS_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in sorted(rows, key=lambda r: (r["dataset"], r["method"])):
        w.writerow(row)
    return buf.getvalue()


class ResultStore:
    """In-memory view over score records, indexed by (dataset, method, measure)."""

    SCORES = "scores.csv"
    STATUS = "status.csv"
    MANIFEST = "manifest.json"

    def __init__(self, records: Iterable[ScoreRecord] = (), status: Iterable[dict] = ()):
        self._records = {}
        for r in records:
            if r.key in self._records:
                raise ValueError(f"duplicate record for {r.key}")
            self._records[r.key] = r
        self.status = list(status)

    def __len__(self):
        return len(self._records)

    @property
    def records(self) -> list:
        return sort_records(self._records.values())

    def methods(self) -> list:
        return sorted({r.method for r in self._records.values()})

    def datasets(self) -> list:
        return sorted({r.dataset for r in self._records.values()})

    def vector(self, method: str, measure: str = "ari") -> dict:
        """Per-dataset scores of one method, keyed by dataset name."""
        return {r.dataset: r.value for r in self.records if r.method == method and r.measure == measure}

    def aligned(self, methods, measure: str = "ari"):
        """Datasets scored by every method in ``methods`` and the aligned score vectors."""
        missing = [m for m in methods if m not in self.methods()]
        if missing:
            raise MissingMethod(missing)
        vectors = {m: self.vector(m, measure) for m in methods}
        common = sorted(set.intersection(*(set(v) for v in vectors.values())))
        return common, {m: [vectors[m][d] for d in common] for m in methods}

    def save(self, directory) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        export_scores(self.records, directory / self.SCORES, "csv")
        (directory / self.STATUS).write_text(status_to_csv(self.status))
        return directory

    @classmethod
    def load(cls, directory) -> "ResultStore":
        directory = Path(directory)
        scores = directory / cls.SCORES
        if not scores.is_file():
            raise FileNotFoundError(f"no {cls.SCORES} in {directory}")
        status = []
        if (directory / cls.STATUS).is_file():
            with open(directory / cls.STATUS, newline="") as fh:
                status = list(csv.DictReader(fh))
        return cls(import_scores(scores), status)
