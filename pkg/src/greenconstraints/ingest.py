"""CSV loaders for energy, traffic and carbon-intensity samples.

Each loader returns a dict mapping a key tuple (or node id) to a list of
samples sorted by timestamp. Rows are validated as they are read; a bad row
raises :class:`IngestError` carrying the file and line number.
"""

from __future__ import annotations

import csv
import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Collection, Iterable, TypeVar

log = logging.getLogger(__name__)

ENERGY_HEADER = ("service", "flavour", "timestamp", "energy_kwh")
TRAFFIC_HEADER = (
    "source",
    "source_flavour",
    "destination",
    "timestamp",
    "request_volume_per_hour",
    "request_size_gb",
)
CARBON_HEADER = ("node", "timestamp", "ci_gco2_per_kwh")


class IngestError(ValueError):
    def __init__(self, path: str | Path, line: int | None, message: str):
        self.path = str(path)
        self.line = line
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class EnergySample:
    service: str
    flavour: str
    t: datetime
    energy: float


@dataclass(frozen=True)
class TrafficSample:
    source: str
    source_flavour: str
    destination: str
    t: datetime
    request_volume: float
    request_size: float


@dataclass(frozen=True)
class CarbonSample:
    node: str
    t: datetime
    ci: float


def parse_timestamp(text: str) -> datetime:
    """Parse an RFC 3339 timestamp; naive values are taken as UTC."""
    text = text.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    t = datetime.fromisoformat(text)
    if t.tzinfo is None:
        t = t.replace(tzinfo=timezone.utc)
    return t


def format_timestamp(t: datetime) -> str:
    return t.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def _non_negative(value: str, name: str) -> float:
    x = float(value)
    if not math.isfinite(x) or x < 0:
        raise ValueError(f"{name} must be a non-negative number, got {value!r}")
    return x


def _identifier(value: str, name: str) -> str:
    value = value.strip()
    if not value:
        raise ValueError(f"{name} is empty")
    return value


K = TypeVar("K")
S = TypeVar("S")


def _read_rows(
    path: str | Path,
    header: tuple[str, ...],
    build: Callable[[dict[str, str]], S],
) -> Iterable[tuple[int, S]]:
    path = Path(path)
    try:
        handle = path.open(newline="")
    except OSError as exc:
        raise IngestError(path, None, f"cannot open: {exc.strerror}") from exc
    with handle:
        reader = csv.reader(handle)
        first = next(reader, None)
        if first is None:
            return
        if tuple(c.strip() for c in first) != header:
            raise IngestError(path, 1, f"expected header {','.join(header)!r}, got {','.join(first)!r}")
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise IngestError(path, line, f"expected {len(header)} fields, got {len(row)}")
            try:
                yield line, build(dict(zip(header, row)))
            except ValueError as exc:
                raise IngestError(path, line, str(exc)) from exc


def _group(
    path: str | Path,
    rows: Iterable[tuple[int, S]],
    key: Callable[[S], K],
) -> dict[K, list[S]]:
    grouped: dict[K, list[tuple[int, S]]] = defaultdict(list)
    for line, sample in rows:
        grouped[key(sample)].append((line, sample))
    out: dict[K, list[S]] = {}
    for k in sorted(grouped):
        entries = sorted(grouped[k], key=lambda e: e[1].t)  # type: ignore[attr-defined]
        for (_, a), (line, b) in zip(entries, entries[1:]):
            if a.t == b.t:  # type: ignore[attr-defined]
                raise IngestError(path, line, f"duplicate timestamp {format_timestamp(b.t)} for {k}")  # type: ignore[attr-defined]
        out[k] = [s for _, s in entries]
    return out


def _build_energy(row: dict[str, str]) -> EnergySample:
    return EnergySample(
        service=_identifier(row["service"], "service"),
        flavour=_identifier(row["flavour"], "flavour"),
        t=parse_timestamp(row["timestamp"]),
        energy=_non_negative(row["energy_kwh"], "energy_kwh"),
    )


def _build_traffic(row: dict[str, str]) -> TrafficSample:
    sample = TrafficSample(
        source=_identifier(row["source"], "source"),
        source_flavour=_identifier(row["source_flavour"], "source_flavour"),
        destination=_identifier(row["destination"], "destination"),
        t=parse_timestamp(row["timestamp"]),
        request_volume=_non_negative(row["request_volume_per_hour"], "request_volume_per_hour"),
        request_size=_non_negative(row["request_size_gb"], "request_size_gb"),
    )
    if sample.source == sample.destination:
        raise ValueError(f"source and destination are both {sample.source!r}")
    return sample


def _build_carbon(row: dict[str, str]) -> CarbonSample:
    return CarbonSample(
        node=_identifier(row["node"], "node"),
        t=parse_timestamp(row["timestamp"]),
        ci=_non_negative(row["ci_gco2_per_kwh"], "ci_gco2_per_kwh"),
    )


def load_energy_samples(
    path: str | Path,
    known: Collection[tuple[str, str]] | None = None,
) -> dict[tuple[str, str], list[EnergySample]]:
    """Load computation energy samples keyed by ``(service, flavour)``.

    ``known`` lists the (service, flavour) pairs of the current application;
    rows for other pairs are kept but logged, since metric files may cover
    superseded versions.
    """
    series = _group(path, _read_rows(path, ENERGY_HEADER, _build_energy), lambda s: (s.service, s.flavour))
    if known is not None:
        for key in series:
            if key not in known:
                log.warning("%s: unknown service/flavour %s/%s", path, *key)
    return series


def load_traffic_samples(
    path: str | Path,
    known: Collection[tuple[str, str]] | None = None,
) -> dict[tuple[str, str, str], list[TrafficSample]]:
    """Load traffic samples keyed by ``(source, source_flavour, destination)``."""
    series = _group(
        path,
        _read_rows(path, TRAFFIC_HEADER, _build_traffic),
        lambda s: (s.source, s.source_flavour, s.destination),
    )
    if known is not None:
        for src, flav, dst in series:
            if (src, flav) not in known:
                log.warning("%s: unknown source service/flavour %s/%s", path, src, flav)
    return series


def load_carbon_samples(
    path: str | Path,
    known: Collection[str] | None = None,
) -> dict[str, list[CarbonSample]]:
    series = _group(path, _read_rows(path, CARBON_HEADER, _build_carbon), lambda s: s.node)
    if known is not None:
        for node in series:
            if node not in known:
                log.warning("%s: unknown node %s", path, node)
    return series


def write_energy_samples(path: str | Path, samples: Iterable[EnergySample]) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ENERGY_HEADER)
        for s in samples:
            w.writerow([s.service, s.flavour, format_timestamp(s.t), repr(s.energy)])


def write_traffic_samples(path: str | Path, samples: Iterable[TrafficSample]) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRAFFIC_HEADER)
        for s in samples:
            w.writerow([
                s.source, s.source_flavour, s.destination, format_timestamp(s.t),
                repr(s.request_volume), repr(s.request_size),
            ])


def write_carbon_samples(path: str | Path, samples: Iterable[CarbonSample]) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CARBON_HEADER)
        for s in samples:
            w.writerow([s.node, format_timestamp(s.t), repr(s.ci)])
