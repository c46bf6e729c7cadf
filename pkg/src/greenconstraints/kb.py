"""Persistent knowledge base of profiles, carbon intensities and constraints.

The store has four parts: service knowledge (per service/flavour energy),
interaction knowledge (per link energy), node knowledge (carbon intensity)
and constraint knowledge (past constraints with a decaying memory weight).
It lives on disk as a directory of JSON files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from datetime import datetime
from pathlib import Path
from typing import Any, Iterable, Mapping

from .estimation import CarbonProfile, EnergyProfile
from .model import Constraint

FORMAT_TAG = "greenconstraints-kb/1"
DEFAULT_DECAY_DELTA = 0.8
DEFAULT_MU_DROP = 0.4

FILES = ("sk.json", "ik.json", "nk.json", "ck.json", "meta.json")


class KnowledgeBaseError(ValueError):
    pass


@dataclass(frozen=True)
class Stats:
    """Max/min/avg of a quantity, with the sample count behind the average."""

    max: float
    min: float
    avg: float
    count: int
    t: datetime

    def merged(self, other: "Stats", now: datetime) -> "Stats":
        n = self.count + other.count
        # incremental form: merging an equal average leaves it bit-identical
        avg = self.avg + (other.avg - self.avg) * (other.count / n)
        lo, hi = min(self.min, other.min), max(self.max, other.max)
        return Stats(hi, lo, min(max(avg, lo), hi), n, max(self.t, now))


@dataclass(frozen=True)
class ConstraintRecord:
    em: float
    mu: float
    t: datetime


@dataclass(frozen=True)
class KnowledgeBase:
    sk: dict[tuple[str, str], Stats] = field(default_factory=dict)
    ik: dict[tuple[str, str, str], Stats] = field(default_factory=dict)
    nk: dict[str, Stats] = field(default_factory=dict)
    ck: dict[tuple[str, str, str, str], ConstraintRecord] = field(default_factory=dict)
    iteration: int = 0
    config: dict[str, Any] = field(default_factory=dict)


def _merge_into(store: dict, key: Any, new: Stats, now: datetime) -> None:
    old = store.get(key)
    store[key] = new if old is None else old.merged(new, now)


def merge_observations(
    kb: KnowledgeBase,
    profiles: Mapping[tuple[str, str], EnergyProfile],
    link_profiles: Mapping[tuple[str, str, str], EnergyProfile],
    carbon_profiles: Mapping[str, CarbonProfile],
    now: datetime,
) -> KnowledgeBase:
    """Fold fresh profiles into SK, IK and NK.

    Extremes are combined with max/min; averages are weighted by sample count.
    """
    sk, ik, nk = dict(kb.sk), dict(kb.ik), dict(kb.nk)
    for key, p in profiles.items():
        _merge_into(sk, key, Stats(p.max, p.min, p.avg, p.count, now), now)
    for key, p in link_profiles.items():
        _merge_into(ik, key, Stats(p.max, p.min, p.avg, p.count, now), now)
    for key, c in carbon_profiles.items():
        _merge_into(nk, key, Stats(c.max, c.min, c.avg, c.count, now), now)
    return replace(kb, sk=sk, ik=ik, nk=nk)


def upsert_constraints(
    kb: KnowledgeBase,
    fresh: Iterable[Constraint],
    now: datetime,
    decay_delta: float = DEFAULT_DECAY_DELTA,
    mu_drop: float = DEFAULT_MU_DROP,
) -> KnowledgeBase:
    """Store fresh constraints at mu=1 and decay everything not regenerated."""
    if not 0 < decay_delta <= 1:
        raise ValueError(f"decay_delta must lie in (0, 1], got {decay_delta}")
    fresh_ck = {c.identity: ConstraintRecord(c.em, 1.0, now) for c in fresh}
    ck: dict[tuple[str, str, str, str], ConstraintRecord] = {}
    for ident, rec in kb.ck.items():
        if ident in fresh_ck:
            continue
        mu = decay_delta * rec.mu
        if mu >= mu_drop:
            ck[ident] = replace(rec, mu=mu)
    ck.update(fresh_ck)
    return replace(kb, ck=dict(sorted(ck.items())), iteration=kb.iteration + 1)


def valid_constraints(kb: KnowledgeBase, mu_drop: float = DEFAULT_MU_DROP) -> list[Constraint]:
    return [
        Constraint(kind, s, f, target, em=rec.em, mu=rec.mu, generated_at=rec.t)
        for (kind, s, f, target), rec in sorted(kb.ck.items())
        if rec.mu >= mu_drop
    ]


# -- persistence -----------------------------------------------------------------


def _stats_doc(key: tuple | str, s: Stats, names: tuple[str, ...]) -> dict[str, Any]:
    doc = dict(zip(names, key if isinstance(key, tuple) else (key,)))
    doc.update(max=s.max, min=s.min, avg=s.avg, count=s.count, t=s.t.isoformat())
    return doc


def _stats_from(doc: Mapping[str, Any]) -> Stats:
    return Stats(float(doc["max"]), float(doc["min"]), float(doc["avg"]), int(doc["count"]), datetime.fromisoformat(doc["t"]))


_SK = ("service", "flavour")
_IK = ("source", "flavour", "destination")
_NK = ("node",)
_CK = ("kind", "service", "flavour", "target")


def persist(kb: KnowledgeBase, directory: str | Path) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    docs = {
        "sk.json": [_stats_doc(k, v, _SK) for k, v in sorted(kb.sk.items())],
        "ik.json": [_stats_doc(k, v, _IK) for k, v in sorted(kb.ik.items())],
        "nk.json": [_stats_doc(k, v, _NK) for k, v in sorted(kb.nk.items())],
        "ck.json": [
            dict(zip(_CK, k), em=v.em, mu=v.mu, t=v.t.isoformat()) for k, v in sorted(kb.ck.items())
        ],
        "meta.json": {"format": FORMAT_TAG, "iteration": kb.iteration, "config": kb.config},
    }
    for name, doc in docs.items():
        tmp = d / (name + ".tmp")
        tmp.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
        tmp.replace(d / name)


def load(directory: str | Path) -> KnowledgeBase:
    """Load a KB directory; a missing directory is an empty KB."""
    d = Path(directory)
    if not d.exists():
        return KnowledgeBase()
    docs: dict[str, Any] = {}
    for name in FILES:
        path = d / name
        if not path.exists():
            docs[name] = {} if name == "meta.json" else []
            continue
        try:
            docs[name] = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise KnowledgeBaseError(f"{path}: corrupt knowledge base file: {exc}") from exc
    name = ""
    try:
        name = "meta.json"
        meta = docs[name]
        if meta and meta.get("format") != FORMAT_TAG:
            raise KnowledgeBaseError(f"{d / name}: unsupported format {meta.get('format')!r}")
        name = "sk.json"
        sk = {tuple(e[k] for k in _SK): _stats_from(e) for e in docs[name]}
        name = "ik.json"
        ik = {tuple(e[k] for k in _IK): _stats_from(e) for e in docs[name]}
        name = "nk.json"
        nk = {e["node"]: _stats_from(e) for e in docs[name]}
        name = "ck.json"
        ck = {
            tuple(e[k] for k in _CK): ConstraintRecord(float(e["em"]), float(e["mu"]), datetime.fromisoformat(e["t"]))
            for e in docs[name]
        }
    except KnowledgeBaseError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise KnowledgeBaseError(f"{d / name}: corrupt knowledge base file: {exc!r}") from exc
    return KnowledgeBase(
        sk=sk, ik=ik, nk=nk, ck=ck,  # type: ignore[arg-type]
        iteration=int(meta.get("iteration", 0)),
        config=dict(meta.get("config", {})),
    )


def reset(directory: str | Path) -> None:
    d = Path(directory)
    for name in FILES:
        (d / name).unlink(missing_ok=True)
