"""Scheduler-facing output: Prolog facts and a JSON export."""

from __future__ import annotations

import json
import re
from typing import Any, Mapping, Sequence

from .explain import SavingsRange
from .model import AFFINITY, AVOID_NODE, Constraint

_NON_ALNUM = re.compile(r"[^a-z0-9]")

_AVOID_FACT = re.compile(r"^avoidNode\(d\(([a-z0-9_]+),([a-z0-9_]+)\),([a-z0-9_]+),([0-9.]+)\)\.$")
_AFFINITY_FACT = re.compile(r"^affinity\(d\(([a-z0-9_]+),([a-z0-9_]+)\),d\(([a-z0-9_]+),_\),([0-9.]+)\)\.$")


class AdapterError(ValueError):
    pass


def atom(identifier: str) -> str:
    """Lower-case an identifier and replace anything non-alphanumeric with ``_``."""
    return _NON_ALNUM.sub("_", identifier.lower())


def format_weight(w: float) -> str:
    """Three decimals with trailing zeros trimmed, keeping one: 1.0, 0.89, 0.636."""
    text = f"{w:.3f}".rstrip("0")
    return text + "0" if text.endswith(".") else text


def rounded_weight(w: float) -> float:
    return float(format_weight(w))


def _require_weight(c: Constraint) -> float:
    if c.weight is None:
        raise AdapterError(f"constraint {c.identity} has not been ranked")
    return c.weight


def to_prolog(ranked: Sequence[Constraint]) -> str:
    lines = []
    for c in ranked:
        w = format_weight(_require_weight(c))
        s, f, t = atom(c.service), atom(c.flavour), atom(c.target)
        if c.kind == AVOID_NODE:
            lines.append(f"avoidNode(d({s},{f}),{t},{w}).")
        elif c.kind == AFFINITY:
            lines.append(f"affinity(d({s},{f}),d({t},_),{w}).")
        else:
            lines.append(f"{c.kind}(d({s},{f}),{t},{w}).")
    return "".join(line + "\n" for line in lines)


def parse_prolog(text: str) -> list[tuple[str, str, str, str, float]]:
    """Parse avoidNode/affinity facts back into (kind, service, flavour, target, weight)."""
    out = []
    for n, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("%"):
            continue
        m = _AVOID_FACT.match(line)
        kind = AVOID_NODE
        if m is None:
            m = _AFFINITY_FACT.match(line)
            kind = AFFINITY
        if m is None:
            raise AdapterError(f"line {n}: not a constraint fact: {line!r}")
        s, f, t, w = m.groups()
        out.append((kind, s, f, t, float(w)))
    return out


def to_structured(
    ranked: Sequence[Constraint],
    ranges: Mapping[tuple[str, str, str, str], SavingsRange | None] | None = None,
) -> list[dict[str, Any]]:
    ranges = ranges or {}
    out = []
    for c in ranked:
        rng = ranges.get(c.identity)
        out.append({
            "kind": c.kind,
            "service": c.service,
            "flavour": c.flavour,
            "target": c.target,
            "em": c.em,
            "weight": rounded_weight(_require_weight(c)),
            "mu": c.mu,
            "savings_lower": rng.lower if rng else None,
            "savings_upper": rng.upper if rng else None,
        })
    return out


def dumps_structured(doc: list[dict[str, Any]]) -> str:
    return json.dumps(doc, indent=2) + "\n"


def from_structured(text: str) -> list[Constraint]:
    """Rebuild ranked constraints from an exported JSON document."""
    try:
        doc = json.loads(text)
        return [
            Constraint(e["kind"], e["service"], e["flavour"], e["target"], em=e["em"], weight=e["weight"], mu=e["mu"])
            for e in doc
        ]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise AdapterError(f"not a constraint export: {exc}") from exc
