"""Explainability report: a rationale and a savings range for each constraint."""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Mapping, Sequence

from .engine import get_kind, placement_compatible
from .model import (
    AFFINITY,
    AVOID_NODE,
    ApplicationDescription,
    Constraint,
    InfrastructureDescription,
    Node,
    Placement,
    Service,
)


class ExplainError(ValueError):
    pass


@dataclass(frozen=True)
class SavingsRange:
    """Expected emission reduction in gCO2eq if the constraint is honoured."""

    lower: float
    upper: float

    def __post_init__(self) -> None:
        if not 0 <= self.lower <= self.upper:
            raise ValueError(f"invalid savings range ({self.lower}, {self.upper})")


def _flavour_energy(app: ApplicationDescription, service: str, flavour: str) -> float:
    svc = app.service(service)
    f = svc.flavour(flavour) if svc is not None else None
    if f is None or f.energy is None:
        raise ExplainError(f"{service}/{flavour} has no energy profile")
    return f.energy


class _CarbonIndex:
    """Sorted carbon intensities of the nodes each placement class may use."""

    def __init__(self, infra: InfrastructureDescription):
        nodes = [n for n in infra.nodes if n.carbon is not None]
        self._by_node = {n.id: n for n in nodes}
        self._sorted = {
            p: sorted((n.carbon, n.id) for n in nodes if placement_compatible(Service(p.value, (), placement=p), n))
            for p in Placement
        }

    def node(self, node_id: str) -> Node | None:
        return self._by_node.get(node_id)

    def alternatives(self, placement: Placement, exclude: str) -> list[tuple[float, str]]:
        return [e for e in self._sorted[placement] if e[1] != exclude]


def avoid_savings_range(
    c: Constraint,
    app: ApplicationDescription,
    infra: InfrastructureDescription,
    _index: _CarbonIndex | None = None,
) -> SavingsRange:
    """Savings from moving ``c.service`` off ``c.target``.

    The upper bound moves it to the greenest compatible node; the lower bound
    to the dirtiest compatible node that is still greener than the avoided
    one (or the greenest when there is none). Negative gains clamp to zero.
    """
    index = _index or _CarbonIndex(infra)
    svc = app.service(c.service)
    node = index.node(c.target)
    if svc is None or node is None:
        raise ExplainError(f"constraint {c.identity} references an unknown service or node")
    energy = _flavour_energy(app, c.service, c.flavour)
    alts = index.alternatives(svc.placement, node.id)
    if not alts:
        raise ExplainError(f"no compatible alternative to node {node.id!r} for {c.service}")
    ci = node.carbon
    best = alts[0][0]
    pos = bisect.bisect_left([a[0] for a in alts], ci)
    next_worse = alts[pos - 1][0] if pos > 0 else best
    upper = max(0.0, (ci - best) * energy)  # type: ignore[operator]
    lower = max(0.0, (ci - next_worse) * energy)  # type: ignore[operator]
    return SavingsRange(min(lower, upper), upper)


def affinity_savings_range(
    c: Constraint,
    app: ApplicationDescription,
    infra: InfrastructureDescription,
) -> SavingsRange:
    """Communication energy priced at the greenest and dirtiest node CI."""
    link = next(
        (l for l in app.links if l.key == (c.service, c.flavour, c.target) and l.energy is not None),
        None,
    )
    if link is None:
        raise ExplainError(f"link {c.service}/{c.flavour} -> {c.target} has no energy profile")
    cis = [n.carbon for n in infra.nodes if n.carbon is not None]
    if not cis:
        raise ExplainError("no node carbon intensities")
    return SavingsRange(link.energy * min(cis), link.energy * max(cis))  # type: ignore[operator]


def savings_ranges(
    constraints: Sequence[Constraint],
    app: ApplicationDescription,
    infra: InfrastructureDescription,
) -> dict[tuple[str, str, str, str], SavingsRange | None]:
    """Savings range per constraint identity; ``None`` when it cannot be computed."""
    index = _CarbonIndex(infra)
    out: dict[tuple[str, str, str, str], SavingsRange | None] = {}
    for c in constraints:
        try:
            if c.kind == AVOID_NODE:
                out[c.identity] = avoid_savings_range(c, app, infra, index)
            elif c.kind == AFFINITY:
                out[c.identity] = affinity_savings_range(c, app, infra)
            else:
                savings = get_kind(c.kind).savings
                out[c.identity] = savings(c, _Bundle(app, infra)) if savings else None  # type: ignore[arg-type]
        except ExplainError:
            out[c.identity] = None
    return out


@dataclass(frozen=True)
class _Bundle:
    app: ApplicationDescription
    infra: InfrastructureDescription


def _fmt(x: float) -> str:
    return f"{x:,.2f}"


def _subject(c: Constraint) -> str:
    if c.kind == AVOID_NODE:
        return f'the deployment of the "{c.service}" service in the "{c.flavour}" flavour on the "{c.target}" node'
    if c.kind == AFFINITY:
        return (
            f'co-locating the "{c.service}" service in the "{c.flavour}" flavour '
            f'with the "{c.target}" service'
        )
    return f'"{c.service}" in the "{c.flavour}" flavour with target "{c.target}"'


def _paragraph(c: Constraint, rng: SavingsRange | None) -> str:
    try:
        kind = get_kind(c.kind)
        label, rationale = kind.label or kind.name, kind.explain(c)
    except KeyError:
        label, rationale = c.kind, ""
    verb = "concerns" if c.kind == AFFINITY else "advises against"
    weight = f"{c.weight:.3f}" if c.weight is not None else "unranked"
    lines = [
        f'An "{label}" constraint (weight {weight}, memory {c.mu:.3f}) {verb} {_subject(c)}. {rationale}'.rstrip()
    ]
    if rng is None:
        lines.append("No savings range could be estimated for this constraint.")
    else:
        lines.append(
            f"Estimated emission savings if enforced: between {_fmt(rng.lower)} and {_fmt(rng.upper)} gCO2eq "
            f"(kilo-scaled: {rng.lower / 1000:.2f} to {rng.upper / 1000:.2f})."
        )
    return "\n".join(lines)


def render_report(
    ranked: Sequence[Constraint],
    ranges: Mapping[tuple[str, str, str, str], SavingsRange | None],
    fmt: str = "text",
) -> str:
    """One paragraph per constraint, in the order given."""
    if fmt not in ("text", "md"):
        raise ValueError(f"unknown report format {fmt!r}")
    body = [_paragraph(c, ranges.get(c.identity)) for c in ranked]
    if fmt == "md":
        head = ["# Explainability report", ""]
        if not body:
            return "\n".join(head + ["No constraints were generated.", ""])
        parts = []
        for i, (c, p) in enumerate(zip(ranked, body), 1):
            parts.append(f"## {i}. {c.kind} {c.service}/{c.flavour} -> {c.target}\n\n{p}\n")
        return "\n".join(head) + "\n".join(parts)
    if not body:
        return "No constraints were generated.\n"
    return "\n\n".join(body) + "\n"
