"""Constraint kinds, impact evaluation and quantile-based selection.

Every registered kind turns an enriched application/infrastructure pair into
scored candidates. All candidates share one impact scale (gCO2eq), a single
threshold is taken at the alpha-quantile of the pooled impacts, and a
constraint is emitted for each candidate strictly above it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime
from typing import TYPE_CHECKING, Callable, Iterable, Sequence

from . import kernels as _kernels
from .model import (
    AFFINITY,
    AVOID_NODE,
    ApplicationDescription,
    CommunicationLink,
    Constraint,
    Flavour,
    InfrastructureDescription,
    Node,
    Placement,
    Service,
)

if TYPE_CHECKING:
    from .estimation import Enrichment
    from .explain import SavingsRange

DEFAULT_ALPHA = 0.8


class NoCandidatesError(ValueError):
    """Raised when there is nothing to threshold."""


@dataclass(frozen=True)
class GeneratorConfig:
    alpha: float = DEFAULT_ALPHA

    def __post_init__(self) -> None:
        if not 0 < self.alpha < 1:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")


@dataclass(frozen=True)
class Candidate:
    kind: str
    service: str
    flavour: str
    target: str
    impact: float

    @property
    def identity(self) -> tuple[str, str, str, str]:
        return (self.kind, self.service, self.flavour, self.target)


Evaluator = Callable[[ApplicationDescription, InfrastructureDescription, "_kernels.Kernels"], list[Candidate]]


@dataclass(frozen=True)
class ConstraintKind:
    """A pluggable constraint type.

    ``evaluate`` scores every candidate of the kind; ``explain`` returns the
    rationale sentence for a constraint; ``savings`` computes its savings
    range from the enrichment.
    """

    name: str
    evaluate: Evaluator
    explain: Callable[[Constraint], str]
    savings: Callable[[Constraint, "Enrichment"], "SavingsRange"] | None = None
    label: str = ""


_REGISTRY: dict[str, ConstraintKind] = {}


def register_kind(kind: ConstraintKind) -> ConstraintKind:
    if kind.name in _REGISTRY:
        raise ValueError(f"constraint kind {kind.name!r} already registered")
    _REGISTRY[kind.name] = kind
    return kind


def unregister_kind(name: str) -> None:
    _REGISTRY.pop(name, None)


def get_kind(name: str) -> ConstraintKind:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown constraint kind {name!r}") from None


def registered_kinds() -> list[ConstraintKind]:
    return list(_REGISTRY.values())


# -- predicates and impacts ----------------------------------------------------


def placement_compatible(service: Service, node: Node) -> bool:
    """A private service may only run on a private node; anything else goes."""
    return not (service.placement is Placement.PRIVATE and node.subnet is Placement.PUBLIC)


def avoid_node_impact(flavour: Flavour, node: Node) -> float | None:
    """Expected emissions of running ``flavour`` on ``node``; ``None`` if unknown."""
    if flavour.energy is None or node.carbon is None:
        return None
    return flavour.energy * node.carbon


def mean_carbon(infra: InfrastructureDescription) -> float | None:
    values = [n.carbon for n in infra.nodes if n.carbon is not None]
    if not values:
        return None
    return math.fsum(values) / len(values)


def affinity_impact(link: CommunicationLink, infra: InfrastructureDescription) -> float | None:
    """Communication energy weighted by the mean node carbon intensity.

    Placement is unknown when constraints are generated, so the mean CI is
    the neutral conversion from kWh to gCO2eq.
    """
    ci = mean_carbon(infra)
    if link.energy is None or ci is None:
        return None
    return link.energy * ci


def compute_threshold(
    impacts: Sequence[float],
    alpha: float = DEFAULT_ALPHA,
    kernels: _kernels.Kernels | None = None,
) -> float:
    """Smallest observed impact whose empirical CDF reaches ``alpha``."""
    if len(impacts) == 0:
        raise NoCandidatesError("no impacts to threshold")
    k = _kernels.threshold_rank(len(impacts), alpha)
    return (kernels or _kernels.default()).kth_smallest(impacts, k)


# -- built-in kinds ------------------------------------------------------------


def evaluate_avoid_node(
    app: ApplicationDescription,
    infra: InfrastructureDescription,
    kernels: _kernels.Kernels,
) -> list[Candidate]:
    rows = [(svc, f) for svc in app.services for f in svc.flavours if f.energy is not None]
    nodes = [n for n in infra.nodes if n.carbon is not None]
    if not rows or not nodes:
        return []
    compat = [[placement_compatible(svc, n) for n in nodes] for svc, _ in rows]
    ri, ci, impacts = kernels.pair_impacts(
        [f.energy for _, f in rows],  # type: ignore[misc]
        [n.carbon for n in nodes],  # type: ignore[misc]
        compat,
    )
    return [
        Candidate(AVOID_NODE, rows[i][0].component_id, rows[i][1].id, nodes[j].id, float(v))
        for i, j, v in zip(ri, ci, impacts)
    ]


def evaluate_affinity(
    app: ApplicationDescription,
    infra: InfrastructureDescription,
    kernels: _kernels.Kernels,
) -> list[Candidate]:
    out: list[Candidate] = []
    seen: set[tuple[str, str, str]] = set()
    for link in app.links:
        if link.source == link.destination or link.key in seen:
            continue
        impact = affinity_impact(link, infra)
        if impact is None:
            continue
        seen.add(link.key)
        out.append(Candidate(AFFINITY, link.source, link.source_flavour, link.destination, impact))
    return out


def _avoid_rationale(c: Constraint) -> str:
    return (
        "It is driven by the high energy demand of the selected flavour combined "
        "with the carbon-intensive energy mix of the target node."
    )


def _affinity_rationale(c: Constraint) -> str:
    return (
        "It is driven by the high communication energy between the two services, "
        "which is incurred whenever they are placed on different nodes."
    )


def _avoid_savings(c: Constraint, enrichment: "Enrichment") -> "SavingsRange":
    from .explain import avoid_savings_range

    return avoid_savings_range(c, enrichment.app, enrichment.infra)


def _affinity_savings(c: Constraint, enrichment: "Enrichment") -> "SavingsRange":
    from .explain import affinity_savings_range

    return affinity_savings_range(c, enrichment.app, enrichment.infra)


register_kind(ConstraintKind(AVOID_NODE, evaluate_avoid_node, _avoid_rationale, _avoid_savings, "AvoidNode"))
register_kind(ConstraintKind(AFFINITY, evaluate_affinity, _affinity_rationale, _affinity_savings, "Affinity"))


# -- generation ----------------------------------------------------------------


def evaluate_candidates(
    app: ApplicationDescription,
    infra: InfrastructureDescription,
    kinds: Iterable[ConstraintKind] | None = None,
    kernels: _kernels.Kernels | None = None,
) -> list[Candidate]:
    kernels = kernels or _kernels.default()
    out: list[Candidate] = []
    for kind in registered_kinds() if kinds is None else kinds:
        out.extend(kind.evaluate(app, infra, kernels))
    return out


def select(
    candidates: Sequence[Candidate],
    alpha: float = DEFAULT_ALPHA,
    kernels: _kernels.Kernels | None = None,
) -> tuple[float, list[Candidate]]:
    """Threshold the pooled impacts and keep candidates strictly above it."""
    impacts = [c.impact for c in candidates]
    tau = compute_threshold(impacts, alpha, kernels)
    return tau, [c for c in candidates if c.impact > tau]


def generate(
    app: ApplicationDescription,
    infra: InfrastructureDescription,
    config: GeneratorConfig = GeneratorConfig(),
    kinds: Iterable[ConstraintKind] | None = None,
    now: datetime | None = None,
    kernels: _kernels.Kernels | None = None,
) -> list[Constraint]:
    """Emit constraints for every candidate above the alpha-quantile of impacts.

    Output is sorted by constraint identity so it does not depend on
    evaluation order.
    """
    candidates = evaluate_candidates(app, infra, kinds, kernels)
    if not candidates:
        raise NoCandidatesError("no profiled services or links to generate constraints from")
    _, chosen = select(candidates, config.alpha, kernels)
    return sorted(
        (Constraint(c.kind, c.service, c.flavour, c.target, em=c.impact, mu=1.0, generated_at=now) for c in chosen),
        key=lambda c: c.identity,
    )
