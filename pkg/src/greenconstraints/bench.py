"""Synthetic scalability and threshold benchmarks."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels as _kernels
from .engine import evaluate_candidates, select
from .explain import savings_ranges
from .model import (
    ApplicationDescription,
    CommunicationLink,
    Constraint,
    Flavour,
    InfrastructureDescription,
    Node,
    Placement,
    Service,
)
from .ranker import rank

QUANTILES = (0.90, 0.85, 0.80, 0.75, 0.70, 0.65, 0.60, 0.55, 0.50)
ENERGY_RANGE = (10.0, 2000.0)
CI_RANGE = (16.0, 600.0)


def synth_instance(
    n_services: int,
    n_nodes: int,
    seed: int = 0,
    max_flavours: int = 3,
    links_per_service: int = 2,
    private_share: float = 0.1,
) -> tuple[ApplicationDescription, InfrastructureDescription]:
    """A seeded, already-enriched application and infrastructure.

    Flavour energies are log-uniform over ``ENERGY_RANGE`` and node carbon
    intensities uniform over ``CI_RANGE``. A share of services and nodes is
    private so that placement filtering is exercised; at least one node is
    always private.
    """
    rng = np.random.default_rng(seed)
    lo, hi = math.log(ENERGY_RANGE[0]), math.log(ENERGY_RANGE[1])
    services = []
    for i in range(n_services):
        nf = int(rng.integers(1, max_flavours + 1))
        energies = np.sort(np.exp(rng.uniform(lo, hi, nf)))[::-1]
        flavours = tuple(
            Flavour(f"f{j}", {"cpu": 100 * (nf - j)}, {}, float(e)) for j, e in enumerate(energies)
        )
        placement = Placement.PRIVATE if rng.random() < private_share else Placement.PUBLIC
        services.append(Service(f"s{i}", flavours, tuple(f.id for f in flavours), placement=placement))
    links = []
    if n_services > 1:
        for i, svc in enumerate(services):
            for _ in range(links_per_service):
                j = int(rng.integers(0, n_services - 1))
                j = j + 1 if j >= i else j
                energy = float(math.exp(rng.uniform(math.log(0.1), math.log(200.0))))
                links.append(CommunicationLink(svc.component_id, svc.flavours[0].id, f"s{j}", {}, energy))
    cis = rng.uniform(*CI_RANGE, n_nodes)
    private = rng.random(n_nodes) < private_share
    if n_nodes:
        private[0] = True
    nodes = tuple(
        Node(f"n{j}", {"subnet": "Private" if private[j] else "Public"}, 1.0, float(cis[j])) for j in range(n_nodes)
    )
    return ApplicationDescription("synthetic", tuple(services), tuple(links)), InfrastructureDescription(nodes)


@dataclass
class BenchRow:
    services: int
    nodes: int
    candidates: int
    seconds: float
    ranked: int
    counts: dict[float, int] = field(default_factory=dict)
    backend: str = ""


def run_case(
    n_services: int,
    n_nodes: int,
    seed: int = 0,
    quantiles: tuple[float, ...] = QUANTILES,
    kernels: _kernels.Kernels | None = None,
    alpha: float = 0.8,
) -> BenchRow:
    """Time one generate-rank-explain pass and count constraints per quantile.

    The timed pass covers candidate evaluation, thresholding at ``alpha``,
    ranking and savings ranges; the quantile sweep reuses the candidates.
    """
    kernels = kernels or _kernels.default()
    app, infra = synth_instance(n_services, n_nodes, seed)
    if n_services == 0 or n_nodes == 0:
        return BenchRow(n_services, n_nodes, 0, 0.0, 0, {q: 0 for q in quantiles}, kernels.name)
    t0 = time.perf_counter()
    candidates = evaluate_candidates(app, infra, kernels=kernels)
    _, chosen = select(candidates, alpha, kernels)
    ranked = rank([Constraint(c.kind, c.service, c.flavour, c.target, c.impact) for c in chosen])
    savings_ranges(ranked, app, infra)
    seconds = time.perf_counter() - t0
    counts = {q: len(select(candidates, q, kernels)[1]) for q in quantiles}
    return BenchRow(n_services, n_nodes, len(candidates), seconds, len(ranked), counts, kernels.name)


def run_bench(
    sizes: list[tuple[int, int]],
    seed: int = 0,
    quantiles: tuple[float, ...] = QUANTILES,
    kernels: _kernels.Kernels | None = None,
) -> list[BenchRow]:
    return [run_case(s, n, seed, quantiles, kernels) for s, n in sizes]


def format_table(rows: list[BenchRow]) -> str:
    if not rows:
        return "(no cases)\n"
    qs = list(rows[0].counts)
    head = ["services", "nodes", "candidates", "seconds", "ranked"] + [f"q{q:.2f}" for q in qs]
    lines = ["\t".join(head)]
    for r in rows:
        lines.append("\t".join(
            [str(r.services), str(r.nodes), str(r.candidates), f"{r.seconds:.4f}", str(r.ranked)]
            + [str(r.counts[q]) for q in qs]
        ))
    return "\n".join(lines) + "\n"
