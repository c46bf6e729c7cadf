"""Energy profiles, node carbon averages and description enrichment."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta
from enum import Enum
from typing import Mapping, Sequence

from .ingest import CarbonSample, EnergySample, TrafficSample
from .model import (
    ApplicationDescription,
    CommunicationLink,
    EnergySource,
    Flavour,
    InfrastructureDescription,
    Service,
)

DEFAULT_K_KWH_PER_GB = 0.002
DEFAULT_CARBON_WINDOW = timedelta(hours=24)


class NoDataError(ValueError):
    """Raised when a statistic is requested over no samples."""


class CarbonSource(str, Enum):
    MEASURED = "Measured"
    OPERATOR_OVERRIDE = "OperatorOverride"
    INFERRED = "Inferred"


@dataclass(frozen=True)
class EnergyProfile:
    avg: float
    min: float
    max: float
    count: int

    def scaled(self, factor: float) -> "EnergyProfile":
        return EnergyProfile(self.avg * factor, self.min * factor, self.max * factor, self.count)


@dataclass(frozen=True)
class CarbonProfile:
    avg: float
    min: float
    max: float
    window: timedelta
    source: CarbonSource
    count: int = 1


def _stats(values: Sequence[float]) -> tuple[float, float, float, int]:
    if not values:
        raise NoDataError("no samples")
    lo, hi = min(values), max(values)
    # fsum is correctly rounded, so the mean does not depend on sample order
    avg = math.fsum(values) / len(values)
    return min(max(avg, lo), hi), lo, hi, len(values)


def computation_profile(series: Sequence[EnergySample]) -> EnergyProfile:
    """Mean, min and max energy of one (service, flavour) series."""
    if not series:
        raise NoDataError("empty energy series")
    return EnergyProfile(*_stats([s.energy for s in series]))


def traffic_to_energy(sample: TrafficSample, k: float = DEFAULT_K_KWH_PER_GB) -> float:
    """Transmission energy of one traffic sample: volume x size x k."""
    if k < 0:
        raise ValueError(f"k must be >= 0, got {k}")
    return sample.request_volume * sample.request_size * k


def communication_profile(series: Sequence[TrafficSample], k: float = DEFAULT_K_KWH_PER_GB) -> EnergyProfile:
    if not series:
        raise NoDataError("empty traffic series")
    return EnergyProfile(*_stats([traffic_to_energy(s, k) for s in series]))


def average_carbon(
    series: Sequence[CarbonSample],
    window: timedelta = DEFAULT_CARBON_WINDOW,
    override: float | None = None,
    now: datetime | None = None,
) -> CarbonProfile:
    """Carbon intensity statistics over the trailing window.

    The window is the half-open interval ``(end - window, end]`` where ``end``
    is ``now`` or, when not given, the latest sample time. An operator
    override short-circuits the samples entirely.
    """
    if override is not None:
        if override < 0:
            raise ValueError(f"carbon override must be >= 0, got {override}")
        return CarbonProfile(override, override, override, window, CarbonSource.OPERATOR_OVERRIDE)
    if not series:
        raise NoDataError("no carbon samples and no override")
    end = now if now is not None else max(s.t for s in series)
    values = [s.ci for s in series if end - window < s.t <= end]
    if not values:
        raise NoDataError(f"no carbon samples within {window} before {end.isoformat()}")
    avg, lo, hi, n = _stats(values)
    return CarbonProfile(avg, lo, hi, window, CarbonSource.MEASURED, n)


# -- enrichment -----------------------------------------------------------------


@dataclass(frozen=True)
class Enrichment:
    """Enriched descriptions plus the profiles actually used.

    ``flavour_profiles`` includes inferred entries; ``unprofiled`` lists
    services for which no flavour could be given an energy figure.
    """

    app: ApplicationDescription
    infra: InfrastructureDescription
    flavour_profiles: dict[tuple[str, str], EnergyProfile]
    link_profiles: dict[tuple[str, str, str], EnergyProfile]
    carbon_profiles: dict[str, CarbonProfile]
    inferred: frozenset[tuple[str, str]] = frozenset()
    unprofiled: tuple[str, ...] = ()
    warnings: tuple[str, ...] = field(default=())


def _cpu(f: Flavour) -> float | None:
    cpu = f.resources.get("cpu") if isinstance(f.resources, Mapping) else None
    if isinstance(cpu, (int, float)) and not isinstance(cpu, bool) and cpu > 0:
        return float(cpu)
    return None


def infer_flavour_profile(
    service: Service,
    flavour: Flavour,
    observed: Mapping[str, EnergyProfile],
) -> EnergyProfile | None:
    """Scale the nearest observed sibling flavour by the cpu-request ratio.

    "Nearest" is the smallest absolute cpu difference, ties going to the
    sibling listed first in ``flavoursOrder``. Returns ``None`` when no
    sibling with a usable cpu request was observed.
    """
    cpu = _cpu(flavour)
    if cpu is None:
        return None
    order = {fid: i for i, fid in enumerate(service.flavours_order)}
    best: tuple[float, int, Flavour] | None = None
    for sib in service.flavours:
        if sib.id == flavour.id or sib.id not in observed:
            continue
        sib_cpu = _cpu(sib)
        if sib_cpu is None:
            continue
        rank = (abs(sib_cpu - cpu), order.get(sib.id, len(order)))
        if best is None or rank < best[:2]:
            best = (*rank, sib)
    if best is None:
        return None
    sib = best[2]
    return observed[sib.id].scaled(cpu / _cpu(sib))  # type: ignore[operator]


def enrich(
    app: ApplicationDescription,
    infra: InfrastructureDescription,
    profiles: Mapping[tuple[str, str], EnergyProfile],
    link_profiles: Mapping[tuple[str, str, str], EnergyProfile],
    carbon_profiles: Mapping[str, CarbonProfile],
) -> Enrichment:
    """Attach energy figures to flavours and links and carbon to nodes.

    Flavours use, in order of preference: a measured profile, an inference
    from a measured sibling, or an energy value declared in the document.
    Nodes must each have a carbon profile (measured or override).
    """
    flavour_profiles: dict[tuple[str, str], EnergyProfile] = {}
    inferred: set[tuple[str, str]] = set()
    unprofiled: list[str] = []
    warnings: list[str] = []
    services = []
    for svc in app.services:
        observed = {f.id: profiles[(svc.component_id, f.id)] for f in svc.flavours if (svc.component_id, f.id) in profiles}
        flavours = []
        for f in svc.flavours:
            key = (svc.component_id, f.id)
            if f.id in observed:
                prof = observed[f.id]
                flavours.append(replace(f, energy=prof.avg, energy_source=EnergySource.MEASURED))
                flavour_profiles[key] = prof
                continue
            prof = infer_flavour_profile(svc, f, observed)
            if prof is not None:
                flavours.append(replace(f, energy=prof.avg, energy_source=EnergySource.INFERRED))
                flavour_profiles[key] = prof
                inferred.add(key)
                warnings.append(f"{svc.component_id}/{f.id}: energy inferred from a sibling flavour")
                continue
            if f.energy is not None:
                flavours.append(replace(f, energy_source=f.energy_source or EnergySource.DECLARED))
                flavour_profiles[key] = EnergyProfile(f.energy, f.energy, f.energy, 1)
                continue
            flavours.append(replace(f, energy=None, energy_source=None))
        if all(fl.energy is None for fl in flavours):
            unprofiled.append(svc.component_id)
            warnings.append(f"{svc.component_id}: no energy data for any flavour; skipped by the generator")
        services.append(replace(svc, flavours=tuple(flavours)))

    links: list[CommunicationLink] = []
    used_links: dict[tuple[str, str, str], EnergyProfile] = {}
    for link in app.links:
        prof = link_profiles.get(link.key)
        if prof is not None:
            links.append(replace(link, energy=prof.avg, energy_source=EnergySource.MEASURED))
            used_links[link.key] = prof
        elif link.energy is not None:
            links.append(replace(link, energy_source=link.energy_source or EnergySource.DECLARED))
            used_links[link.key] = EnergyProfile(link.energy, link.energy, link.energy, 1)
        else:
            links.append(replace(link, energy=None, energy_source=None))

    nodes = []
    used_carbon: dict[str, CarbonProfile] = {}
    for node in infra.nodes:
        cp = carbon_profiles.get(node.id)
        if cp is None:
            raise NoDataError(f"node {node.id!r} has neither carbon samples nor an operator-supplied carbon value")
        nodes.append(replace(node, carbon=cp.avg))
        used_carbon[node.id] = cp

    return Enrichment(
        app=replace(app, services=tuple(services), links=tuple(links)),
        infra=replace(infra, nodes=tuple(nodes)),
        flavour_profiles=flavour_profiles,
        link_profiles=used_links,
        carbon_profiles=used_carbon,
        inferred=frozenset(inferred),
        unprofiled=tuple(unprofiled),
        warnings=tuple(warnings),
    )


def gather_carbon(
    infra: InfrastructureDescription,
    samples: Mapping[str, Sequence[CarbonSample]],
    window: timedelta = DEFAULT_CARBON_WINDOW,
    now: datetime | None = None,
) -> dict[str, CarbonProfile]:
    """Carbon profile per node; a node's declared carbon acts as the override."""
    out = {}
    for node in infra.nodes:
        series = samples.get(node.id, ())
        if node.carbon is None and not series:
            continue
        try:
            out[node.id] = average_carbon(series, window, node.carbon, now)
        except NoDataError as exc:
            raise NoDataError(f"node {node.id!r}: {exc}") from exc
    return out


def estimate_profiles(
    energy: Mapping[tuple[str, str], Sequence[EnergySample]],
    traffic: Mapping[tuple[str, str, str], Sequence[TrafficSample]],
    k: float = DEFAULT_K_KWH_PER_GB,
) -> tuple[dict[tuple[str, str], EnergyProfile], dict[tuple[str, str, str], EnergyProfile]]:
    flavours = {key: computation_profile(s) for key, s in energy.items() if s}
    links = {key: communication_profile(s, k) for key, s in traffic.items() if s}
    return flavours, links
