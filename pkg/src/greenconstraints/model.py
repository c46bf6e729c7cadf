"""Domain types for applications, infrastructures and constraints.

Values are frozen dataclasses. Parsing is lenient: documents are turned into
model values without raising on bad field values, and ``validate_application``
/ ``validate_infrastructure`` report what is wrong as a list of messages.
"""

from __future__ import annotations

import json
import math
from functools import cached_property
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Any, Mapping

import yaml

AVOID_NODE = "avoidNode"
AFFINITY = "affinity"

SECURITY_TAGS = frozenset({"firewall", "ssl", "encryption"})


class ModelError(ValueError):
    """Raised when a document cannot be read as a model value at all."""


class Placement(str, Enum):
    PRIVATE = "Private"
    PUBLIC = "Public"


class EnergySource(str, Enum):
    """Where a flavour's or link's energy figure came from."""

    MEASURED = "Measured"
    INFERRED = "Inferred"
    DECLARED = "Declared"


@dataclass(frozen=True)
class Flavour:
    id: str
    resources: dict[str, Any] = field(default_factory=dict)
    qos: dict[str, Any] = field(default_factory=dict)
    energy: float | None = None
    energy_source: EnergySource | None = None
    extra: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class Service:
    component_id: str
    flavours: tuple[Flavour, ...]
    flavours_order: tuple[str, ...] = ()
    description: str = ""
    must_deploy: bool = True
    placement: Placement = Placement.PUBLIC
    security: frozenset[str] = frozenset()
    extra: dict[str, Any] = field(default_factory=dict)

    def flavour(self, flavour_id: str) -> Flavour | None:
        for f in self.flavours:
            if f.id == flavour_id:
                return f
        return None


@dataclass(frozen=True)
class CommunicationLink:
    source: str
    source_flavour: str
    destination: str
    qos: dict[str, Any] = field(default_factory=dict)
    energy: float | None = None
    energy_source: EnergySource | None = None

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.source, self.source_flavour, self.destination)


@dataclass(frozen=True)
class ApplicationDescription:
    name: str
    services: tuple[Service, ...]
    links: tuple[CommunicationLink, ...] = ()

    @cached_property
    def _by_id(self) -> dict[str, Service]:
        # first declaration wins, as with a linear scan; duplicates are a validation error
        out: dict[str, Service] = {}
        for s in self.services:
            if isinstance(s.component_id, str):
                out.setdefault(s.component_id, s)
        return out

    def service(self, service_id: str) -> Service | None:
        return self._by_id.get(service_id)


@dataclass(frozen=True)
class Node:
    id: str
    capabilities: dict[str, Any] = field(default_factory=dict)
    cost: float | None = None
    carbon: float | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def subnet(self) -> Placement:
        value = self.capabilities.get("subnet") if isinstance(self.capabilities, Mapping) else None
        try:
            return Placement(value)
        except ValueError:
            return Placement.PUBLIC


@dataclass(frozen=True)
class InfrastructureDescription:
    nodes: tuple[Node, ...]

    @cached_property
    def _by_id(self) -> dict[str, Node]:
        out: dict[str, Node] = {}
        for n in self.nodes:
            if isinstance(n.id, str):
                out.setdefault(n.id, n)
        return out

    def node(self, node_id: str) -> Node | None:
        return self._by_id.get(node_id)


@dataclass(frozen=True)
class Constraint:
    """A green-aware deployment recommendation.

    ``target`` is a node id for ``avoidNode`` and a peer service id for
    ``affinity``. ``weight`` stays ``None`` until the ranker sets it.
    """

    kind: str
    service: str
    flavour: str
    target: str
    em: float
    weight: float | None = None
    mu: float = 1.0
    generated_at: datetime | None = None

    def __post_init__(self) -> None:
        if not (self.em >= 0):
            raise ValueError(f"constraint {self.identity}: em must be >= 0, got {self.em}")
        if self.weight is not None and not (0.0 <= self.weight <= 1.0):
            raise ValueError(f"constraint {self.identity}: weight {self.weight} outside [0, 1]")
        if not (0.0 < self.mu <= 1.0):
            raise ValueError(f"constraint {self.identity}: mu {self.mu} outside (0, 1]")
        if self.kind == AFFINITY and self.service == self.target:
            raise ValueError(f"affinity constraint pairs {self.service} with itself")

    @property
    def identity(self) -> tuple[str, str, str, str]:
        return (self.kind, self.service, self.flavour, self.target)


# -- validation ---------------------------------------------------------------


def _is_number(value: Any) -> bool:
    return (
        isinstance(value, (int, float))
        and not isinstance(value, bool)
        and math.isfinite(value)
    )


def _is_id(value: Any) -> bool:
    return isinstance(value, str) and value != ""


def _check_resources(where: str, resources: Any, out: list[str]) -> None:
    if not isinstance(resources, Mapping):
        out.append(f"{where}: resources must be a mapping")
        return
    for name, qty in resources.items():
        if not _is_number(qty) or qty < 0:
            out.append(f"{where}: resource {name!r} must be a non-negative number, got {qty!r}")


def _check_availability(where: str, qos: Any, out: list[str]) -> None:
    if not isinstance(qos, Mapping):
        out.append(f"{where}: qos must be a mapping")
        return
    if "availability" in qos:
        a = qos["availability"]
        if not _is_number(a) or not 0 <= a <= 1:
            out.append(f"{where}: availability must lie in [0, 1], got {a!r}")


def _check_energy(where: str, energy: Any, out: list[str]) -> None:
    if energy is not None and (not _is_number(energy) or energy < 0):
        out.append(f"{where}: energy must be a non-negative number, got {energy!r}")


def validate_application(app: ApplicationDescription) -> list[str]:
    """Return a list of invariant violations; empty means the app is well formed."""
    out: list[str] = []
    if not isinstance(app.name, str):
        out.append(f"application: name must be a string, got {app.name!r}")
    services = app.services if isinstance(app.services, tuple) else ()
    flavour_ids: dict[str, set[str]] = {}
    for i, svc in enumerate(services):
        if not isinstance(svc, Service):
            out.append(f"service #{i}: not a service entry")
            continue
        sid = svc.component_id
        where = f"service {sid!r}"
        if not _is_id(sid):
            out.append(f"service #{i}: componentID must be a non-empty string, got {sid!r}")
            continue
        if sid in flavour_ids:
            out.append(f"{where}: duplicate componentID")
            continue
        if not isinstance(svc.must_deploy, bool):
            out.append(f"{where}: mustDeploy must be a boolean, got {svc.must_deploy!r}")
        if not isinstance(svc.placement, Placement):
            out.append(f"{where}: placement must be Private or Public, got {svc.placement!r}")
        if not isinstance(svc.security, frozenset):
            out.append(f"{where}: security must be a list of tags, got {svc.security!r}")
        elif not svc.security <= SECURITY_TAGS:
            unknown = sorted(map(str, svc.security - SECURITY_TAGS))
            out.append(f"{where}: unknown security tags {unknown}")
        ids: list[str] = []
        if not svc.flavours:
            out.append(f"{where}: must declare at least one flavour")
        for f in svc.flavours:
            fwhere = f"{where} flavour {f.id!r}"
            if not _is_id(f.id):
                out.append(f"{where}: flavour id must be a non-empty string, got {f.id!r}")
                continue
            if f.id in ids:
                out.append(f"{fwhere}: duplicate flavour id")
            ids.append(f.id)
            _check_resources(fwhere, f.resources, out)
            _check_availability(fwhere, f.qos, out)
            _check_energy(fwhere, f.energy, out)
        flavour_ids[sid] = set(ids)
        order = svc.flavours_order
        if not isinstance(order, tuple) or sorted(map(str, order)) != sorted(set(ids)) or len(order) != len(set(order)):
            out.append(f"{where}: flavoursOrder {list(order) if isinstance(order, tuple) else order!r} is not a permutation of its flavours {ids}")
    for i, link in enumerate(app.links if isinstance(app.links, tuple) else ()):
        if not isinstance(link, CommunicationLink):
            out.append(f"link #{i}: not a link entry")
            continue
        where = f"link #{i} {link.source!r}({link.source_flavour!r}) -> {link.destination!r}"
        if link.source not in flavour_ids:
            out.append(f"{where}: source is not a declared service")
        elif link.source_flavour not in flavour_ids[link.source]:
            out.append(f"{where}: sourceFlavour is not a flavour of the source service")
        if link.destination not in flavour_ids:
            out.append(f"{where}: destination is not a declared service")
        if link.source == link.destination:
            out.append(f"{where}: source and destination must differ")
        _check_availability(where, link.qos, out)
        _check_energy(where, link.energy, out)
    return out


def validate_infrastructure(infra: InfrastructureDescription) -> list[str]:
    """Return a list of invariant violations; empty means the infrastructure is well formed."""
    out: list[str] = []
    nodes = infra.nodes if isinstance(infra.nodes, tuple) else ()
    if not nodes:
        out.append("infrastructure: must declare at least one node")
    seen: set[str] = set()
    for i, node in enumerate(nodes):
        if not isinstance(node, Node):
            out.append(f"node #{i}: not a node entry")
            continue
        if not _is_id(node.id):
            out.append(f"node #{i}: id must be a non-empty string, got {node.id!r}")
            continue
        where = f"node {node.id!r}"
        if node.id in seen:
            out.append(f"{where}: duplicate node id")
        seen.add(node.id)
        caps = node.capabilities
        if not isinstance(caps, Mapping):
            out.append(f"{where}: capabilities must be a mapping")
            caps = {}
        for key in ("cpu", "ram", "storage", "bandwidthIn", "bandwidthOut"):
            if key in caps and (not _is_number(caps[key]) or caps[key] < 0):
                out.append(f"{where}: capability {key!r} must be a non-negative number, got {caps[key]!r}")
        _check_availability(where, caps, out)
        if "subnet" in caps and caps["subnet"] not in (p.value for p in Placement):
            out.append(f"{where}: subnet must be Private or Public, got {caps['subnet']!r}")
        if node.cost is not None and not _is_number(node.cost):
            out.append(f"{where}: cost must be a number, got {node.cost!r}")
        if node.carbon is not None and (not _is_number(node.carbon) or node.carbon < 0):
            out.append(f"{where}: carbon must be a non-negative number, got {node.carbon!r}")
    return out


# -- documents ----------------------------------------------------------------

_SERVICE_KEYS = {"componentID", "description", "mustDeploy", "flavours", "flavoursOrder", "placement", "security"}
_FLAVOUR_KEYS = {"id", "resources", "qos", "energy", "energySource"}
_NODE_KEYS = {"id", "capabilities", "profile"}


def _mapping(value: Any) -> dict[str, Any]:
    return dict(value) if isinstance(value, Mapping) else {}


def _placement(value: Any) -> Any:
    if value is None:
        return Placement.PUBLIC
    try:
        return Placement(value)
    except ValueError:
        return value


def _energy_source(value: Any) -> EnergySource | None:
    try:
        return EnergySource(value) if value is not None else None
    except ValueError:
        return None


def _flavour_from(fid: Any, doc: Any) -> Flavour:
    doc = _mapping(doc)
    return Flavour(
        id=fid,
        resources=doc.get("resources", {}),
        qos=doc.get("qos", {}),
        energy=doc.get("energy"),
        energy_source=_energy_source(doc.get("energySource")),
        extra={k: v for k, v in doc.items() if k not in _FLAVOUR_KEYS},
    )


def _service_from(doc: Any, default_id: Any = None) -> Service:
    doc = _mapping(doc)
    raw = doc.get("flavours")
    if isinstance(raw, Mapping):
        flavours = tuple(_flavour_from(fid, fdoc) for fid, fdoc in raw.items())
    elif isinstance(raw, list):
        flavours = tuple(_flavour_from(_mapping(f).get("id"), f) for f in raw)
    else:
        flavours = ()
    order = doc.get("flavoursOrder")
    if order is None:
        order = [f.id for f in flavours]
    security = doc.get("security") or []
    return Service(
        component_id=doc.get("componentID", default_id),
        description=doc.get("description", "") if isinstance(doc.get("description", ""), str) else str(doc["description"]),
        must_deploy=doc.get("mustDeploy", True),
        flavours=flavours,
        flavours_order=tuple(order) if isinstance(order, list) else order,
        placement=_placement(doc.get("placement")),
        security=frozenset(str(s) for s in security) if isinstance(security, list) else security,
        extra={k: v for k, v in doc.items() if k not in _SERVICE_KEYS},
    )


def _link_from(doc: Any) -> CommunicationLink:
    doc = _mapping(doc)
    return CommunicationLink(
        source=doc.get("source"),
        source_flavour=doc.get("sourceFlavour"),
        destination=doc.get("destination"),
        qos=doc.get("qos", {}),
        energy=doc.get("energy"),
        energy_source=_energy_source(doc.get("energySource")),
    )


def application_from_dict(doc: Any) -> ApplicationDescription:
    if not isinstance(doc, Mapping):
        raise ModelError("application document must be a mapping")
    raw = doc.get("services", doc.get("components"))
    if isinstance(raw, Mapping):
        services = tuple(_service_from(sdoc, sid) for sid, sdoc in raw.items())
    elif isinstance(raw, list):
        services = tuple(_service_from(sdoc) for sdoc in raw)
    else:
        services = ()
    links = doc.get("links") or []
    return ApplicationDescription(
        name=doc.get("name", ""),
        services=services,
        links=tuple(_link_from(l) for l in links) if isinstance(links, list) else (),
    )


def infrastructure_from_dict(doc: Any) -> InfrastructureDescription:
    if not isinstance(doc, Mapping):
        raise ModelError("infrastructure document must be a mapping")
    raw = doc.get("nodes")
    if isinstance(raw, Mapping):
        entries = [dict(_mapping(v), id=_mapping(v).get("id", k)) for k, v in raw.items()]
    elif isinstance(raw, list):
        entries = [_mapping(v) for v in raw]
    else:
        entries = []
    nodes = []
    for ndoc in entries:
        profile = _mapping(ndoc.get("profile"))
        nodes.append(
            Node(
                id=ndoc.get("id"),
                capabilities=ndoc.get("capabilities", {}),
                cost=profile.get("cost"),
                carbon=profile.get("carbon"),
                extra={k: v for k, v in ndoc.items() if k not in _NODE_KEYS},
            )
        )
    return InfrastructureDescription(nodes=tuple(nodes))


def _flavour_to(f: Flavour) -> dict[str, Any]:
    doc: dict[str, Any] = dict(f.extra)
    doc["resources"] = f.resources
    doc["qos"] = f.qos
    if f.energy is not None:
        doc["energy"] = f.energy
    if f.energy_source is not None:
        doc["energySource"] = f.energy_source.value
    return doc


def application_to_dict(app: ApplicationDescription) -> dict[str, Any]:
    services = []
    for s in app.services:
        doc: dict[str, Any] = dict(s.extra)
        doc.update(
            componentID=s.component_id,
            description=s.description,
            mustDeploy=s.must_deploy,
            flavours={f.id: _flavour_to(f) for f in s.flavours},
            flavoursOrder=list(s.flavours_order),
            placement=s.placement.value if isinstance(s.placement, Placement) else s.placement,
            security=sorted(s.security),
        )
        services.append(doc)
    links = []
    for l in app.links:
        doc = {"source": l.source, "sourceFlavour": l.source_flavour, "destination": l.destination, "qos": l.qos}
        if l.energy is not None:
            doc["energy"] = l.energy
        if l.energy_source is not None:
            doc["energySource"] = l.energy_source.value
        links.append(doc)
    return {"name": app.name, "services": services, "links": links}


def infrastructure_to_dict(infra: InfrastructureDescription) -> dict[str, Any]:
    nodes = []
    for n in infra.nodes:
        profile: dict[str, Any] = {}
        if n.cost is not None:
            profile["cost"] = n.cost
        if n.carbon is not None:
            profile["carbon"] = n.carbon
        doc = dict(n.extra)
        doc.update(id=n.id, capabilities=n.capabilities, profile=profile)
        nodes.append(doc)
    return {"nodes": nodes}


def read_document(path: str | Path) -> Any:
    """Read a YAML or JSON document (JSON is valid YAML, but keep errors precise)."""
    path = Path(path)
    text = path.read_text()
    try:
        if path.suffix.lower() == ".json":
            return json.loads(text)
        return yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ModelError(f"{path}: cannot parse document: {exc}") from exc


def load_application(path: str | Path) -> ApplicationDescription:
    return application_from_dict(read_document(path))


def load_infrastructure(path: str | Path) -> InfrastructureDescription:
    return infrastructure_from_dict(read_document(path))
