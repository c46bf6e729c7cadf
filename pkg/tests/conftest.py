from __future__ import annotations

import sys
from datetime import datetime, timezone
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from greenconstraints import kernels
from greenconstraints.model import (
    ApplicationDescription,
    CommunicationLink,
    Flavour,
    InfrastructureDescription,
    Node,
    Placement,
    Service,
)

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "default", max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

T0 = datetime(2025, 6, 1, tzinfo=timezone.utc)


@pytest.fixture(params=[k.name for k in kernels.available()])
def backend(request):
    return kernels.get(request.param)


def make_app(energies, links=(), private=()):
    """energies: {service: {flavour: kWh}}; links: [(src, flavour, dst, kWh)]."""
    services = []
    for sid, fl in energies.items():
        flavours = tuple(Flavour(fid, {"cpu": 100 * (len(fl) - i)}, {}, e) for i, (fid, e) in enumerate(fl.items()))
        placement = Placement.PRIVATE if sid in private else Placement.PUBLIC
        services.append(Service(sid, flavours, tuple(fl), placement=placement))
    app_links = tuple(CommunicationLink(s, f, d, {}, e) for s, f, d, e in links)
    return ApplicationDescription("test", tuple(services), app_links)


def make_infra(cis, private=()):
    return InfrastructureDescription(tuple(
        Node(n, {"subnet": "Private" if n in private else "Public"}, 1.0, ci) for n, ci in cis.items()
    ))
