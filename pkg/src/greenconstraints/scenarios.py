"""Built-in Online Boutique scenarios and their golden constraint weights.

The fixture files under ``fixtures/<name>/`` are produced by
:func:`write_fixture` from the tables below (``scripts/build_fixtures.py``).
Monitoring series are 24 hourly samples whose values oscillate around the
target mean in cancelling pairs, so each series averages to its target.

Measured energies for ``frontend/large`` (1981.6 kWh) and
``productcatalog/large`` (884.5 kWh) in s1, s2, s3 and s5 are the values that
reproduce the golden weights and the reference savings ranges; s4 uses
989 kWh for ``productcatalog/large``. Communication volumes in s1 and s5 are
calibrated to the golden affinity weights.
"""

from __future__ import annotations

import json
import tempfile
import time
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from importlib import resources
from pathlib import Path
from typing import Any

import yaml

from .ingest import (
    CarbonSample,
    EnergySample,
    TrafficSample,
    write_carbon_samples,
    write_energy_samples,
    write_traffic_samples,
)
from .pipeline import PipelineConfig, RunManifest, RunResult, run_generate

SCENARIOS = ("s1", "s2", "s3", "s4", "s5")
TOLERANCE = 0.005

START = datetime(2025, 6, 1, tzinfo=timezone.utc)
HOURS = 24
REQUEST_SIZE_GB = 0.02
K_KWH_PER_GB = 0.002

# service -> (description, [(flavour, cpu millicores, ram MiB)])
SERVICES: dict[str, tuple[str, list[tuple[str, int, int]]]] = {
    "frontend": ("Web front end serving the shop pages", [("large", 1000, 1024), ("medium", 800, 768), ("tiny", 600, 512)]),
    "checkout": ("Order checkout orchestration", [("large", 500, 512), ("tiny", 400, 256)]),
    "recommendation": ("Product recommendations", [("large", 500, 512), ("tiny", 400, 256)]),
    "productcatalog": ("Product catalogue and search", [("large", 500, 512), ("tiny", 400, 256)]),
    "ad": ("Contextual ads", [("tiny", 200, 128)]),
    "cart": ("Shopping cart", [("tiny", 300, 256)]),
    "shipping": ("Shipping quotes", [("tiny", 100, 64)]),
    "currency": ("Currency conversion", [("tiny", 300, 128)]),
    "payment": ("Payment processing", [("tiny", 100, 64)]),
    "email": ("Order confirmation email", [("tiny", 100, 64)]),
}

BASE_ENERGY = {
    ("frontend", "large"): 1981.6,
    ("frontend", "medium"): 1585.0,
    ("frontend", "tiny"): 1189.0,
    ("checkout", "large"): 134.0,
    ("checkout", "tiny"): 107.0,
    ("recommendation", "large"): 539.0,
    ("recommendation", "tiny"): 431.0,
    ("productcatalog", "large"): 884.5,
    ("productcatalog", "tiny"): 791.0,
    ("ad", "tiny"): 251.0,
    ("cart", "tiny"): 546.0,
    ("shipping", "tiny"): 98.0,
    ("currency", "tiny"): 881.0,
    ("payment", "tiny"): 34.0,
    ("email", "tiny"): 50.0,
}

# s4: optimised frontend release, only its large flavour has been monitored
S4_ENERGY = {k: v for k, v in BASE_ENERGY.items() if k[0] != "frontend"}
S4_ENERGY[("frontend", "large")] = 481.0
S4_ENERGY[("productcatalog", "large")] = 989.0

EU_NODES = {"france": 16.0, "spain": 88.0, "germany": 132.0, "greatbritain": 213.0, "italy": 335.0}
US_NODES = {
    "washington": 244.0, "california": 235.0, "texas": 231.0,
    "florida": 570.0, "newyork": 236.0, "arizona": 229.0,
}

# (source, flavour, destination) -> mean kWh per hour
BASE_TRAFFIC = {
    ("frontend", "large", "productcatalog"): 42.336,
    ("frontend", "large", "recommendation"): 8.467,
    ("frontend", "large", "cart"): 12.701,
    ("frontend", "large", "currency"): 29.635,
    ("frontend", "large", "ad"): 2.1,
    ("frontend", "large", "checkout"): 3.4,
    ("checkout", "large", "payment"): 0.8,
    ("checkout", "large", "email"): 0.6,
    ("checkout", "large", "shipping"): 1.1,
    ("checkout", "large", "currency"): 1.3,
    ("checkout", "large", "cart"): 1.7,
    ("recommendation", "large", "productcatalog"): 4.2,
}
S5_TRAFFIC = dict(BASE_TRAFFIC)
S5_TRAFFIC[("frontend", "large", "productcatalog")] = 2421.6
S5_TRAFFIC[("frontend", "large", "currency")] = 1613.02


@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    title: str
    energy: dict[tuple[str, str], float]
    nodes: dict[str, float]
    traffic: dict[tuple[str, str, str], float]
    carbon_override: dict[str, float] = field(default_factory=dict)
    golden: list[dict[str, Any]] = field(default_factory=list)
    exact: bool = False


def _g(kind: str, service: str, flavour: str, target: str, weight: float) -> dict[str, Any]:
    return {"kind": kind, "service": service, "flavour": flavour, "target": target, "weight": weight}


_S1_GOLDEN = [
    _g("avoidNode", "frontend", "large", "greatbritain", 0.636),
    _g("avoidNode", "frontend", "large", "italy", 1.0),
    _g("avoidNode", "productcatalog", "large", "italy", 0.446),
]

SPECS = {
    "s1": ScenarioSpec("s1", "Baseline: Online Boutique on the European nodes", BASE_ENERGY, EU_NODES, BASE_TRAFFIC, golden=_S1_GOLDEN),
    "s2": ScenarioSpec(
        "s2", "Same application on the US nodes", BASE_ENERGY, US_NODES, BASE_TRAFFIC,
        golden=[
            _g("avoidNode", "frontend", "large", "washington", 0.428),
            _g("avoidNode", "frontend", "large", "california", 0.412),
            _g("avoidNode", "frontend", "large", "florida", 1.0),
            _g("avoidNode", "frontend", "large", "newyork", 0.414),
            _g("avoidNode", "productcatalog", "large", "florida", 0.446),
        ],
    ),
    "s3": ScenarioSpec(
        "s3", "France node degrades to 376 gCO2eq/kWh", BASE_ENERGY, EU_NODES, BASE_TRAFFIC,
        carbon_override={"france": 376.0},
        golden=[
            _g("avoidNode", "frontend", "large", "france", 1.0),
            _g("avoidNode", "frontend", "large", "greatbritain", 0.566),
            _g("avoidNode", "frontend", "large", "italy", 0.891),
            _g("avoidNode", "productcatalog", "large", "france", 0.446),
        ],
    ),
    "s4": ScenarioSpec(
        "s4", "Optimised frontend release at 481 kWh", S4_ENERGY, EU_NODES, BASE_TRAFFIC,
        golden=[
            _g("avoidNode", "productcatalog", "large", "italy", 1.0),
            _g("avoidNode", "currency", "tiny", "italy", 0.89),
        ],
        exact=True,
    ),
    "s5": ScenarioSpec(
        "s5", "Heavy data exchange between frontend and its peers", BASE_ENERGY, EU_NODES, S5_TRAFFIC,
        golden=[
            _g("affinity", "frontend", "large", "productcatalog", 0.572),
            _g("affinity", "frontend", "large", "currency", 0.381),
        ] + _S1_GOLDEN,
    ),
}


# -- fixture writing ---------------------------------------------------------------


def _oscillate(mean: float, rel: float, decimals: int) -> list[float]:
    """``HOURS`` values around ``mean``; hour h and h+12 deviate by +d and -d."""
    half = HOURS // 2
    out = [0.0] * HOURS
    for h in range(half):
        d = round(mean * rel * ((h % 6) - 2.5) / 2.5, decimals)
        out[h] = round(mean + d, decimals + 3)
        out[h + half] = round(mean - d, decimals + 3)
    return out


def _application_doc(spec: ScenarioSpec) -> dict[str, Any]:
    services = []
    for sid, (desc, flavours) in SERVICES.items():
        services.append({
            "componentID": sid,
            "description": desc,
            "mustDeploy": sid not in ("ad", "recommendation"),
            "flavours": {
                fid: {"resources": {"cpu": cpu, "ram": ram, "storage": 512}, "qos": {"availability": 0.99}}
                for fid, cpu, ram in flavours
            },
            "flavoursOrder": [fid for fid, _, _ in flavours],
            "placement": "Public",
            "security": ["ssl"] if sid in ("frontend", "payment", "checkout") else [],
        })
    links = [
        {"source": s, "sourceFlavour": f, "destination": d, "qos": {"latency": 100, "availability": 0.99}}
        for (s, f, d) in spec.traffic
    ]
    return {"name": "online-boutique", "services": services, "links": links}


def _infrastructure_doc(spec: ScenarioSpec) -> dict[str, Any]:
    nodes = []
    for nid in spec.nodes:
        profile: dict[str, Any] = {"cost": 1.0}
        if nid in spec.carbon_override:
            profile["carbon"] = spec.carbon_override[nid]
        nodes.append({
            "id": nid,
            "capabilities": {
                "cpu": 16000, "ram": 65536, "storage": 512000,
                "bandwidthIn": 1000, "bandwidthOut": 1000, "availability": 0.999,
                "security": ["firewall", "ssl", "encryption"], "subnet": "Public",
            },
            "profile": profile,
        })
    return {"nodes": nodes}


def write_fixture(spec: ScenarioSpec, dest: str | Path) -> Path:
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    times = [START + timedelta(hours=h) for h in range(HOURS)]
    (dest / "app.yaml").write_text(yaml.safe_dump(_application_doc(spec), sort_keys=False))
    (dest / "infra.yaml").write_text(yaml.safe_dump(_infrastructure_doc(spec), sort_keys=False))
    write_energy_samples(dest / "energy.csv", [
        EnergySample(s, f, t, e)
        for (s, f), mean in spec.energy.items()
        for t, e in zip(times, _oscillate(mean, 0.02, 1))
    ])
    per_request = REQUEST_SIZE_GB * K_KWH_PER_GB
    write_traffic_samples(dest / "traffic.csv", [
        TrafficSample(s, f, d, t, v, REQUEST_SIZE_GB)
        for (s, f, d), mean in spec.traffic.items()
        for t, v in zip(times, _oscillate(mean / per_request, 0.05, 0))
    ])
    write_carbon_samples(dest / "carbon.csv", [
        CarbonSample(n, t, ci)
        for n, mean in spec.nodes.items()
        for t, ci in zip(times, _oscillate(mean, 0.1, 1))
    ])
    golden = {"name": spec.name, "title": spec.title, "exact": spec.exact, "tolerance": TOLERANCE, "constraints": spec.golden}
    (dest / "golden.json").write_text(json.dumps(golden, indent=2) + "\n")
    return dest


# -- replay ----------------------------------------------------------------------


def fixture_dir(name: str) -> Path:
    if name not in SCENARIOS:
        raise ValueError(f"unknown scenario {name!r}; choose from {', '.join(SCENARIOS)}")
    return Path(str(resources.files("greenconstraints") / "fixtures" / name))


def manifest_for(name: str, kb_dir: Path | None = None, out_dir: Path | None = None,
                 config: PipelineConfig | None = None) -> RunManifest:
    d = fixture_dir(name)
    return RunManifest(
        app=d / "app.yaml",
        infra=d / "infra.yaml",
        energy_metrics=d / "energy.csv",
        traffic_metrics=d / "traffic.csv",
        carbon=d / "carbon.csv",
        kb_dir=kb_dir,
        out_dir=out_dir,
        config=config or PipelineConfig(k_kwh_per_gb=K_KWH_PER_GB),
        now=START + timedelta(hours=HOURS),
    )


@dataclass
class Check:
    description: str
    passed: bool
    detail: str = ""


@dataclass
class ScenarioOutcome:
    name: str
    checks: list[Check]
    elapsed: float
    result: RunResult

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def compare_with_golden(ranked: list[dict[str, Any]], golden: dict[str, Any]) -> list[Check]:
    """Golden entries must appear within tolerance; exact goldens allow nothing else."""
    tol = golden.get("tolerance", TOLERANCE)
    got = {(e["kind"], e["service"], e["flavour"], e["target"]): e["weight"] for e in ranked}
    checks = []
    for g in golden["constraints"]:
        key = (g["kind"], g["service"], g["flavour"], g["target"])
        w = got.get(key)
        label = f"{g['kind']}({g['service']}/{g['flavour']} -> {g['target']}) = {g['weight']}"
        if w is None:
            checks.append(Check(label, False, "missing from output"))
        else:
            checks.append(Check(label, abs(w - g["weight"]) <= tol, f"got {w}"))
    if golden.get("exact"):
        expected = {(g["kind"], g["service"], g["flavour"], g["target"]) for g in golden["constraints"]}
        extra = sorted(set(got) - expected)
        checks.append(Check(
            f"output is exactly the {len(expected)} golden constraints",
            not extra,
            f"{len(extra)} extra: " + ", ".join(f"{k[0]}({k[1]}/{k[2]} -> {k[3]})={got[k]}" for k in extra) if extra else "",
        ))
    return checks


def run_scenario(name: str, kb_dir: Path | None = None, out_dir: Path | None = None,
                 config: PipelineConfig | None = None) -> ScenarioOutcome:
    """Replay a scenario on a fresh KB (unless one is given) and diff against its golden file."""
    golden = json.loads((fixture_dir(name) / "golden.json").read_text())
    with tempfile.TemporaryDirectory(prefix=f"kb-{name}-") as tmp:
        t0 = time.perf_counter()
        result = run_generate(manifest_for(name, kb_dir or Path(tmp), out_dir, config))
        elapsed = time.perf_counter() - t0
    return ScenarioOutcome(name, compare_with_golden(result.structured, golden), elapsed, result)
