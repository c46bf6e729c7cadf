"""End-to-end driver: gather, estimate, generate, update KB, rank, explain, export."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, fields, replace
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Any, Mapping

from . import adapter, kb as kbase
from .engine import GeneratorConfig, NoCandidatesError, generate
from .estimation import (
    DEFAULT_K_KWH_PER_GB,
    Enrichment,
    NoDataError,
    enrich,
    estimate_profiles,
    gather_carbon,
)
from .explain import SavingsRange, render_report, savings_ranges
from .ingest import IngestError, load_carbon_samples, load_energy_samples, load_traffic_samples
from .model import (
    Constraint,
    ModelError,
    load_application,
    load_infrastructure,
    read_document,
    validate_application,
    validate_infrastructure,
)
from .ranker import RankerConfig, rank

log = logging.getLogger(__name__)

OUTPUT_FORMATS = ("prolog", "structured", "both")
REPORT_FORMATS = ("text", "md")


class ValidationFailed(Exception):
    """Inputs are malformed; nothing was written."""

    exit_code = 1

    def __init__(self, messages: list[str]):
        self.messages = messages
        super().__init__("; ".join(messages))


class PipelineError(Exception):
    exit_code = 2


@dataclass(frozen=True)
class PipelineConfig:
    alpha: float = 0.8
    k_kwh_per_gb: float = DEFAULT_K_KWH_PER_GB
    carbon_window_hours: float = 24.0
    min_impact_f: float = 100.0
    lambda_low: float = 0.75
    drop_weight: float = 0.1
    decay_delta: float = kbase.DEFAULT_DECAY_DELTA
    mu_drop: float = kbase.DEFAULT_MU_DROP
    output_format: str = "both"
    report_format: str = "md"

    def __post_init__(self) -> None:
        GeneratorConfig(self.alpha)
        self.ranker()
        if self.k_kwh_per_gb < 0:
            raise ValueError(f"k_kwh_per_gb must be >= 0, got {self.k_kwh_per_gb}")
        if self.carbon_window_hours <= 0:
            raise ValueError(f"carbon_window_hours must be > 0, got {self.carbon_window_hours}")
        if not 0 < self.decay_delta <= 1:
            raise ValueError(f"decay_delta must lie in (0, 1], got {self.decay_delta}")
        if not 0 < self.mu_drop <= 1:
            raise ValueError(f"mu_drop must lie in (0, 1], got {self.mu_drop}")
        if self.output_format not in OUTPUT_FORMATS:
            raise ValueError(f"output_format must be one of {OUTPUT_FORMATS}")
        if self.report_format not in REPORT_FORMATS:
            raise ValueError(f"report_format must be one of {REPORT_FORMATS}")

    def ranker(self) -> RankerConfig:
        return RankerConfig(self.min_impact_f, self.lambda_low, self.drop_weight)

    @property
    def carbon_window(self) -> timedelta:
        return timedelta(hours=self.carbon_window_hours)

    @classmethod
    def from_mapping(cls, doc: Mapping[str, Any]) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**dict(doc))

    def updated(self, **overrides: Any) -> "PipelineConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})


def load_config(path: str | Path | None) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    doc = read_document(path) or {}
    if not isinstance(doc, Mapping):
        raise ModelError(f"{path}: config must be a mapping")
    return PipelineConfig.from_mapping(doc)


@dataclass(frozen=True)
class RunManifest:
    app: Path
    infra: Path
    energy_metrics: Path | None = None
    traffic_metrics: Path | None = None
    carbon: Path | None = None
    kb_dir: Path | None = None
    out_dir: Path | None = None
    config: PipelineConfig = field(default_factory=PipelineConfig)
    now: datetime | None = None
    seed: int | None = None


@dataclass
class RunResult:
    fresh: list[Constraint]
    ranked: list[Constraint]
    ranges: dict[tuple[str, str, str, str], SavingsRange | None]
    kb: kbase.KnowledgeBase
    enrichment: Enrichment
    prolog: str
    structured: list[dict[str, Any]]
    report: str
    files: list[Path] = field(default_factory=list)


def _existing(path: Path | None, what: str, problems: list[str]) -> None:
    if path is not None and not Path(path).is_file():
        problems.append(f"{what} file not found: {path}")


def run_generate(manifest: RunManifest) -> RunResult:
    """Run one full iteration.

    Validation problems raise :class:`ValidationFailed` before the KB is
    touched; estimation or generation problems raise :class:`PipelineError`,
    also before the KB is touched.
    """
    cfg = manifest.config
    now = manifest.now or datetime.now(timezone.utc)
    problems: list[str] = []
    _existing(manifest.app, "application", problems)
    _existing(manifest.infra, "infrastructure", problems)
    _existing(manifest.energy_metrics, "energy metrics", problems)
    _existing(manifest.traffic_metrics, "traffic metrics", problems)
    _existing(manifest.carbon, "carbon", problems)
    if problems:
        raise ValidationFailed(problems)

    try:
        app = load_application(manifest.app)
        infra = load_infrastructure(manifest.infra)
    except ModelError as exc:
        raise ValidationFailed([str(exc)]) from exc
    problems = validate_application(app) + validate_infrastructure(infra)
    if problems:
        raise ValidationFailed(problems)

    known_flavours = {(s.component_id, f.id) for s in app.services for f in s.flavours}
    try:
        energy = load_energy_samples(manifest.energy_metrics, known_flavours) if manifest.energy_metrics else {}
        traffic = load_traffic_samples(manifest.traffic_metrics, known_flavours) if manifest.traffic_metrics else {}
        carbon = load_carbon_samples(manifest.carbon, {n.id for n in infra.nodes}) if manifest.carbon else {}
    except IngestError as exc:
        raise ValidationFailed([str(exc)]) from exc

    # Energy Mix Gatherer -> Energy Estimator -> Constraint Generator
    try:
        carbon_profiles = gather_carbon(infra, carbon, cfg.carbon_window)
        profiles, link_profiles = estimate_profiles(energy, traffic, cfg.k_kwh_per_gb)
        enrichment = enrich(app, infra, profiles, link_profiles, carbon_profiles)
        for w in enrichment.warnings:
            log.warning(w)
        fresh = generate(enrichment.app, enrichment.infra, GeneratorConfig(cfg.alpha), now=now)
    except (NoDataError, NoCandidatesError) as exc:
        raise PipelineError(str(exc)) from exc

    # KB Enricher: the only KB mutation of the run
    kb = kbase.load(manifest.kb_dir) if manifest.kb_dir else kbase.KnowledgeBase()
    kb = kbase.merge_observations(
        kb, enrichment.flavour_profiles, enrichment.link_profiles, enrichment.carbon_profiles, now
    )
    kb = kbase.upsert_constraints(kb, fresh, now, cfg.decay_delta, cfg.mu_drop)
    kb = replace(kb, config=asdict(cfg))
    if manifest.kb_dir:
        kbase.persist(kb, manifest.kb_dir)

    # Ranker -> Explainability Generator -> Adapter
    ranked = rank(kbase.valid_constraints(kb, cfg.mu_drop), cfg.ranker())
    ranges = savings_ranges(ranked, enrichment.app, enrichment.infra)
    result = RunResult(
        fresh=fresh,
        ranked=ranked,
        ranges=ranges,
        kb=kb,
        enrichment=enrichment,
        prolog=adapter.to_prolog(ranked),
        structured=adapter.to_structured(ranked, ranges),
        report=render_report(ranked, ranges, cfg.report_format),
    )
    if manifest.out_dir:
        result.files = write_outputs(result, Path(manifest.out_dir), cfg)
    return result


def write_outputs(result: RunResult, out_dir: Path, cfg: PipelineConfig) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if cfg.output_format in ("prolog", "both"):
        written.append(out_dir / "constraints.pl")
        written[-1].write_text(result.prolog)
    if cfg.output_format in ("structured", "both"):
        written.append(out_dir / "constraints.json")
        written[-1].write_text(adapter.dumps_structured(result.structured))
    name = "report.md" if cfg.report_format == "md" else "report.txt"
    written.append(out_dir / name)
    written[-1].write_text(result.report)
    return written
