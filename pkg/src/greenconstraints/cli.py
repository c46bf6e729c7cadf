"""Command-line interface: ``greenconstraints generate|scenario|kb|bench``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import kb as kbase
from . import kernels as _kernels
from .bench import QUANTILES, format_table, run_bench
from .model import ModelError
from .pipeline import (
    OUTPUT_FORMATS,
    REPORT_FORMATS,
    PipelineConfig,
    PipelineError,
    RunManifest,
    ValidationFailed,
    load_config,
    run_generate,
)
from .scenarios import SCENARIOS, run_scenario

EXIT_OK, EXIT_VALIDATION, EXIT_PIPELINE = 0, 1, 2

DEFAULT_BENCH_SIZES = "100x10,1000x5,10x1000,100x100"


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="YAML/JSON file with config keys")
    p.add_argument("--alpha", type=float, help="quantile level for the impact threshold (default 0.8)")
    p.add_argument("--k-kwh-per-gb", type=float, help="transmission energy intensity (default 0.002)")
    p.add_argument("--carbon-window-hours", type=float, help="carbon averaging window (default 24)")
    p.add_argument("--min-impact-f", type=float, help="impact below which weights are attenuated (default 100)")
    p.add_argument("--lambda-low", type=float, help="attenuation factor (default 0.75)")
    p.add_argument("--decay-delta", type=float, help="memory decay per missed iteration (default 0.8)")
    p.add_argument("--mu-drop", type=float, help="memory weight below which constraints are forgotten (default 0.4)")
    p.add_argument("--drop-weight", type=float, help="weight below which constraints are discarded (default 0.1)")
    p.add_argument("--output-format", choices=OUTPUT_FORMATS)
    p.add_argument("--report-format", choices=REPORT_FORMATS)


def _config(args: argparse.Namespace, base: PipelineConfig | None = None) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else (base or PipelineConfig())
    return cfg.updated(
        alpha=args.alpha,
        k_kwh_per_gb=args.k_kwh_per_gb,
        carbon_window_hours=args.carbon_window_hours,
        min_impact_f=args.min_impact_f,
        lambda_low=args.lambda_low,
        decay_delta=args.decay_delta,
        mu_drop=args.mu_drop,
        drop_weight=args.drop_weight,
        output_format=args.output_format,
        report_format=args.report_format,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="greenconstraints", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="run one constraint-generation iteration")
    g.add_argument("--app", type=Path, required=True)
    g.add_argument("--infra", type=Path, required=True)
    g.add_argument("--energy-metrics", type=Path)
    g.add_argument("--traffic-metrics", type=Path)
    g.add_argument("--carbon", type=Path)
    g.add_argument("--kb-dir", type=Path, default=Path("kb"))
    g.add_argument("--out-dir", type=Path, default=Path("out"))
    g.add_argument("--seed", type=int, help="accepted for manifest symmetry; generation is deterministic")
    _add_config_flags(g)

    s = sub.add_parser("scenario", help="replay a built-in scenario and diff against its golden weights")
    s.add_argument("name", choices=SCENARIOS + ("all",))
    s.add_argument("--kb-dir", type=Path, help="KB to use (default: a fresh temporary one)")
    s.add_argument("--out-dir", type=Path)
    _add_config_flags(s)

    k = sub.add_parser("kb", help="inspect or clear a knowledge base")
    k.add_argument("action", choices=("show", "reset"))
    k.add_argument("--kb-dir", type=Path, default=Path("kb"))

    b = sub.add_parser("bench", help="synthetic scalability and quantile sweep")
    b.add_argument("--sizes", default=DEFAULT_BENCH_SIZES, help="comma-separated SERVICESxNODES list")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--backend", choices=[k.name for k in _kernels.available()], help="kernel backend")
    return parser


def _cmd_generate(args: argparse.Namespace) -> int:
    manifest = RunManifest(
        app=args.app, infra=args.infra,
        energy_metrics=args.energy_metrics, traffic_metrics=args.traffic_metrics, carbon=args.carbon,
        kb_dir=args.kb_dir, out_dir=args.out_dir, config=_config(args), seed=args.seed,
    )
    result = run_generate(manifest)
    print(result.prolog, end="")
    for path in result.files:
        print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def _cmd_scenario(args: argparse.Namespace) -> int:
    from .scenarios import K_KWH_PER_GB

    names = SCENARIOS if args.name == "all" else (args.name,)
    ok = True
    for name in names:
        out = args.out_dir / name if args.out_dir and len(names) > 1 else args.out_dir
        outcome = run_scenario(name, args.kb_dir, out, _config(args, PipelineConfig(k_kwh_per_gb=K_KWH_PER_GB)))
        status = "PASS" if outcome.passed else "FAIL"
        print(f"{name}: {status} ({outcome.elapsed:.3f}s, {len(outcome.result.ranked)} constraints)")
        for c in outcome.checks:
            print(f"  [{'ok' if c.passed else 'FAIL'}] {c.description}" + (f" ({c.detail})" if c.detail else ""))
        ok = ok and outcome.passed
    return EXIT_OK if ok else EXIT_PIPELINE


def _cmd_kb(args: argparse.Namespace) -> int:
    if args.action == "reset":
        kbase.reset(args.kb_dir)
        print(f"cleared {args.kb_dir}")
        return EXIT_OK
    kb = kbase.load(args.kb_dir)
    print(f"iteration: {kb.iteration}")
    print(f"services: {len(kb.sk)}  interactions: {len(kb.ik)}  nodes: {len(kb.nk)}  constraints: {len(kb.ck)}")
    for (kind, s, f, t), rec in sorted(kb.ck.items(), key=lambda e: (-e[1].mu, -e[1].em)):
        print(f"  {kind}({s}/{f} -> {t})  em={rec.em:.1f}  mu={rec.mu:.3f}  t={rec.t.isoformat()}")
    return EXIT_OK


def _parse_sizes(text: str) -> list[tuple[int, int]]:
    sizes = []
    for part in text.split(","):
        s, _, n = part.strip().partition("x")
        sizes.append((int(s), int(n)))
    return sizes


def _cmd_bench(args: argparse.Namespace) -> int:
    rows = run_bench(_parse_sizes(args.sizes), args.seed, QUANTILES, _kernels.get(args.backend))
    print(f"# backend: {rows[0].backend if rows else _kernels.default().name}, seed: {args.seed}")
    print(format_table(rows), end="")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handlers = {"generate": _cmd_generate, "scenario": _cmd_scenario, "kb": _cmd_kb, "bench": _cmd_bench}
    try:
        return handlers[args.command](args)
    except ValidationFailed as exc:
        for m in exc.messages:
            print(f"validation error: {m}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ModelError, ValueError) as exc:
        if isinstance(exc, kbase.KnowledgeBaseError):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_PIPELINE
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
