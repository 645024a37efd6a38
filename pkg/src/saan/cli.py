"""Command-line front end: dataset generation, runs, ablations, reports.

Exit codes: 0 success, 2 configuration error (the offending field is
named), 3 runtime numeric failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import dataio, report
from .errors import (
    InvalidConfigError,
    ManifestHashMismatchError,
    NonFiniteError,
    SaanError,
    ZeroNormError,
)
from .experiment import ABLATION_GRID, run_experiment, standard_benchmark
from .manifest import (
    TOOL_VERSION,
    RunManifest,
    gen_config_from_dict,
    load_manifest,
    manifest_from_dict,
    write_manifest,
)
from .synthetic import generate_synthetic

ENV_OUT_DIR = "SAAN_OUT_DIR"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _say(quiet: bool, message: str) -> None:
    if not quiet:
        print(message)


def _read_json(path: str, what: str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InvalidConfigError(what, f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise InvalidConfigError(what, f"invalid JSON: {exc}") from None


def _out_dir(args, manifest_hash: str) -> Path:
    if args.out:
        out = Path(args.out)
    else:
        root = Path(os.environ.get(ENV_OUT_DIR, "saan-out"))
        out = root / f"run-{manifest_hash[:12]}"
    out.mkdir(parents=True, exist_ok=True)
    return out


def _effective_manifest(args) -> RunManifest:
    manifest = load_manifest(args.config)
    if args.seed is not None:
        manifest = replace(manifest, seed=args.seed)
    if getattr(args, "method", None):
        manifest = replace(manifest, method=args.method)
        manifest.flags()  # validates the name
    return manifest


def cmd_gen_data(args) -> int:
    scenario, generator, seed = gen_config_from_dict(_read_json(args.config, "config"))
    if args.seed is not None:
        seed = args.seed
        scenario = replace(scenario, seed=seed)
    dataset = generate_synthetic(scenario, generator, seed)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    dataio.write_dataset(dataset, out)
    n = sum(s.train_x.shape[0] + s.test_x.shape[0] for s in dataset.sessions)
    _say(args.quiet, f"wrote {n} samples across {len(dataset.sessions)} sessions to {out}")
    return EXIT_OK


def _run_one(manifest: RunManifest, quiet: bool):
    dataset = None
    if manifest.dataset_path:
        dataset = dataio.read_dataset(manifest.dataset_path)
    result = run_experiment(
        manifest.effective_scenario(), manifest.generator, manifest.model,
        manifest.flags(), manifest.effective_train(), dataset=dataset,
    )
    for rec in result.records:
        _say(quiet, f"  session {rec.session}: {rec.cumulative_classes} classes, "
                    f"accuracy {rec.accuracy:.4f}")
    return result


def cmd_run(args) -> int:
    manifest = _effective_manifest(args)
    h = manifest.hash()
    out = _out_dir(args, h)
    _say(args.quiet, f"run {manifest.method!r} seed {manifest.seed} -> {out}")
    result = _run_one(manifest, args.quiet)

    write_manifest(manifest, out / manifest.artifacts["manifest"])
    dataio.write_results(result, h, TOOL_VERSION, out / manifest.artifacts["results"])
    dataio.write_accuracy_table(result.records, h, out / manifest.artifacts["table"])
    dataio.write_checkpoint(result, h, out / manifest.artifacts["checkpoint"])
    if not args.no_figures:
        parsed = dataio.read_results(out / manifest.artifacts["results"], expected_hash=h)
        for path in report.render_run_figures(parsed, out):
            _say(args.quiet, f"  figure {path}")
    m = result.metrics
    _say(args.quiet, f"last {m.per_session_accuracy[-1]:.4f} drop {m.drop:.4f} "
                     f"harmonic-mean {m.harmonic_mean:.4f}")
    return EXIT_OK


def cmd_ablate(args) -> int:
    manifest = _effective_manifest(args)
    h = manifest.hash()
    out = _out_dir(args, h)
    _say(args.quiet, f"ablation grid ({len(ABLATION_GRID)} rows) seed {manifest.seed} -> {out}")

    def run_row(flags):
        row_manifest = replace(manifest, method=flags.name)
        return run_experiment(
            row_manifest.effective_scenario(), row_manifest.generator,
            row_manifest.model, flags, row_manifest.effective_train(),
        )

    if args.workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            results = list(pool.map(_ablation_worker, [
                (manifest.to_dict(), flags.name) for flags in ABLATION_GRID
            ]))
    else:
        results = [run_row(flags) for flags in ABLATION_GRID]

    baseline_last = results[0].metrics.per_session_accuracy[-1]
    rows = []
    for order, (flags, result) in enumerate(zip(ABLATION_GRID, results)):
        last = result.metrics.per_session_accuracy[-1]
        rows.append({
            "order": order,
            "method": flags.name,
            "pull": flags.pull,
            "push": flags.push,
            "two_stage": flags.two_stage,
            "norm_distribution": flags.norm_distribution,
            "last_accuracy": last,
            "delta_vs_baseline": last - baseline_last,
            "drop": result.metrics.drop,
            "per_session_accuracy": result.metrics.per_session_accuracy,
        })
        _say(args.quiet, f"  {flags.name:20s} last {last:.4f} delta {last - baseline_last:+.4f}")

    write_manifest(manifest, out / manifest.artifacts["manifest"])
    dataio.write_ablation_results(rows, h, TOOL_VERSION,
                                  out / manifest.artifacts["ablation"],
                                  out / manifest.artifacts["ablation_table"])
    if not args.no_figures:
        parsed = dataio.read_ablation_results(out / manifest.artifacts["ablation"], expected_hash=h)
        path = report.render_ablation_figure(parsed, out)
        _say(args.quiet, f"  figure {path}")
    return EXIT_OK


def _ablation_worker(payload):
    manifest_dict, method = payload
    manifest_dict = dict(manifest_dict)
    manifest_dict.pop("manifest_hash", None)
    manifest = manifest_from_dict({**manifest_dict, "method": method})
    return run_experiment(
        manifest.effective_scenario(), manifest.generator, manifest.model,
        manifest.flags(), manifest.effective_train(),
    )


def cmd_report(args) -> int:
    manifest = load_manifest(args.config)
    h = manifest.hash()
    results_dir = Path(args.results)
    out = Path(args.out) if args.out else results_dir
    out.mkdir(parents=True, exist_ok=True)
    rendered = []
    results_path = results_dir / manifest.artifacts["results"]
    if results_path.exists():
        parsed = dataio.read_results(results_path, expected_hash=h)
        rendered += report.render_run_figures(parsed, out)
    ablation_path = results_dir / manifest.artifacts["ablation"]
    if ablation_path.exists():
        parsed = dataio.read_ablation_results(ablation_path, expected_hash=h)
        rendered.append(report.render_ablation_figure(parsed, out))
    if not rendered:
        raise InvalidConfigError("results", f"no result files found under {results_dir}")
    for path in rendered:
        _say(args.quiet, f"figure {path}")
    return EXIT_OK


def write_default_manifest(path: str | Path, seed: int = 0, method: str = "saan") -> RunManifest:
    """Materialize the standard desk-scale benchmark as a manifest file."""
    scenario, generator, model_spec, train = standard_benchmark(seed)
    manifest = RunManifest(scenario=scenario, generator=generator, model=model_spec,
                           train=train, method=method, seed=seed)
    write_manifest(manifest, path)
    return manifest


def cmd_init(args) -> int:
    manifest = write_default_manifest(args.out, seed=args.seed or 0,
                                      method=args.method or "saan")
    _say(args.quiet, f"wrote standard benchmark manifest to {args.out} "
                     f"(hash {manifest.hash()[:12]})")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="saan",
        description="Space-allocation and angle-norm classification benchmark harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, method_flag=True, out_required=False):
        p.add_argument("--config", required=True, help="config / manifest JSON path")
        p.add_argument("--out", required=out_required, help="output path or directory")
        p.add_argument("--seed", type=int, default=None, help="override the manifest seed")
        if method_flag:
            p.add_argument("--method", default=None, help="override the manifest method")
        p.add_argument("--quiet", action="store_true", help="suppress progress output")

    p = sub.add_parser("gen-data", help="generate a synthetic dataset file")
    common(p, method_flag=False, out_required=True)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("run", help="run one experiment from a manifest")
    common(p)
    p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("ablate", help="run the component ablation grid")
    common(p, method_flag=False)
    p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("report", help="render figures from stored results")
    p.add_argument("--config", required=True, help="manifest JSON path")
    p.add_argument("--results", required=True, help="directory holding result files")
    p.add_argument("--out", default=None, help="figure output directory")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("init", help="write the standard benchmark manifest")
    p.add_argument("--out", required=True, help="manifest path to write")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--method", default=None)
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_init)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ZeroNormError, NonFiniteError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ManifestHashMismatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvalidConfigError as exc:
        print(f"config error in field '{exc.field}': {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SaanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
