"""Run manifests: one JSON document that fully determines a run.

The manifest hash covers every run-defining field (configs, method, seed,
tool version) but not artifact paths, so the same logical run written to
two directories produces byte-identical result files. Every output file
embeds this hash and loaders reject files whose hash disagrees.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .center_loss import CenterUpdateSchedule, LossWeights
from .errors import InvalidConfigError
from .experiment import MethodFlags, ModelSpec, method_from_name
from .model import TrainConfig
from .synthetic import GeneratorConfig, ScenarioConfig

TOOL_VERSION = "0.1.0"

ARTIFACTS = {
    "manifest": "manifest.json",
    "results": "results.jsonl",
    "table": "accuracy.tsv",
    "checkpoint": "checkpoint.json",
    "ablation": "ablation.jsonl",
    "ablation_table": "ablation.tsv",
}


@dataclass(frozen=True)
class RunManifest:
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    model: ModelSpec = field(default_factory=ModelSpec)
    train: TrainConfig = field(default_factory=TrainConfig)
    method: str = "saan"
    seed: int = 0
    dataset_path: str | None = None  # load this dataset file instead of generating
    artifacts: dict = field(default_factory=lambda: dict(ARTIFACTS))
    tool_version: str = TOOL_VERSION

    def effective_scenario(self) -> ScenarioConfig:
        return replace(self.scenario, seed=self.seed)

    def effective_train(self) -> TrainConfig:
        return replace(self.train, seed=self.seed)

    def flags(self) -> MethodFlags:
        return method_from_name(self.method)

    def core_dict(self) -> dict:
        """The run-defining fields (everything the hash covers)."""
        return {
            "scenario": asdict(self.effective_scenario()),
            "generator": asdict(self.generator),
            "model": asdict(self.model),
            "train": asdict(self.effective_train()),
            "method": self.method,
            "seed": self.seed,
            "dataset_path": self.dataset_path,
            "tool_version": self.tool_version,
        }

    def hash(self) -> str:
        canonical = json.dumps(self.core_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def to_dict(self) -> dict:
        d = self.core_dict()
        d["artifacts"] = dict(self.artifacts)
        d["manifest_hash"] = self.hash()
        return d


def _build_section(cls, data: dict, section: str):
    if not isinstance(data, dict):
        raise InvalidConfigError(section, "must be a mapping")
    known = {f.name for f in fields(cls)}
    for key in data:
        if key not in known:
            raise InvalidConfigError(f"{section}.{key}", "unknown field")
    try:
        return cls(**data)
    except TypeError as exc:
        raise InvalidConfigError(section, str(exc)) from None


def _train_from_dict(data: dict) -> TrainConfig:
    data = dict(data)
    weights = data.pop("weights", {})
    schedule = data.pop("schedule", {})
    cfg = _build_section(TrainConfig, data, "train")
    return replace(
        cfg,
        weights=_build_section(LossWeights, weights, "train.weights"),
        schedule=_build_section(CenterUpdateSchedule, schedule, "train.schedule"),
    )


def manifest_from_dict(data: dict) -> RunManifest:
    if not isinstance(data, dict):
        raise InvalidConfigError("manifest", "top level must be a mapping")
    known = {"scenario", "generator", "model", "train", "method", "seed",
             "dataset_path", "artifacts", "tool_version", "manifest_hash"}
    for key in data:
        if key not in known:
            raise InvalidConfigError(key, "unknown field")
    method = data.get("method", "saan")
    if not isinstance(method, str):
        raise InvalidConfigError("method", "must be a string")
    method_from_name(method)  # validates the name
    seed = data.get("seed", 0)
    if not isinstance(seed, int):
        raise InvalidConfigError("seed", "must be an integer")
    return RunManifest(
        scenario=_build_section(ScenarioConfig, data.get("scenario", {}), "scenario"),
        generator=_build_section(GeneratorConfig, data.get("generator", {}), "generator"),
        model=_build_section(ModelSpec, data.get("model", {}), "model"),
        train=_train_from_dict(data.get("train", {})),
        method=method,
        seed=seed,
        dataset_path=data.get("dataset_path"),
        artifacts={**ARTIFACTS, **data.get("artifacts", {})},
        tool_version=data.get("tool_version", TOOL_VERSION),
    )


def load_manifest(path: str | Path) -> RunManifest:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise InvalidConfigError("manifest", f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise InvalidConfigError("manifest", f"invalid JSON: {exc}") from None
    return manifest_from_dict(data)


def write_manifest(manifest: RunManifest, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(manifest.to_dict(), sort_keys=True, indent=1) + "\n", encoding="utf-8"
    )


def gen_config_from_dict(data: dict) -> tuple[ScenarioConfig, GeneratorConfig, int]:
    """Parse a dataset-generation config: scenario + generator (+ seed)."""
    if not isinstance(data, dict):
        raise InvalidConfigError("config", "top level must be a mapping")
    for key in data:
        if key not in {"scenario", "generator", "seed"}:
            raise InvalidConfigError(key, "unknown field")
    if "scenario" not in data:
        raise InvalidConfigError("scenario", "missing required section")
    if "generator" not in data:
        raise InvalidConfigError("generator", "missing required section")
    seed = data.get("seed", 0)
    if not isinstance(seed, int):
        raise InvalidConfigError("seed", "must be an integer")
    scenario = _build_section(ScenarioConfig, data["scenario"], "scenario")
    generator = _build_section(GeneratorConfig, data["generator"], "generator")
    return replace(scenario, seed=seed), generator, seed
