"""End-to-end session protocol: train, fit classifiers, evaluate, score.

A run trains the base session, iterates the incremental sessions, fits
the configured classifier after each one, evaluates on the cumulative
test set, and aggregates the per-session accuracies into a metrics
report. Method flags gate each component independently so ablation rows
share one code path.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .centers import CenterBank, generate_orthonormal_centers
from .classifier import (
    NormModel,
    RepresentativeSet,
    angular_logits,
    fit_norm_model,
    joint_logits,
)
from .errors import InvalidConfigError, LengthMismatchError
from .model import (
    LinearHead,
    TrainConfig,
    TwoLayerExtractor,
    finetune_incremental,
    init_extractor,
    init_head,
    train_base_session,
)
from .synthetic import FscilDataset, GeneratorConfig, ScenarioConfig, generate_synthetic


@dataclass(frozen=True)
class ModelSpec:
    hidden_dim: int = 32
    embedding_dim: int = 32

    def __post_init__(self):
        if self.hidden_dim < 1 or self.embedding_dim < 2:
            raise InvalidConfigError("embedding_dim", "model dimensions too small")


@dataclass(frozen=True)
class MethodFlags:
    """Independent toggles for the four method components."""

    name: str
    pull: bool = False
    push: bool = False
    two_stage: bool = False
    norm_distribution: bool = False
    compression: float = 0.005
    variance_floor: float = 1e-4
    norm_transform: str = "log"


BASELINE = MethodFlags("baseline")
SAAN_FULL = MethodFlags("saan", pull=True, push=True, two_stage=True, norm_distribution=True)

# ablation grid rows, weakest to strongest
ABLATION_GRID: list[MethodFlags] = [
    BASELINE,
    MethodFlags("pull", pull=True),
    MethodFlags("pull+push", pull=True, push=True),
    MethodFlags("pull+push+2stage", pull=True, push=True, two_stage=True),
    MethodFlags("pull+push+normdist", pull=True, push=True, norm_distribution=True),
    replace(SAAN_FULL, name="full"),
]


def method_from_name(name: str) -> MethodFlags:
    for flags in (BASELINE, SAAN_FULL, *ABLATION_GRID):
        if flags.name == name:
            return flags
    raise InvalidConfigError("method", f"unknown method {name!r}")


def standard_benchmark(seed: int = 0) -> tuple[ScenarioConfig, GeneratorConfig, ModelSpec, TrainConfig]:
    """The desk-scale benchmark configuration used by the paired-seed suite.

    12 base classes plus four 4-way 5-shot sessions over a 32-dimensional
    embedding space; a long cross-entropy warm-up before center allocation
    and short incremental fine-tuning keep the protocol stable at this
    scale.
    """
    scenario = ScenarioConfig(seed=seed)
    generator = GeneratorConfig()
    model_spec = ModelSpec()
    train = TrainConfig(seed=seed, warmup_epochs=40, incremental_epochs=5)
    return scenario, generator, model_spec, train


@dataclass(frozen=True)
class SessionRecord:
    session: int
    cumulative_classes: int
    n_test: int
    accuracy: float
    base_accuracy: float
    novel_accuracy: float


@dataclass(frozen=True)
class MetricsReport:
    per_session_accuracy: list[float]
    drop: float
    base_accuracy: float
    novel_accuracy: float
    harmonic_mean: float
    average_accuracy: float


@dataclass
class FinalState:
    extractor: TwoLayerExtractor
    head: LinearHead
    bank: CenterBank | None
    reps: RepresentativeSet
    norm_model: NormModel | None


@dataclass
class ExperimentResult:
    method: str
    seed: int
    records: list[SessionRecord]
    metrics: MetricsReport
    state: FinalState


def _split_accuracy(preds: np.ndarray, labels: np.ndarray, mask: np.ndarray) -> float:
    if not mask.any():
        return 0.0
    return float(np.mean(preds[mask] == labels[mask]))


def compute_metrics(per_session_preds, per_session_labels, base_labels) -> MetricsReport:
    """Aggregate per-session predictions into the standard report."""
    if len(per_session_preds) != len(per_session_labels):
        raise LengthMismatchError("one prediction array per session required")
    accs: list[float] = []
    for preds, labels in zip(per_session_preds, per_session_labels):
        preds = np.asarray(preds)
        labels = np.asarray(labels)
        if preds.shape != labels.shape:
            raise LengthMismatchError(
                f"{preds.shape[0]} predictions vs {labels.shape[0]} labels"
            )
        accs.append(float(np.mean(preds == labels)))
    last_preds = np.asarray(per_session_preds[-1])
    last_labels = np.asarray(per_session_labels[-1])
    base_mask = np.isin(last_labels, sorted(base_labels))
    base_acc = _split_accuracy(last_preds, last_labels, base_mask)
    novel_acc = _split_accuracy(last_preds, last_labels, ~base_mask)
    hm = 0.0
    if base_acc + novel_acc > 0:
        hm = 2.0 * base_acc * novel_acc / (base_acc + novel_acc)
    return MetricsReport(
        per_session_accuracy=accs,
        drop=accs[0] - accs[-1],
        base_accuracy=base_acc,
        novel_accuracy=novel_acc,
        harmonic_mean=hm,
        average_accuracy=float(np.mean(accs)),
    )


class _ClassifierState:
    """Accumulates per-session fit data and produces predictions."""

    def __init__(self, flags: MethodFlags):
        self.flags = flags
        self.reps = RepresentativeSet()
        self.base_samples: dict[int, np.ndarray] = {}
        self.incremental_samples: list[np.ndarray] = []
        self.incremental_labels: set[int] = set()
        self.norm_model: NormModel | None = None

    def absorb_session(self, session_index: int, extractor: TwoLayerExtractor,
                       x: np.ndarray, y: np.ndarray) -> None:
        e = extractor.forward(x)
        per_class = {int(label): e[y == label] for label in np.unique(y)}
        normalize_samples = self.flags.two_stage and session_index == 0
        self.reps = self.reps.adding(per_class, session_index, normalize_samples)
        if self.flags.norm_distribution:
            if session_index == 0:
                self.base_samples = per_class
            else:
                self.incremental_samples.extend(e)
                self.incremental_labels.update(per_class)
            self.norm_model = fit_norm_model(
                self.base_samples,
                self.incremental_samples,
                self.incremental_labels,
                variance_floor=self.flags.variance_floor,
                transform=self.flags.norm_transform,
            )

    def predict(self, embeddings: np.ndarray) -> np.ndarray:
        if self.flags.norm_distribution:
            labels, _, _, z = joint_logits(
                embeddings, self.reps, self.norm_model, self.flags.compression
            )
        else:
            labels, z = angular_logits(embeddings, self.reps)
        return np.asarray(labels)[np.argmax(z, axis=1)]


def run_experiment(scenario: ScenarioConfig, generator: GeneratorConfig,
                   model_spec: ModelSpec, flags: MethodFlags,
                   train: TrainConfig,
                   dataset: FscilDataset | None = None) -> ExperimentResult:
    """Train through all sessions and evaluate after each one.

    The dataset is regenerated from the scenario seed unless one is
    passed in (e.g. loaded from an exchange file).
    """
    if scenario.total_classes > model_spec.embedding_dim:
        raise InvalidConfigError(
            "total_classes",
            f"{scenario.total_classes} classes need at most embedding_dim="
            f"{model_spec.embedding_dim} centers",
        )
    if dataset is None:
        dataset = generate_synthetic(scenario, generator, scenario.seed)

    uses_centers = flags.pull or flags.push
    bank = None
    if uses_centers:
        bank = generate_orthonormal_centers(model_spec.embedding_dim, train.seed)
    effective = replace(
        train,
        weights=replace(
            train.weights,
            pull=train.weights.pull if flags.pull else 0.0,
            push=train.weights.push if flags.push else 0.0,
        ),
    )

    base = dataset.sessions[0]
    extractor = init_extractor(
        dataset.input_dim, model_spec.hidden_dim, model_spec.embedding_dim,
        np.random.SeedSequence([train.seed, 1000]),
    )
    head = init_head(model_spec.embedding_dim, len(base.labels()))

    cls_state = _ClassifierState(flags)
    preds_by_session: list[np.ndarray] = []
    labels_by_session: list[np.ndarray] = []
    records: list[SessionRecord] = []
    base_label_set = dataset.base_labels()

    extractor, head, bank = train_base_session(
        extractor, head, base.train_x, base.train_y, bank, effective
    )
    for session in dataset.sessions:
        if session.index > 0:
            extractor, head, bank = finetune_incremental(
                extractor, head, session.train_x, session.train_y, bank,
                effective, session.index,
            )
        cls_state.absorb_session(session.index, extractor, session.train_x, session.train_y)
        test_x, test_y = dataset.cumulative_test(session.index)
        preds = cls_state.predict(extractor.forward(test_x))
        preds_by_session.append(preds)
        labels_by_session.append(test_y)
        base_mask = np.isin(test_y, sorted(base_label_set))
        records.append(SessionRecord(
            session=session.index,
            cumulative_classes=len(cls_state.reps.reps),
            n_test=int(test_y.shape[0]),
            accuracy=float(np.mean(preds == test_y)),
            base_accuracy=_split_accuracy(preds, test_y, base_mask),
            novel_accuracy=_split_accuracy(preds, test_y, ~base_mask),
        ))

    metrics = compute_metrics(preds_by_session, labels_by_session, base_label_set)
    state = FinalState(extractor, head, bank, cls_state.reps, cls_state.norm_model)
    return ExperimentResult(flags.name, scenario.seed, records, metrics, state)
