"""Small trainable feature extractor with hand-coded backpropagation.

Two affine layers with a tanh nonlinearity between them produce the
embedding; a bias-free linear head on top produces class logits. The
smooth nonlinearity keeps finite-difference gradient checks clean. The
training protocol is feature-freezing: the full stack trains in the base
session, then layer 1 freezes and only layer 2 plus the head fine-tune in
each incremental session.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .center_loss import (
    CenterUpdateSchedule,
    LossWeights,
    pull_loss,
    push_loss,
    weighted_embedding_gradient,
)
from .centers import CenterBank, assign_base_session, assign_incremental_session
from .errors import DimensionMismatchError, TooManyClassesError
from .geometry import EPS_NORM, ZeroNormError, mean_of_normalized


@dataclass
class TwoLayerExtractor:
    """tanh MLP: input -> hidden -> embedding, with per-layer freeze flags."""

    w1: np.ndarray  # (input_dim, hidden_dim)
    b1: np.ndarray  # (hidden_dim,)
    w2: np.ndarray  # (hidden_dim, embedding_dim)
    b2: np.ndarray  # (embedding_dim,)
    layer1_trainable: bool = True
    layer2_trainable: bool = True

    @property
    def input_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def embedding_dim(self) -> int:
        return self.w2.shape[1]

    def hidden(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.input_dim:
            raise DimensionMismatchError(
                f"input dimension {x.shape[-1]} != {self.input_dim}"
            )
        return np.tanh(x @ self.w1 + self.b1)

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Embed one vector or a batch of row vectors."""
        return self.hidden(x) @ self.w2 + self.b2

    def copy(self) -> "TwoLayerExtractor":
        return TwoLayerExtractor(
            self.w1.copy(), self.b1.copy(), self.w2.copy(), self.b2.copy(),
            self.layer1_trainable, self.layer2_trainable,
        )


@dataclass
class LinearHead:
    """Bias-free logit layer whose columns grow as class count grows."""

    weight: np.ndarray  # (embedding_dim, n_classes)
    trainable: bool = True

    @property
    def n_classes(self) -> int:
        return self.weight.shape[1]

    def logits(self, embeddings: np.ndarray) -> np.ndarray:
        return np.asarray(embeddings, dtype=np.float64) @ self.weight

    def expanded(self, n_new: int) -> "LinearHead":
        """New head with zero-initialized columns appended for new classes."""
        extra = np.zeros((self.weight.shape[0], n_new))
        return LinearHead(np.hstack([self.weight, extra]), self.trainable)

    def copy(self) -> "LinearHead":
        return LinearHead(self.weight.copy(), self.trainable)


def init_extractor(input_dim: int, hidden_dim: int, embedding_dim: int, seed) -> TwoLayerExtractor:
    """Seeded init: weights ~ N(0, 1/fan_in), biases zero."""
    rng = np.random.default_rng(seed)
    w1 = rng.standard_normal((input_dim, hidden_dim)) / np.sqrt(input_dim)
    w2 = rng.standard_normal((hidden_dim, embedding_dim)) / np.sqrt(hidden_dim)
    return TwoLayerExtractor(w1, np.zeros(hidden_dim), w2, np.zeros(embedding_dim))


def init_head(embedding_dim: int, n_classes: int) -> LinearHead:
    return LinearHead(np.zeros((embedding_dim, n_classes)))


@dataclass
class TrainConfig:
    learning_rate: float = 0.05
    epochs: int = 100
    batch_size: int = 32
    warmup_epochs: int = 10
    incremental_epochs: int | None = None  # None reuses `epochs`
    weights: LossWeights = field(default_factory=LossWeights)
    schedule: CenterUpdateSchedule = field(default_factory=CenterUpdateSchedule)
    seed: int = 0

    def __post_init__(self):
        from .errors import InvalidConfigError

        if self.learning_rate <= 0:
            raise InvalidConfigError("learning_rate", "must be > 0")
        if self.epochs < 1:
            raise InvalidConfigError("epochs", "must be >= 1")
        if self.incremental_epochs is not None and self.incremental_epochs < 1:
            raise InvalidConfigError("incremental_epochs", "must be >= 1")
        if self.batch_size < 1:
            raise InvalidConfigError("batch_size", "must be >= 1")
        if not 0 <= self.warmup_epochs < self.epochs:
            raise InvalidConfigError("warmup_epochs", "must satisfy 0 <= warmup < epochs")


def cross_entropy(logits, label) -> float:
    """Softmax negative log-likelihood, stabilized with log-sum-exp.

    Accepts a single logit vector with an int label, or a batch of logit
    rows with a label array (mean over the batch).
    """
    z = np.asarray(logits, dtype=np.float64)
    if z.ndim == 1:
        z = z[None, :]
        labels = np.asarray([label], dtype=np.int64)
    else:
        labels = np.asarray(label, dtype=np.int64)
    zmax = z.max(axis=1, keepdims=True)
    lse = zmax[:, 0] + np.log(np.exp(z - zmax).sum(axis=1))
    return float(np.mean(lse - z[np.arange(z.shape[0]), labels]))


def _softmax(z: np.ndarray) -> np.ndarray:
    zmax = z.max(axis=1, keepdims=True)
    ez = np.exp(z - zmax)
    return ez / ez.sum(axis=1, keepdims=True)


def total_loss(x, y, extractor: TwoLayerExtractor, head: LinearHead,
               bank: CenterBank | None, weights: LossWeights) -> float:
    """Cross-entropy plus the weighted cosine center loss terms."""
    e = extractor.forward(np.atleast_2d(np.asarray(x, dtype=np.float64)))
    y = np.asarray(y, dtype=np.int64).ravel()
    loss = cross_entropy(head.logits(e), y)
    if bank is not None and weights.pull != 0.0:
        loss += weights.pull * pull_loss(e, y, bank)
    if bank is not None and weights.push != 0.0:
        loss += weights.push * push_loss(e, y, bank)
    return loss


def _gradients(x, y, h, e, extractor: TwoLayerExtractor, head: LinearHead,
               bank: CenterBank | None, weights: LossWeights) -> dict[str, np.ndarray]:
    """Chain-rule gradients given the cached forward activations."""
    m = x.shape[0]
    probs = _softmax(head.logits(e))
    probs[np.arange(m), y] -= 1.0
    dlogits = probs / m
    de = dlogits @ head.weight.T
    if bank is not None and (weights.pull != 0.0 or weights.push != 0.0):
        de = de + weighted_embedding_gradient(e, y, bank, weights)

    grads: dict[str, np.ndarray] = {}
    if head.trainable:
        grads["head"] = e.T @ dlogits
    if extractor.layer2_trainable:
        grads["w2"] = h.T @ de
        grads["b2"] = de.sum(axis=0)
    if extractor.layer1_trainable:
        dpre = (de @ extractor.w2.T) * (1.0 - h * h)
        grads["w1"] = x.T @ dpre
        grads["b1"] = dpre.sum(axis=0)
    return grads


def backprop_step(x, y, extractor: TwoLayerExtractor, head: LinearHead,
                  bank: CenterBank | None, weights: LossWeights) -> dict[str, np.ndarray]:
    """Gradients of the total loss for every trainable parameter.

    Frozen layers are simply absent from the returned mapping.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    y = np.asarray(y, dtype=np.int64).ravel()
    h = extractor.hidden(x)
    e = h @ extractor.w2 + extractor.b2
    return _gradients(x, y, h, e, extractor, head, bank, weights)


def _apply(extractor: TwoLayerExtractor, head: LinearHead,
           grads: dict[str, np.ndarray], lr: float) -> None:
    if "w1" in grads:
        extractor.w1 -= lr * grads["w1"]
        extractor.b1 -= lr * grads["b1"]
    if "w2" in grads:
        extractor.w2 -= lr * grads["w2"]
        extractor.b2 -= lr * grads["b2"]
    if "head" in grads:
        head.weight -= lr * grads["head"]


def class_direction_means(extractor: TwoLayerExtractor, x, y) -> dict[int, np.ndarray]:
    """Per-class mean of normalized embeddings over the given samples."""
    e = extractor.forward(np.asarray(x, dtype=np.float64))
    y = np.asarray(y, dtype=np.int64).ravel()
    return {int(label): mean_of_normalized(e[y == label]) for label in np.unique(y)}


def _update_batch_centers(bank: CenterBank, e: np.ndarray, y: np.ndarray,
                          schedule: CenterUpdateSchedule) -> CenterBank:
    """Vectorized momentum update of every center present in the batch.

    Matches center_momentum_update applied per class: delta sums the
    normalized same-class embeddings over the full batch size.
    """
    m = e.shape[0]
    ehat = e / np.linalg.norm(e, axis=1)[:, None]
    labels, inverse = np.unique(y, return_inverse=True)
    sums = np.zeros((labels.size, e.shape[1]))
    np.add.at(sums, inverse, ehat)
    idx = [bank.assignment[int(label)] for label in labels]
    centers = bank.centers.copy()
    moved = centers[idx] + schedule.current_rate * sums / m
    norms = np.linalg.norm(moved, axis=1)
    if np.any(norms <= EPS_NORM):
        raise ZeroNormError("center update degenerated to a near-zero vector")
    centers[idx] = moved / norms[:, None]
    return bank.with_centers(centers)


def _run_epochs(extractor: TwoLayerExtractor, head: LinearHead, x, y,
                bank: CenterBank | None, config: TrainConfig, rng,
                epochs: int, weights: LossWeights,
                schedule: CenterUpdateSchedule | None,
                assign_at: int = -1, assign_fn=None):
    """Shared SGD loop; optionally assigns centers at one epoch boundary."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64).ravel()
    n = x.shape[0]
    centers_active = False
    for epoch in range(epochs):
        if epoch == assign_at:
            bank = assign_fn(bank, class_direction_means(extractor, x, y))
            centers_active = True
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            bx, by = x[idx], y[idx]
            h = extractor.hidden(bx)
            e = h @ extractor.w2 + extractor.b2
            step_bank = bank if centers_active else None
            grads = _gradients(bx, by, h, e, extractor, head, step_bank, weights)
            _apply(extractor, head, grads, config.learning_rate)
            if centers_active:
                bank = _update_batch_centers(bank, e, by, schedule)
        if centers_active:
            schedule.decay()
    return extractor, head, bank


def train_base_session(extractor: TwoLayerExtractor, head: LinearHead, x, y,
                       bank: CenterBank | None, config: TrainConfig):
    """Base-session training: CE warm-up, center allocation, then joint loss.

    With both loss weights at zero the center machinery never engages and
    this is a plain cross-entropy trainer (the frozen-feature baseline).
    Returns updated (extractor, head, bank).
    """
    extractor = extractor.copy()
    head = head.copy()
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, 0]))
    use_centers = bank is not None and (config.weights.pull > 0 or config.weights.push > 0)
    schedule = None
    if use_centers:
        schedule = replace(config.schedule, current_rate=None)
    return _run_epochs(
        extractor, head, x, y, bank, config, rng,
        epochs=config.epochs, weights=config.weights, schedule=schedule,
        assign_at=config.warmup_epochs if use_centers else -1,
        assign_fn=assign_base_session,
    )


def finetune_incremental(extractor: TwoLayerExtractor, head: LinearHead, x, y,
                         bank: CenterBank | None, config: TrainConfig,
                         session_index: int):
    """Incremental-session fine-tuning: layer 1 frozen, push term disabled.

    Expands the head for the session's new classes, allocates free centers
    to them, resets the center moving rate, then trains with cross-entropy
    plus the pull term only. Returns updated (extractor, head, bank).
    """
    extractor = extractor.copy()
    extractor.layer1_trainable = False
    y = np.asarray(y, dtype=np.int64).ravel()
    new_labels = sorted(int(v) for v in np.unique(y))
    n_new = sum(1 for v in new_labels if v >= head.n_classes)
    if n_new != len(new_labels):
        raise TooManyClassesError("incremental session labels overlap existing classes")
    head = head.expanded(n_new)

    rng = np.random.default_rng(np.random.SeedSequence([config.seed, session_index]))
    use_centers = bank is not None and config.weights.pull > 0
    weights = LossWeights(pull=config.weights.pull, push=0.0)
    schedule = None
    if use_centers:
        if len(new_labels) > len(bank.free_indices):
            raise TooManyClassesError(
                f"{len(new_labels)} new classes but only {len(bank.free_indices)} free centers"
            )
        schedule = replace(config.schedule, current_rate=None)  # rate reset per session
    epochs = config.incremental_epochs if config.incremental_epochs is not None else config.epochs
    return _run_epochs(
        extractor, head, x, y, bank, config, rng,
        epochs=epochs, weights=weights, schedule=schedule,
        assign_at=0 if use_centers else -1,
        assign_fn=assign_incremental_session,
    )
