"""Cosine center loss, its analytic embedding gradients, and the momentum
center-update rule with a per-epoch decaying rate.

The loss has two angular terms: a pull term drawing each embedding toward
its assigned center, and a push term driving it away from every other
assigned center. Both act on directions only, so they are invariant under
positive rescaling of any embedding. The hand-derived gradients are always
perpendicular to the embedding they act on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .centers import CenterBank
from .errors import InvalidConfigError, UnassignedLabelError
from .geometry import EPS_NORM, ZeroNormError, normalize


@dataclass(frozen=True)
class LossWeights:
    """Weights of the pull and push terms of the cosine center loss."""

    pull: float = 2.0
    push: float = 0.4

    def __post_init__(self):
        if self.pull < 0:
            raise InvalidConfigError("pull", "weight must be >= 0")
        if self.push < 0:
            raise InvalidConfigError("push", "weight must be >= 0")


@dataclass
class CenterUpdateSchedule:
    """Center moving rate with geometric per-epoch decay.

    ``current_rate`` equals ``initial_rate * decay_factor**k`` after k
    epoch boundaries since the last reset; reset() restores the initial
    rate at the start of each incremental session.
    """

    initial_rate: float = 0.5
    decay_factor: float = 0.1
    current_rate: float | None = None

    def __post_init__(self):
        if self.initial_rate <= 0:
            raise InvalidConfigError("initial_rate", "must be > 0")
        if not 0 < self.decay_factor <= 1:
            raise InvalidConfigError("decay_factor", "must be in (0, 1]")
        if self.current_rate is None:
            self.current_rate = self.initial_rate

    def decay(self) -> None:
        """Apply one epoch boundary's geometric decay."""
        self.current_rate *= self.decay_factor

    def reset(self) -> None:
        self.current_rate = self.initial_rate


def _as_batch(embeddings, labels, bank: CenterBank):
    """Validate a labeled batch and gather per-sample geometry."""
    e = np.asarray(embeddings, dtype=np.float64)
    if e.ndim == 1:
        e = e[None, :]
    y = np.asarray(labels, dtype=np.int64).ravel()
    if e.shape[0] != y.shape[0]:
        raise InvalidConfigError("labels", "one label per embedding required")
    norms = np.linalg.norm(e, axis=1)
    if np.any(norms <= EPS_NORM):
        raise ZeroNormError("batch contains a vector with norm at or below the floor")
    own_centers = bank.assigned_center_matrix(y)
    return e, y, norms, own_centers


def pull_loss(embeddings, labels, bank: CenterBank) -> float:
    """Mean of 1 - cos(embedding, assigned center) over the batch; in [0, 2]."""
    e, _, norms, cy = _as_batch(embeddings, labels, bank)
    cos_own = np.sum(e * cy, axis=1) / norms
    return float(np.mean(1.0 - cos_own))


def push_loss(embeddings, labels, bank: CenterBank) -> float:
    """Mean cosine to the other assigned centers, normalized by class count.

    Averages cos(embedding, center_j) over every assigned class j other
    than the sample's own, scaled by 1/(batch size * assigned classes).
    """
    e, y, norms, cy = _as_batch(embeddings, labels, bank)
    assigned = bank.assigned_labels()
    c_all = bank.assigned_center_matrix(assigned)
    cos_all = (e / norms[:, None]) @ c_all.T
    cos_own = np.sum(e * cy, axis=1) / norms
    other_sum = cos_all.sum(axis=1) - cos_own
    return float(other_sum.sum() / (e.shape[0] * len(assigned)))


def pull_loss_descent(e, center, batch_size: int) -> np.ndarray:
    """Direction that reduces the pull loss for one sample (negative gradient).

    Equals (1/m) * (c/|e| - e cos(e,c)/|e|^2); perpendicular to e.
    """
    e = np.asarray(e, dtype=np.float64)
    c = np.asarray(center, dtype=np.float64)
    n = float(np.linalg.norm(e))
    if n <= EPS_NORM:
        raise ZeroNormError("embedding norm at or below the floor")
    cos = float(np.dot(e, c)) / n  # center is unit norm
    return (c / n - e * cos / (n * n)) / batch_size


def push_loss_grad(e, bank: CenterBank, label: int, batch_size: int) -> np.ndarray:
    """Gradient of the push loss for one sample; perpendicular to e."""
    e = np.asarray(e, dtype=np.float64)
    n = float(np.linalg.norm(e))
    if n <= EPS_NORM:
        raise ZeroNormError("embedding norm at or below the floor")
    assigned = bank.assigned_labels()
    if label not in bank.assignment:
        raise UnassignedLabelError(f"label {label} has no assigned center")
    grad = np.zeros_like(e)
    for other in assigned:
        if other == label:
            continue
        c = bank.centers[bank.assignment[other]]
        cos = float(np.dot(e, c)) / n
        grad += c / n - e * cos / (n * n)
    return grad / (batch_size * len(assigned))


def weighted_embedding_gradient(
    embeddings, labels, bank: CenterBank, weights: LossWeights
) -> np.ndarray:
    """d(pull_weight*pull + push_weight*push)/d(embedding), one row per sample.

    Vectorized over the batch; this is the quantity backpropagation chains
    through the feature extractor.
    """
    e, y, norms, cy = _as_batch(embeddings, labels, bank)
    m = e.shape[0]
    inv_n = 1.0 / norms[:, None]
    cos_own = np.sum(e * cy, axis=1) / norms
    # gradient of the pull term (negative of its descent direction)
    grad = -weights.pull / m * (cy * inv_n - e * (cos_own / norms**2)[:, None])
    if weights.push != 0.0:
        assigned = bank.assigned_labels()
        c_all = bank.assigned_center_matrix(assigned)
        cos_all = (e * inv_n) @ c_all.T
        other_c = c_all.sum(axis=0)[None, :] - cy
        other_cos = cos_all.sum(axis=1) - cos_own
        grad += (
            weights.push
            / (m * len(assigned))
            * (other_c * inv_n - e * (other_cos / norms**2)[:, None])
        )
    return grad


def center_momentum_update(
    center, class_embeddings, batch_size: int, schedule: CenterUpdateSchedule
) -> np.ndarray:
    """Move a unit center toward its class's normalized batch mean.

    Returns normalize(center + rate * delta) with delta the sum of the
    normalized same-class embeddings divided by the full batch size, so a
    class that is rare in the batch moves its center proportionally less.
    An empty class list skips the update.
    """
    c = np.asarray(center, dtype=np.float64)
    rows = np.atleast_2d(np.asarray(class_embeddings, dtype=np.float64))
    if rows.shape[0] == 0:
        return c.copy()
    norms = np.linalg.norm(rows, axis=1)
    if np.any(norms <= EPS_NORM):
        raise ZeroNormError("class batch contains a vector with norm at or below the floor")
    delta = (rows / norms[:, None]).sum(axis=0) / batch_size
    return normalize(c + schedule.current_rate * delta)
