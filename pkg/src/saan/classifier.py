"""Inference-time classification over stored class representatives.

Three classifiers share one angular core (cosine similarity to per-class
representative vectors): plain nearest-class-mean over raw means, a
two-stage variant that normalizes before averaging only where samples are
abundant, and a joint classifier that multiplies the angular logit by a
compressed two-sided tail probability of the embedding's log-norm under a
per-class (base) or pooled (incremental) normal model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyClassError,
    InvalidSigmaError,
    UnknownClassError,
)
from .geometry import EPS_NORM, ZeroNormError, log_norm, mean_of_normalized, normalize


@dataclass(frozen=True)
class Representative:
    vector: np.ndarray
    session: int
    count: int


@dataclass
class RepresentativeSet:
    """One anchor vector per seen class, tagged with its learning session."""

    reps: dict[int, Representative] = field(default_factory=dict)

    def labels(self) -> list[int]:
        return sorted(self.reps)

    def matrix(self) -> tuple[list[int], np.ndarray]:
        """Labels in ascending order and the matching stack of unit rows."""
        labels = self.labels()
        if not labels:
            raise EmptyClassError("no representatives fitted")
        rows = np.stack([normalize(self.reps[y].vector) for y in labels])
        return labels, rows

    def adding(self, samples_per_class: dict[int, np.ndarray], session: int,
               normalize_samples: bool) -> "RepresentativeSet":
        """New set extended with per-class means of the given samples."""
        reps = dict(self.reps)
        for label in sorted(samples_per_class):
            samples = np.asarray(samples_per_class[label], dtype=np.float64)
            if samples.size == 0:
                raise EmptyClassError(f"class {label} has no samples")
            if normalize_samples:
                w = mean_of_normalized(samples)
            else:
                w = samples.mean(axis=0)
            reps[int(label)] = Representative(w, session, samples.shape[0])
        return RepresentativeSet(reps)


def ncm_fit(samples_per_class: dict[int, np.ndarray],
            session_per_class: dict[int, int] | None = None) -> RepresentativeSet:
    """Per-class mean of raw embeddings (the baseline representative rule)."""
    rs = RepresentativeSet()
    by_session: dict[int, dict[int, np.ndarray]] = {}
    for label, samples in samples_per_class.items():
        session = 0 if session_per_class is None else session_per_class[label]
        by_session.setdefault(session, {})[label] = samples
    for session in sorted(by_session):
        rs = rs.adding(by_session[session], session, normalize_samples=False)
    return rs


def two_stage_fit(samples_per_class: dict[int, np.ndarray],
                  session_per_class: dict[int, int]) -> RepresentativeSet:
    """Stage-dependent means: normalized in the base session, raw afterwards.

    Normalizing where samples are abundant stops large-norm samples from
    dominating the mean; keeping raw means where samples are scarce
    preserves what little information the few shots carry.
    """
    rs = RepresentativeSet()
    by_session: dict[int, dict[int, np.ndarray]] = {}
    for label, samples in samples_per_class.items():
        by_session.setdefault(session_per_class[label], {})[label] = samples
    for session in sorted(by_session):
        rs = rs.adding(by_session[session], session, normalize_samples=(session == 0))
    return rs


def angular_logits(embeddings, reps: RepresentativeSet) -> tuple[list[int], np.ndarray]:
    """Cosine similarity of each embedding to each representative."""
    labels, rows = reps.matrix()
    e = np.atleast_2d(np.asarray(embeddings, dtype=np.float64))
    norms = np.linalg.norm(e, axis=1)
    if np.any(norms <= EPS_NORM):
        raise ZeroNormError("query embedding norm at or below the floor")
    return labels, (e / norms[:, None]) @ rows.T


def ncm_predict(e, reps: RepresentativeSet) -> int:
    """Label of the representative with maximal cosine; ties to lowest label."""
    labels, z = angular_logits(e, reps)
    return labels[int(np.argmax(z[0]))]


def normal_tail(x: float, mu: float, sigma: float) -> float:
    """Upper-tail probability P(X >= x) for X ~ N(mu, sigma^2)."""
    if sigma <= 0:
        raise InvalidSigmaError(f"sigma must be > 0, got {sigma}")
    return 0.5 * math.erfc((x - mu) / (sigma * math.sqrt(2.0)))


_ERFC_UFUNC = np.frompyfunc(math.erfc, 1, 1)


def _tail_symmetric(x: np.ndarray, mu: float, sigma: float) -> np.ndarray:
    """Two-sided tail probability of x under N(mu, sigma^2); in (0, 0.5]."""
    z = np.abs(np.asarray(x, dtype=np.float64) - mu) / (sigma * math.sqrt(2.0))
    return 0.5 * _ERFC_UFUNC(z).astype(np.float64)


@dataclass
class NormModel:
    """Normal parameters over embedding (log-)norms at two granularities.

    Base-session classes each get their own parameters; every incremental
    class shares one pooled pair. Variances are floored so a near-constant
    class cannot degenerate to a zero-width distribution.
    """

    base_params: dict[int, tuple[float, float]]  # label -> (mu, sigma^2)
    shared_params: tuple[float, float] | None
    incremental_labels: frozenset[int]
    variance_floor: float = 1e-4
    transform: str = "log"  # "log" models ln|e|, "raw" models |e|

    def params_for(self, label: int) -> tuple[float, float]:
        if label in self.base_params:
            return self.base_params[label]
        if label in self.incremental_labels and self.shared_params is not None:
            return self.shared_params
        raise UnknownClassError(f"label {label} not covered by the norm model")

    def value_of(self, e) -> float:
        return log_norm(e) if self.transform == "log" else float(np.linalg.norm(e))


def _mean_var(values: np.ndarray, floor: float) -> tuple[float, float]:
    mu = float(values.mean())
    if values.size >= 2:
        var = float(values.var(ddof=1))
    else:
        var = floor
    return mu, max(var, floor)


def fit_norm_model(base_samples_per_class: dict[int, np.ndarray],
                   incremental_samples, incremental_labels,
                   variance_floor: float = 1e-4,
                   transform: str = "log") -> NormModel:
    """Estimate per-class base parameters and one pooled incremental pair.

    ``incremental_samples`` is the pooled collection of all incremental
    embeddings seen so far; ``incremental_labels`` lists the classes that
    resolve to the pooled parameters.
    """
    def values(samples) -> np.ndarray:
        arr = np.atleast_2d(np.asarray(samples, dtype=np.float64))
        if transform == "log":
            return np.array([log_norm(row) for row in arr])
        return np.linalg.norm(arr, axis=1)

    base_params: dict[int, tuple[float, float]] = {}
    for label, samples in base_samples_per_class.items():
        arr = np.atleast_2d(np.asarray(samples, dtype=np.float64))
        if arr.size == 0:
            raise EmptyClassError(f"class {label} has no samples")
        base_params[int(label)] = _mean_var(values(arr), variance_floor)

    shared = None
    pooled = list(incremental_samples)
    if pooled:
        shared = _mean_var(values(np.stack(pooled)), variance_floor)
    return NormModel(base_params, shared, frozenset(int(v) for v in incremental_labels),
                     variance_floor, transform)


def norm_logit(e, label: int, model: NormModel) -> float:
    """Two-sided tail probability of the embedding's (log-)norm; in (0, 0.5]."""
    mu, var = model.params_for(label)
    x = model.value_of(e)
    return float(_tail_symmetric(np.array([x]), mu, math.sqrt(var))[0])


@dataclass(frozen=True)
class JointLogits:
    labels: list[int]
    angle: np.ndarray  # cosine logit per class, in [-1, 1]
    norm: np.ndarray  # tail probability per class, in (0, 0.5]
    joint: np.ndarray  # angle * norm**compression
    compression: float


def joint_logits(embeddings, reps: RepresentativeSet, model: NormModel,
                 compression: float) -> tuple[list[int], np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized joint logits for a batch; classes in ascending label order."""
    labels, z_angle = angular_logits(embeddings, reps)
    e = np.atleast_2d(np.asarray(embeddings, dtype=np.float64))
    if model.transform == "log":
        x = np.log(np.linalg.norm(e, axis=1))
    else:
        x = np.linalg.norm(e, axis=1)
    z_norm = np.empty_like(z_angle)
    for j, label in enumerate(labels):
        mu, var = model.params_for(label)
        z_norm[:, j] = _tail_symmetric(x, mu, math.sqrt(var))
    z_joint = z_angle * z_norm**compression
    return labels, z_angle, z_norm, z_joint


def joint_predict(e, reps: RepresentativeSet, model: NormModel,
                  compression: float) -> tuple[int, JointLogits]:
    """Predict by the compressed angle-norm product; ties to lowest label.

    With compression 0 the norm factor is exactly 1 and the prediction
    coincides with the pure angular argmax.
    """
    labels, z_angle, z_norm, z_joint = joint_logits(e, reps, model, compression)
    pick = int(np.argmax(z_joint[0]))
    return labels[pick], JointLogits(labels, z_angle[0], z_norm[0], z_joint[0], compression)
