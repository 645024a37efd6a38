"""Synthetic session-partitioned embedding benchmark generator.

Each class is a random unit direction in input space; samples scatter
around it with Gaussian angular noise and draw their norms from a
log-normal law. Base classes get individual, well-separated norm laws
while every incremental class shares one law with lower mean, planting
the base/incremental norm asymmetry the joint classifier exploits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ClassBudgetExceededError, InvalidConfigError


@dataclass(frozen=True)
class ScenarioConfig:
    """Session protocol: class budget and per-session way/shot structure."""

    total_classes: int = 28
    base_classes: int = 12
    sessions: int = 4  # incremental sessions after the base session
    ways: int = 4
    shots: int = 5
    mode: str = "conventional"  # or "open_ended"
    ways_mean: float = 10.0
    ways_var: float = 5.0
    shots_mean: float = 5.0
    shots_var: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if self.base_classes < 2:
            raise InvalidConfigError("base_classes", "need at least 2 base classes")
        if self.total_classes < self.base_classes:
            raise InvalidConfigError("total_classes", "must be >= base_classes")
        if self.sessions < 0:
            raise InvalidConfigError("sessions", "must be >= 0")
        if self.mode not in ("conventional", "open_ended"):
            raise InvalidConfigError("mode", f"unknown mode {self.mode!r}")
        if self.mode == "conventional":
            if self.ways < 1:
                raise InvalidConfigError("ways", "must be >= 1")
            if self.shots < 1:
                raise InvalidConfigError("shots", "must be >= 1")
            needed = self.base_classes + self.sessions * self.ways
            if needed > self.total_classes:
                raise InvalidConfigError(
                    "total_classes",
                    f"{needed} classes needed by the session plan, only {self.total_classes} budgeted",
                )
        else:
            if self.ways_var < 0 or self.shots_var < 0:
                raise InvalidConfigError("ways_var", "variances must be >= 0")


@dataclass(frozen=True)
class GeneratorConfig:
    """Input geometry and norm laws of the synthetic classes."""

    input_dim: int = 32
    angular_noise: float = 0.18
    novel_base_mix: float = 0.65  # how strongly novel directions lean on a base class
    base_log_norm_low: float = math.log(1.6)
    base_log_norm_high: float = math.log(2.6)
    base_log_norm_sigma: float = 0.15
    incremental_log_norm_mean: float = math.log(1.1)
    incremental_log_norm_sigma: float = 0.10
    min_base_mean_gap: float = 0.02
    train_per_base: int = 200
    test_per_base: int = 50
    test_per_novel: int = 50

    def __post_init__(self):
        if self.input_dim < 2:
            raise InvalidConfigError("input_dim", "must be >= 2")
        if self.angular_noise < 0:
            raise InvalidConfigError("angular_noise", "must be >= 0")
        if not 0 <= self.novel_base_mix < 1:
            raise InvalidConfigError("novel_base_mix", "must be in [0, 1)")
        if self.base_log_norm_sigma <= 0 or self.incremental_log_norm_sigma <= 0:
            raise InvalidConfigError("base_log_norm_sigma", "sigmas must be > 0")
        if self.train_per_base < 2 or self.test_per_base < 1 or self.test_per_novel < 1:
            raise InvalidConfigError("train_per_base", "sample counts too small")

    def base_log_norm_means(self, n_base: int) -> np.ndarray:
        """Evenly spaced per-class log-norm means, gap-checked."""
        if n_base == 1:
            return np.array([self.base_log_norm_low])
        means = np.linspace(self.base_log_norm_low, self.base_log_norm_high, n_base)
        gap = float(means[1] - means[0])
        if gap < self.min_base_mean_gap:
            raise InvalidConfigError(
                "min_base_mean_gap",
                f"base log-norm means are {gap:.4f} apart, below the {self.min_base_mean_gap} gap",
            )
        return means


@dataclass(frozen=True)
class SessionSpec:
    ways: int
    shots: list[int]  # per-class shot counts for this session


@dataclass
class SessionData:
    index: int
    train_x: np.ndarray
    train_y: np.ndarray
    test_x: np.ndarray
    test_y: np.ndarray

    def labels(self) -> list[int]:
        return sorted(int(v) for v in np.unique(self.train_y))


@dataclass
class FscilDataset:
    input_dim: int
    sessions: list[SessionData] = field(default_factory=list)

    def base_labels(self) -> frozenset[int]:
        return frozenset(self.sessions[0].labels())

    def cumulative_test(self, upto: int) -> tuple[np.ndarray, np.ndarray]:
        """Union of the test splits of sessions 0..upto."""
        xs = [s.test_x for s in self.sessions[: upto + 1]]
        ys = [s.test_y for s in self.sessions[: upto + 1]]
        return np.vstack(xs), np.concatenate(ys)


def sample_open_ended_sessions(scenario: ScenarioConfig, seed: int) -> list[SessionSpec]:
    """Draw per-session ways and per-class shots from rounded Gaussians.

    Draws are rounded to the nearest integer and clipped to at least 1;
    ways are additionally clipped to the remaining class budget. Raises
    once the budget is exhausted before all sessions are specified.
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, 7]))
    remaining = scenario.total_classes - scenario.base_classes
    specs: list[SessionSpec] = []
    for _ in range(scenario.sessions):
        if remaining <= 0:
            raise ClassBudgetExceededError(
                f"class budget exhausted after {len(specs)} sessions"
            )
        ways = int(round(rng.normal(scenario.ways_mean, math.sqrt(scenario.ways_var))))
        ways = max(1, min(ways, remaining))
        shots = [
            max(1, int(round(rng.normal(scenario.shots_mean, math.sqrt(scenario.shots_var)))))
            for _ in range(ways)
        ]
        specs.append(SessionSpec(ways, shots))
        remaining -= ways
    return specs


def session_plan(scenario: ScenarioConfig, seed: int) -> list[SessionSpec]:
    if scenario.mode == "open_ended":
        return sample_open_ended_sessions(scenario, seed)
    return [
        SessionSpec(scenario.ways, [scenario.shots] * scenario.ways)
        for _ in range(scenario.sessions)
    ]


def _sample_class(rng, direction: np.ndarray, mu: float, sigma: float,
                  noise: float, n: int) -> np.ndarray:
    d = direction.shape[0]
    dirs = direction[None, :] + noise * rng.standard_normal((n, d))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    radii = np.exp(rng.normal(mu, sigma, size=n))
    return dirs * radii[:, None]


def generate_synthetic(scenario: ScenarioConfig, generator: GeneratorConfig,
                       seed: int) -> FscilDataset:
    """Deterministic session-partitioned dataset of raw input vectors."""
    plan = session_plan(scenario, seed)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 11]))

    directions = rng.standard_normal((scenario.total_classes, generator.input_dim))
    directions /= np.linalg.norm(directions, axis=1)[:, None]
    # novel classes lean toward a random base class so that, untreated, they
    # appear inside space the base classes already occupy
    mix = generator.novel_base_mix
    for label in range(scenario.base_classes, scenario.total_classes):
        parent = int(rng.integers(0, scenario.base_classes))
        blended = mix * directions[parent] + (1.0 - mix) * directions[label]
        directions[label] = blended / np.linalg.norm(blended)
    base_means = generator.base_log_norm_means(scenario.base_classes)

    sessions: list[SessionData] = []
    # base session: abundant per-class data with individual norm laws
    train_parts, test_parts = [], []
    for label in range(scenario.base_classes):
        mu = float(base_means[label])
        train_parts.append((label, _sample_class(
            rng, directions[label], mu, generator.base_log_norm_sigma,
            generator.angular_noise, generator.train_per_base)))
        test_parts.append((label, _sample_class(
            rng, directions[label], mu, generator.base_log_norm_sigma,
            generator.angular_noise, generator.test_per_base)))
    sessions.append(_pack_session(0, train_parts, test_parts, generator.input_dim))

    next_label = scenario.base_classes
    for t, spec in enumerate(plan, start=1):
        if next_label + spec.ways > scenario.total_classes:
            raise ClassBudgetExceededError(
                f"session {t} needs {spec.ways} classes beyond the {scenario.total_classes} budget"
            )
        train_parts, test_parts = [], []
        for k in range(spec.ways):
            label = next_label + k
            train_parts.append((label, _sample_class(
                rng, directions[label], generator.incremental_log_norm_mean,
                generator.incremental_log_norm_sigma, generator.angular_noise,
                spec.shots[k])))
            test_parts.append((label, _sample_class(
                rng, directions[label], generator.incremental_log_norm_mean,
                generator.incremental_log_norm_sigma, generator.angular_noise,
                generator.test_per_novel)))
        next_label += spec.ways
        sessions.append(_pack_session(t, train_parts, test_parts, generator.input_dim))

    return FscilDataset(generator.input_dim, sessions)


def _pack_session(index: int, train_parts, test_parts, input_dim: int) -> SessionData:
    def pack(parts):
        xs = np.vstack([x for _, x in parts]) if parts else np.empty((0, input_dim))
        ys = np.concatenate([np.full(x.shape[0], label, dtype=np.int64) for label, x in parts])
        return xs, ys

    train_x, train_y = pack(train_parts)
    test_x, test_y = pack(test_parts)
    return SessionData(index, train_x, train_y, test_x, test_y)
