"""Orthonormal center bank and minimum-cost center-to-class allocation.

A d-dimensional feature space holds at most d mutually orthogonal unit
centers; the bank pre-generates all d of them and hands them out to
classes as sessions arrive. Matching is cosine-distance minimum-cost
assignment with zero-cost virtual rows padding the matrix square, so real
classes always win the centers they fit best.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidDimensionError, TooManyClassesError, UnassignedLabelError
from .geometry import cosine_similarity
from .hungarian import minimum_cost_assignment


@dataclass(frozen=True)
class CenterBank:
    """d orthonormal centers plus the label-to-center allocation state."""

    centers: np.ndarray  # (d, d), row i is center i, unit norm
    assignment: dict[int, int] = field(default_factory=dict)  # label -> center index
    free_indices: frozenset[int] = frozenset()

    @property
    def dimension(self) -> int:
        return self.centers.shape[1]

    def center_for(self, label: int) -> np.ndarray:
        try:
            return self.centers[self.assignment[label]]
        except KeyError:
            raise UnassignedLabelError(f"label {label} has no assigned center") from None

    def assigned_labels(self) -> list[int]:
        return sorted(self.assignment)

    def assigned_center_matrix(self, labels) -> np.ndarray:
        """Stack the centers for the given labels, row per label."""
        try:
            idx = [self.assignment[int(y)] for y in labels]
        except KeyError as exc:
            raise UnassignedLabelError(f"label {exc.args[0]} has no assigned center") from None
        return self.centers[idx]

    def with_centers(self, centers: np.ndarray) -> "CenterBank":
        return CenterBank(centers, dict(self.assignment), self.free_indices)


@dataclass(frozen=True)
class CostMatrix:
    """Square cosine-distance matrix with row/column provenance.

    Rows are classes (real ones first, then zero-cost virtual padding);
    columns are the available center indices.
    """

    entries: np.ndarray
    row_labels: list[int | None]  # None marks a virtual padding row
    column_centers: list[int]


def generate_orthonormal_centers(d: int, seed: int) -> CenterBank:
    """Seeded random orthonormal basis of R^d, all centers initially free.

    Fills a d x d matrix with standard-normal draws and orthonormalizes the
    rows by modified Gram-Schmidt with a second re-orthogonalization pass.
    A row whose residual norm falls below 1e-6 is restarted from fresh
    draws, so the basis never degenerates.
    """
    if d < 2:
        raise InvalidDimensionError(f"need dimension >= 2, got {d}")
    rng = np.random.default_rng(seed)
    centers = np.empty((d, d), dtype=np.float64)
    i = 0
    while i < d:
        v = rng.standard_normal(d)
        for _ in range(2):  # re-orthogonalize to push residual error to rounding level
            for j in range(i):
                v -= np.dot(centers[j], v) * centers[j]
        norm = np.linalg.norm(v)
        if norm < 1e-6:
            continue  # draw a fresh candidate for this row
        centers[i] = v / norm
        i += 1
    return CenterBank(centers, {}, frozenset(range(d)))


def build_cost_matrix(
    class_means: dict[int, np.ndarray],
    available_centers: list[int],
    centers: np.ndarray,
) -> CostMatrix:
    """Square cost matrix of 1 - cos(mean, center), padded with virtual rows.

    Virtual rows cost exactly 0 against every center, so they soak up the
    spare centers without influencing which centers the real classes get.
    """
    labels = sorted(class_means)
    n = len(available_centers)
    if len(labels) > n:
        raise TooManyClassesError(
            f"{len(labels)} classes but only {n} available centers"
        )
    entries = np.zeros((n, n), dtype=np.float64)
    for i, label in enumerate(labels):
        mean = class_means[label]
        for j, c_idx in enumerate(available_centers):
            entries[i, j] = 1.0 - cosine_similarity(mean, centers[c_idx])
    row_labels: list[int | None] = list(labels) + [None] * (n - len(labels))
    return CostMatrix(entries, row_labels, list(available_centers))


def _assign(bank: CenterBank, class_means: dict[int, np.ndarray]) -> CenterBank:
    available = sorted(bank.free_indices)
    cost = build_cost_matrix(class_means, available, bank.centers)
    sigma = minimum_cost_assignment(cost.entries)
    assignment = dict(bank.assignment)
    taken: set[int] = set()
    for i, label in enumerate(cost.row_labels):
        if label is None:
            continue
        center_index = cost.column_centers[sigma[i]]
        assignment[label] = center_index
        taken.add(center_index)
    free = frozenset(bank.free_indices - taken)
    return CenterBank(bank.centers, assignment, free)


def assign_base_session(bank: CenterBank, class_means: dict[int, np.ndarray]) -> CenterBank:
    """Allocate centers to the base classes of a freshly generated bank."""
    return _assign(bank, class_means)


def assign_incremental_session(
    bank: CenterBank, new_class_means: dict[int, np.ndarray]
) -> CenterBank:
    """Allocate free centers to a session's new classes.

    Existing assignments are excluded from the matching and come back
    untouched.
    """
    for label in new_class_means:
        if label in bank.assignment:
            raise TooManyClassesError(f"label {label} is already assigned a center")
    return _assign(bank, new_class_means)
