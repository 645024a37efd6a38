"""Vector geometry primitives shared by every other module.

All vectors are dense float64 numpy arrays. Norms at or below ``EPS_NORM``
are treated as errors rather than clamped: a zero vector has no direction,
and clamping would silently corrupt both angle and norm statistics.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import EmptyBatchError, DimensionMismatchError, ZeroNormError

EPS_NORM = 1e-12


def as_vector(values) -> np.ndarray:
    """Coerce input to a 1-D float64 array."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise DimensionMismatchError(f"expected a 1-D vector, got shape {v.shape}")
    return v


def checked_norm(e) -> float:
    """Euclidean norm, raising ZeroNormError at or below the floor."""
    n = float(np.linalg.norm(as_vector(e)))
    if not np.isfinite(n):
        raise ZeroNormError("vector has non-finite entries")
    if n <= EPS_NORM:
        raise ZeroNormError(f"vector norm {n!r} is at or below {EPS_NORM}")
    return n


def cosine_similarity(a, b) -> float:
    """Cosine of the angle between two vectors, in [-1, 1]."""
    a = as_vector(a)
    b = as_vector(b)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"shapes {a.shape} and {b.shape} differ")
    c = float(np.dot(a, b) / (checked_norm(a) * checked_norm(b)))
    # rounding can push the quotient a hair outside the valid range
    return min(1.0, max(-1.0, c))


def normalize(e) -> np.ndarray:
    """Rescale to unit norm, preserving direction."""
    e = as_vector(e)
    return e / checked_norm(e)


def log_norm(e) -> float:
    """Natural logarithm of the Euclidean norm."""
    return math.log(checked_norm(e))


def mean_of_normalized(batch) -> np.ndarray:
    """Mean of the unit-normalized batch vectors.

    The result is deliberately NOT renormalized; opposing directions can
    cancel to a near-zero vector and callers decide how to handle that.
    """
    rows = [normalize(e) for e in batch]
    if not rows:
        raise EmptyBatchError("mean_of_normalized needs at least one vector")
    return np.mean(rows, axis=0)
