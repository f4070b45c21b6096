"""Seeded random streams and the few dense products the other modules share.

Matrices and vectors are plain float64 :class:`numpy.ndarray` objects.  All
randomness comes from counter-based Philox streams keyed by a 64-bit integer
seed; sub-streams are derived with :func:`derive_seed`, so replicate ``r`` of
an experiment draws from ``derive_seed(base_seed, r)`` no matter which worker
runs it.
"""

import numpy as np

__all__ = [
    "EmptyInputError",
    "as_matrix",
    "as_vector",
    "derive_seed",
    "generator",
    "normal_vector",
    "matvec",
    "column_dot",
]

_SEED_MASK = (1 << 64) - 1


class EmptyInputError(ValueError):
    """Raised when an operation is asked for zero-length output or input."""


def _check_seed(seed):
    seed = int(seed)
    if seed < 0 or seed > _SEED_MASK:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def derive_seed(seed, *keys):
    """Child seed of ``seed`` along the path ``keys`` (non-negative ints).

    Uses :class:`numpy.random.SeedSequence` spawn keys, so children of distinct
    paths are statistically independent and the mapping is stable across
    numpy versions.
    """
    seed = _check_seed(seed)
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def generator(seed):
    """A fresh :class:`numpy.random.Generator` on a Philox stream for ``seed``."""
    return np.random.Generator(np.random.Philox(_check_seed(seed)))


def normal_vector(seed, length):
    """``length`` i.i.d. standard normal deviates from the stream of ``seed``.

    The transform is numpy's ziggurat sampler applied to the Philox stream.
    It consumes the stream sequentially, so the output for a shorter
    ``length`` is a prefix of the output for a longer one.
    """
    length = int(length)
    if length < 1:
        raise EmptyInputError("normal_vector needs length >= 1")
    return generator(seed).standard_normal(length)


def as_matrix(A):
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError(f"expected a 2-d array, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def as_vector(v):
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-d array, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


def matvec(A, v):
    A = as_matrix(A)
    v = as_vector(v)
    if A.shape[1] != v.shape[0]:
        raise ValueError(f"dimension mismatch: {A.shape} @ {v.shape}")
    return A @ v


def column_dot(A, j, v):
    """Inner product of column ``j`` of ``A`` with ``v``."""
    A = as_matrix(A)
    v = as_vector(v)
    if not 0 <= j < A.shape[1]:
        raise IndexError(f"column {j} out of range for {A.shape[1]} columns")
    if A.shape[0] != v.shape[0]:
        raise ValueError(f"dimension mismatch: {A.shape[0]} rows vs length {v.shape[0]}")
    return float(A[:, j] @ v)
