"""Deterministic per-path random streams.

Every sampled path draws from its own counter-based substream keyed by
``(master_seed, path_index)``.  Path ``i`` therefore receives the same
variates no matter how many paths are requested, in what order they are
generated, or how work is scheduled.  Philox is used because its key fully
determines the stream without any sequential seeding state.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidArgumentError

_UINT64_MAX = 2**64 - 1


def _check_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
        raise InvalidArgumentError(f"seed must be an integer, got {seed!r}")
    if not 0 <= int(seed) <= _UINT64_MAX:
        raise InvalidArgumentError(f"seed must fit in an unsigned 64-bit value, got {seed}")
    return int(seed)


def path_generator(seed: int, index: int) -> np.random.Generator:
    """Return the dedicated generator for path ``index`` under ``seed``.

    The 128-bit Philox key is the pair (seed, index), so distinct paths use
    provably disjoint streams and regenerating any single path is O(1).
    """
    seed = _check_seed(seed)
    if index < 0:
        raise InvalidArgumentError(f"path index must be nonnegative, got {index}")
    key = np.array([seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def uniform_rows(seed: int, n_paths: int, n_cols: int) -> np.ndarray:
    """(n_paths, n_cols) uniforms; row i comes from substream (seed, i)."""
    _check_seed(seed)
    if n_paths < 1 or n_cols < 1:
        raise InvalidArgumentError("n_paths and n_cols must be positive")
    out = np.empty((n_paths, n_cols))
    for i in range(n_paths):
        out[i] = path_generator(seed, i).random(n_cols)
    return out


def normal_rows(seed: int, n_paths: int, n_cols: int) -> np.ndarray:
    """(n_paths, n_cols) standard normals; row i from substream (seed, i)."""
    _check_seed(seed)
    if n_paths < 1 or n_cols < 1:
        raise InvalidArgumentError("n_paths and n_cols must be positive")
    out = np.empty((n_paths, n_cols))
    for i in range(n_paths):
        out[i] = path_generator(seed, i).standard_normal(n_cols)
    return out
