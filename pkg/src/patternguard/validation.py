"""Input checks shared by the estimator and the command line."""

from __future__ import annotations

from typing import Iterable

import numpy as np

from .store import MAX_VALUE_LEN


def check_strings(X, max_len: int = MAX_VALUE_LEN, name: str = "X") -> list[str]:
    """Flatten ``X`` to a list of strings.

    Accepts a single sequence of strings or a one-column 2-D array-like.
    Non-string entries and over-long values raise.
    """
    if isinstance(X, str):
        raise TypeError(f"{name} must be a collection of strings, not a single string")
    if hasattr(X, "to_numpy"):
        X = X.to_numpy()
    if isinstance(X, np.ndarray):
        if X.ndim == 2:
            if X.shape[1] != 1:
                raise ValueError(f"{name} must have exactly one column, got {X.shape[1]}")
            X = X[:, 0]
        elif X.ndim != 1:
            raise ValueError(f"{name} must be 1-D or a single column")
        items = X.tolist()
    else:
        items = list(X)
        if items and isinstance(items[0], (list, tuple)):
            if any(len(row) != 1 for row in items):
                raise ValueError(f"{name} must have exactly one column")
            items = [row[0] for row in items]
    for i, v in enumerate(items):
        if not isinstance(v, str):
            raise TypeError(f"{name}[{i}] is {type(v).__name__}, expected str")
        if len(v) > max_len:
            raise ValueError(f"{name}[{i}] has {len(v)} characters; the limit is {max_len}")
    return items


def check_nonempty(values: Iterable[str], name: str = "X") -> list[str]:
    """Non-empty strings of ``values``; raises if none are left."""
    out = [v for v in values if v]
    if not out:
        raise ValueError(f"{name} contains no non-empty strings")
    return out
