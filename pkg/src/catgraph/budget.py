"""Pinned workspace-regression constant.

Every driver's metered peak workspace must stay below
WORKSPACE_LOG_FACTOR * log2(n + m + T + ceil(1/eps) + 2) across the test
matrix. This is a regression pin, not an asymptotic proof: measured ratios
peak around 46 on the smallest revertible instances (the random shift and
multiplier scalars are register-width-sized while the denominator is a small
logarithm) and fall as instances grow.
"""

import math

WORKSPACE_LOG_FACTOR = 64


def workspace_budget_bits(n: int, m: int, walk_len: int = 0, eps: float | None = None) -> float:
    """Allowed metered peak for an instance of the given shape."""
    inv_eps = math.ceil(1 / eps) if eps else 0
    return WORKSPACE_LOG_FACTOR * math.log2(n + m + walk_len + inv_eps + 2)
