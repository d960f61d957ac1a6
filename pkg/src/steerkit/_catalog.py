"""Index masks for the ten steering inequalities, shared by both kernel backends."""

import numpy as np

IDS = (
    "s1-bob-offdiag",
    "s1-diag",
    "s1-charlie-offdiag",
    "s1-ij-eq-neqk",
    "s1-jk-eq-neqi",
    "s1-ik-eq-neqj",
    "s2b-diag",
    "s2b-off",
    "s2c-diag",
    "s2c-off",
)

# (i, j, k) predicates; i is Bob's axis, j Charlie's, k Alice's coherence basis
_PAIR_PREDICATES = (
    lambda i, j, k: i != k,
    lambda i, j, k: i == j == k,
    lambda i, j, k: j != k,
    lambda i, j, k: i == j and j != k,
    lambda i, j, k: i != j and j == k,
    lambda i, j, k: i == k and k != j,
)

PAIR_MASKS = np.array(
    [
        [[[1.0 if pred(i, j, k) else 0.0 for k in range(3)] for j in range(3)] for i in range(3)]
        for pred in _PAIR_PREDICATES
    ]
)

# (axis of the single measuring party, k)
DIAG_MASK = np.eye(3)
OFF_MASK = 1.0 - np.eye(3)
