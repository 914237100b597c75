"""Independent scalar oracles shared by the tests.

Pure Python on purpose: no code is shared with the package implementation,
so agreement is meaningful evidence.
"""

from __future__ import annotations

import math


def center_normalize_oracle(row):
    """Mean subtraction, then unit-norm scaling, one row at a time."""
    m = sum(row) / len(row)
    centered = [x - m for x in row]
    norm = math.sqrt(sum(v * v for v in centered))
    return [v / norm for v in centered]


def pearson_oracle(mat):
    """Naive two-pass pairwise Pearson correlations of the rows: means in a
    first pass, centered covariance and variances in a second."""
    n = len(mat)
    means = [sum(row) / n for row in mat]
    out = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            cov = 0.0
            vi = 0.0
            vj = 0.0
            for m in range(n):
                di = mat[i][m] - means[i]
                dj = mat[j][m] - means[j]
                cov += di * dj
                vi += di * di
                vj += dj * dj
            out[i][j] = cov / (math.sqrt(vi) * math.sqrt(vj))
    return out
