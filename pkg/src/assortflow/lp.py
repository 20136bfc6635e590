"""Small dense simplex for max c.x s.t. A x <= b, x >= 0, b >= 0.

Tableau method with Bland's rule. Meant for verification-sized problems
(a few hundred variables), where exactness matters more than speed.
"""

from __future__ import annotations

import numpy as np

PIVOT_TOL = 1e-12
COST_TOL = 1e-11


class Unbounded(ArithmeticError):
    pass


def maximize(c, A, b, max_iter: int = 100_000) -> tuple[float, np.ndarray]:
    c = np.asarray(c, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if np.any(b < 0):
        raise ValueError("right-hand side must be non-negative (slack basis start)")

    tab = np.zeros((m + 1, n + m + 1))
    tab[:m, :n] = A
    tab[:m, n:n + m] = np.eye(m)
    tab[:m, -1] = b
    tab[m, :n] = -c
    basis = np.arange(n, n + m)

    for _ in range(max_iter):
        cost = tab[m, :-1]
        entering = np.flatnonzero(cost < -COST_TOL)
        if entering.size == 0:
            break
        j = entering[0]
        col = tab[:m, j]
        rows = np.flatnonzero(col > PIVOT_TOL)
        if rows.size == 0:
            raise Unbounded("objective is unbounded")
        ratios = tab[rows, -1] / col[rows]
        best = ratios.min()
        tied = rows[ratios <= best + PIVOT_TOL * max(1.0, abs(best))]
        r = tied[np.argmin(basis[tied])]
        tab[r] /= tab[r, j]
        others = np.arange(m + 1) != r
        tab[others] -= np.outer(tab[others, j], tab[r])
        basis[r] = j
    else:
        raise RuntimeError("simplex iteration limit reached")

    x = np.zeros(n + m)
    x[basis] = tab[:m, -1]
    return float(tab[m, -1]), np.maximum(x[:n], 0.0)
