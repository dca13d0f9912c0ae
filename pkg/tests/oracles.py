"""Independent oracles the test suite checks the implementation against.

These are deliberately brute-force and share no code with the package:
central finite differences for gradients, dense vertex enumeration for
linear programs, and grid search for the two-step battery arbitrage
problem.
"""

from __future__ import annotations

import itertools

import numpy as np


def finite_difference_grads(net, sequences, targets, step: float = 1e-5) -> dict:
    """Central finite differences of the MSE loss w.r.t. every parameter."""

    def loss() -> float:
        y, _ = net.forward(sequences)
        d = y - targets
        return float(np.mean(d * d))

    grads = {}
    for name, arr in net.params.items():
        g = np.zeros_like(arr)
        flat = arr.ravel()
        gflat = g.ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            up = loss()
            flat[i] = orig - step
            down = loss()
            flat[i] = orig
            gflat[i] = (up - down) / (2 * step)
        grads[name] = g
    return grads


def _side_grid(pairs: list[list[float]]) -> np.ndarray:
    """Cartesian product of per-slot candidate values, shape (len(pairs), combos)."""
    if not pairs:
        return np.zeros((0, 1))
    grids = np.meshgrid(*pairs, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=0)


def enumerate_lp_minimum(
    c: np.ndarray,
    A: np.ndarray,
    row_lo: np.ndarray,
    row_up: np.ndarray,
    col_lo: np.ndarray,
    col_up: np.ndarray,
    tol: float = 1e-7,
) -> float | None:
    """Brute-force minimum of c.x over {col_lo<=x<=col_up, row_lo<=Ax<=row_up}.

    Enumerates every candidate vertex: k rows tight at one of their bounds
    combined with n-k variables fixed at one of theirs, solving the k x k
    system for the free variables (all bound-side combinations of one
    active set are solved as a single batched system).  Assumes finite
    variable bounds, so the region is bounded.  Returns None if no feasible
    vertex exists.
    """
    m, n = A.shape
    best = None

    def consider(X: np.ndarray) -> None:
        """X holds candidate points column-wise, shape (n, combos)."""
        nonlocal best
        ok = np.all((X >= col_lo[:, None] - tol) & (X <= col_up[:, None] + tol), axis=0)
        if not np.any(ok):
            return
        act = A @ X[:, ok]
        ok2 = np.all((act >= row_lo[:, None] - tol) & (act <= row_up[:, None] + tol), axis=0)
        if not np.any(ok2):
            return
        val = float(np.min(c @ X[:, ok][:, ok2]))
        if best is None or val < best:
            best = val

    for k in range(0, min(m, n) + 1):
        for rows in itertools.combinations(range(m), k):
            row_opts = [[b for b in (row_lo[i], row_up[i]) if np.isfinite(b)] for i in rows]
            if any(len(o) == 0 for o in row_opts):
                continue
            row_vals = _side_grid(row_opts)
            nr = row_vals.shape[1]
            for free in itertools.combinations(range(n), k):
                fixed = [j for j in range(n) if j not in free]
                fixed_vals = _side_grid([[col_lo[j], col_up[j]] for j in fixed])
                nf = fixed_vals.shape[1]
                X = np.empty((n, nf * nr))
                fixed_rep = np.repeat(fixed_vals, nr, axis=1)
                X[fixed, :] = fixed_rep
                if k:
                    # rhs per combo: row side minus the fixed variables' contribution
                    rside = np.tile(row_vals, nf)
                    contrib = A[np.ix_(rows, fixed)] @ fixed_rep if fixed else 0.0
                    try:
                        X[list(free), :] = np.linalg.solve(A[np.ix_(rows, free)], rside - contrib)
                    except np.linalg.LinAlgError:
                        continue
                consider(X)
    return best


def arbitrage_grid_search(
    prices: tuple[float, float],
    loads: tuple[float, float],
    e_max: float,
    p_max: float,
    resolution: float = 0.01,
) -> float:
    """Cheapest two-step cost over a grid of charge-then-discharge amounts."""
    best = np.inf
    charge_levels = np.arange(0.0, min(e_max, p_max) + resolution / 2, resolution)
    for charge in charge_levels:
        discharge = min(charge, p_max, loads[1])
        cost = prices[0] * (loads[0] + charge) + prices[1] * (loads[1] - discharge)
        best = min(best, cost)
    return float(best)
