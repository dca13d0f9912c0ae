import time

import numpy as np
import pytest

from vppdispatch.dispatch import ColumnName, LPBuilder, solve_lp, write_mps
from vppdispatch.dispatch.simplex import SolveOptions

from oracles import enumerate_lp_minimum


def _build(c, A, row_lo, row_up, col_lo, col_up):
    b = LPBuilder()
    n = len(c)
    for j in range(n):
        b.add_col(ColumnName("x", "", j), col_lo[j], col_up[j], c[j])
    for i in range(A.shape[0]):
        b.add_row([(j, A[i, j]) for j in range(n) if A[i, j] != 0.0], row_lo[i], row_up[i])
    return b.build()


def random_bounded_lp(rng):
    """Feasible bounded LP with at most 8 variables and 8 rows.

    Joint size is capped so the enumeration oracle stays enumerable in
    reasonable time; the 8-variable and 8-row extremes are still reached.
    """
    while True:
        n = int(rng.integers(2, 9))
        m = int(rng.integers(1, 9))
        if n + m <= 12:
            break
    A = rng.standard_normal((m, n)).round(2)
    col_lo = rng.uniform(-3, 0, n).round(2)
    col_up = col_lo + rng.uniform(0.5, 4, n).round(2)
    x0 = rng.uniform(col_lo, col_up)
    act = A @ x0
    row_lo = act - rng.uniform(0.1, 2, m)
    row_up = act + rng.uniform(0.1, 2, m)
    for i in range(m):
        kind = rng.integers(0, 4)
        if kind == 0:
            row_lo[i] = -np.inf
        elif kind == 1:
            row_up[i] = np.inf
        elif kind == 2:
            row_lo[i] = row_up[i] = act[i]
    c = rng.standard_normal(n).round(2)
    return c, A, row_lo, row_up, col_lo, col_up


class TestTinyPrograms:
    def test_single_variable_lower_bound(self):
        b = LPBuilder()
        b.add_col(ColumnName("x", "", 0), 3.0, np.inf, 1.0)
        s = solve_lp(b.build())
        assert s.status == "optimal"
        assert s.objective == pytest.approx(3.0)

    def test_textbook_simplex_instance(self):
        b = LPBuilder()
        x = b.add_col(ColumnName("x", "", 0), 0.0, np.inf, -1.0)
        y = b.add_col(ColumnName("y", "", 1), 0.0, np.inf, -1.0)
        b.add_row([(x, 1.0), (y, 1.0)], -np.inf, 1.0)
        s = solve_lp(b.build())
        assert s.status == "optimal"
        assert s.objective == pytest.approx(-1.0)

    def test_infeasible_detected(self):
        b = LPBuilder()
        x = b.add_col(ColumnName("x", "", 0), 0.0, 1.0, 1.0)
        b.add_row([(x, 1.0)], 2.0, 3.0)
        assert solve_lp(b.build()).status == "infeasible"

    def test_unbounded_detected(self):
        b = LPBuilder()
        x = b.add_col(ColumnName("x", "", 0), -np.inf, np.inf, 1.0)
        y = b.add_col(ColumnName("y", "", 1), 0.0, np.inf, 0.0)
        b.add_row([(x, 1.0), (y, 1.0)], -np.inf, 5.0)
        assert solve_lp(b.build()).status == "unbounded"

    def test_iteration_limit_reported(self):
        rng = np.random.default_rng(0)
        lp = _build(*random_bounded_lp(rng))
        s = solve_lp(lp, SolveOptions(max_iterations=0))
        assert s.status == "iteration_limit"


class TestOracleEquivalence:
    def test_fifty_random_lps_match_enumeration(self):
        rng = np.random.default_rng(2024)
        started = time.time()
        for trial in range(50):
            c, A, row_lo, row_up, col_lo, col_up = random_bounded_lp(rng)
            lp = _build(c, A, row_lo, row_up, col_lo, col_up)
            expect = enumerate_lp_minimum(c, A, row_lo, row_up, col_lo, col_up)
            assert expect is not None, f"trial {trial}: oracle found no vertex"
            got = solve_lp(lp)
            assert got.status == "optimal", f"trial {trial}: {got.status}"
            assert got.objective == pytest.approx(expect, abs=1e-6), f"trial {trial}"
        assert time.time() - started < 5.0

    def test_presolve_and_raw_paths_agree(self):
        rng = np.random.default_rng(77)
        for _ in range(25):
            lp = _build(*random_bounded_lp(rng))
            with_pre = solve_lp(lp, SolveOptions(presolve=True))
            without = solve_lp(lp, SolveOptions(presolve=False))
            assert with_pre.status == without.status == "optimal"
            assert with_pre.objective == pytest.approx(without.objective, abs=1e-7)

    def test_primal_within_bounds_when_optimal(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            c, A, row_lo, row_up, col_lo, col_up = random_bounded_lp(rng)
            lp = _build(c, A, row_lo, row_up, col_lo, col_up)
            s = solve_lp(lp)
            assert s.status == "optimal"
            assert np.all(s.x >= col_lo - 1e-7) and np.all(s.x <= col_up + 1e-7)
            act = A @ s.x
            assert np.all(act >= row_lo - 1e-7) and np.all(act <= row_up + 1e-7)


class TestDeterminism:
    def test_identical_inputs_identical_solutions(self):
        rng = np.random.default_rng(9)
        lp = _build(*random_bounded_lp(rng))
        a = solve_lp(lp)
        b = solve_lp(lp)
        assert a.status == b.status
        assert np.array_equal(a.x, b.x)
        assert a.iterations == b.iterations


class TestGreedyWeakDuality:
    def test_feasible_point_never_beats_optimum(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            c, A, row_lo, row_up, col_lo, col_up = random_bounded_lp(rng)
            lp = _build(c, A, row_lo, row_up, col_lo, col_up)
            s = solve_lp(lp)
            assert s.status == "optimal"
            # greedy heuristic: bound-following candidate clipped into the box
            greedy = np.where(c > 0, col_lo, col_up)
            act = A @ greedy
            if np.all(act >= row_lo - 1e-9) and np.all(act <= row_up + 1e-9):
                assert float(c @ greedy) >= s.objective - 1e-6


def test_mps_export_smoke(tmp_path):
    rng = np.random.default_rng(4)
    lp = _build(*random_bounded_lp(rng))
    path = tmp_path / "prog.mps"
    write_mps(lp, str(path))
    text = path.read_text()
    for section in ("NAME", "ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"):
        assert section in text
    assert "C0000000" in text
