"""Tests for the dense equality-form simplex solver."""

import numpy as np
import pytest
from scipy.optimize import linprog

from minifunc.errors import NumericalError
from minifunc.simplexlp import simplex_solve


class TestBasics:
    def test_single_variable(self):
        sol = simplex_solve([1.0], [[1.0]], [5.0])
        assert sol.x[0] == pytest.approx(5.0, abs=1e-12)
        assert sol.value == pytest.approx(5.0, abs=1e-12)

    def test_unique_vertex(self):
        # x + y = 4, x - y = 2 pins (3, 1); objective just reads it off
        sol = simplex_solve([3.0, 2.0], [[1.0, 1.0], [1.0, -1.0]], [4.0, 2.0])
        assert sol.x == pytest.approx([3.0, 1.0], abs=1e-10)
        assert sol.value == pytest.approx(11.0, abs=1e-10)

    def test_picks_better_vertex(self):
        # max 2x + y on x + y = 1
        sol = simplex_solve([2.0, 1.0], [[1.0, 1.0]], [1.0])
        assert sol.value == pytest.approx(2.0, abs=1e-12)
        assert sol.x == pytest.approx([1.0, 0.0], abs=1e-12)

    def test_negative_rhs_row(self):
        # -x - y = -1 is x + y = 1 after normalization
        sol = simplex_solve([1.0, 2.0], [[-1.0, -1.0]], [-1.0])
        assert sol.value == pytest.approx(2.0, abs=1e-12)

    def test_redundant_row(self):
        sol = simplex_solve([1.0, 0.0], [[1.0, 1.0], [2.0, 2.0]], [1.0, 2.0])
        assert sol.value == pytest.approx(1.0, abs=1e-10)

    def test_solution_nonnegative(self):
        sol = simplex_solve([1.0, 1.0, -1.0], [[1.0, 2.0, 3.0]], [6.0])
        assert sol.x.min() >= 0.0
        assert sol.iterations >= 1


class TestFailures:
    def test_infeasible_contradictory(self):
        with pytest.raises(NumericalError, match="infeasible"):
            simplex_solve([1.0], [[1.0], [1.0]], [1.0, 2.0])

    def test_infeasible_negative_mass(self):
        with pytest.raises(NumericalError, match="infeasible"):
            simplex_solve([1.0, 1.0], [[1.0, 1.0]], [-1.0])

    def test_unbounded(self):
        # y = 1 leaves x free to grow
        with pytest.raises(NumericalError, match="unbounded"):
            simplex_solve([1.0, 0.0], [[0.0, 1.0]], [1.0])

    def test_dimension_mismatch(self):
        with pytest.raises(NumericalError, match="dimensions"):
            simplex_solve([1.0, 2.0], [[1.0]], [1.0])


class TestAgainstScipy:
    def test_random_feasible_programs(self):
        # random equality-form LPs with a known feasible point
        rng = np.random.default_rng(7)
        checked = 0
        for _ in range(30):
            m = int(rng.integers(1, 5))
            n = int(rng.integers(m + 1, m + 9))
            A = rng.normal(size=(m, n))
            x0 = rng.uniform(0.0, 2.0, size=n)
            b = A @ x0
            c = rng.normal(size=n)
            ref = linprog(-c, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
            if ref.status == 3:
                with pytest.raises(NumericalError, match="unbounded"):
                    simplex_solve(c, A, b)
                continue
            assert ref.status == 0
            sol = simplex_solve(c, A, b)
            assert sol.value == pytest.approx(-ref.fun, rel=1e-7, abs=1e-8)
            assert np.allclose(A @ sol.x, b, atol=1e-7)
            assert sol.x.min() >= -1e-9
            checked += 1
        assert checked >= 15

    def test_moment_style_program(self):
        # the shape used by the measure-pair construction
        G = 80
        x = 0.5 * (1.0 - np.cos(np.pi * np.arange(G) / (G - 1)))
        L = 3
        V = np.vander(x, L + 1, increasing=True)[:, 1:]
        A = np.zeros((L + 2, 2 * G))
        A[0, :G] = 1.0
        A[1, G:] = 1.0
        A[2:, :G] = V.T
        A[2:, G:] = -V.T
        b = np.zeros(L + 2)
        b[0] = b[1] = 1.0
        fx = np.abs(x - 0.37)
        c = np.concatenate([fx, -fx])
        sol = simplex_solve(c, A, b)
        ref = linprog(-c, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
        assert ref.status == 0
        assert sol.value == pytest.approx(-ref.fun, rel=1e-8, abs=1e-10)
        assert np.abs(A @ sol.x - b).max() < 1e-10
