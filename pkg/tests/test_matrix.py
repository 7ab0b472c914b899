import itertools
import random

import pytest

from pmsr import msr
from pmsr.field import Field
from pmsr.matrix import Matrix, SingularMatrixError, vandermonde

from conftest import EXAMPLE_PSI, EXAMPLE_RECORD

# Rows (2),(4),(5),(6) of the example encoding matrix: the interference
# system the decoder inverts.
INTERFERENCE_ROWS = [[1, 2, 4, 8], [1, 4, 3, 12], [1, 5, 12, 8], [1, 6, 10, 8]]


class TestConstruction:
    def test_from_rows_and_accessors(self, f13):
        m = Matrix.from_rows(f13, [[1, 2], [3, 4]])
        assert m.shape == (2, 2)
        assert m.entry(1, 0) == 3
        assert m.row(0) == [1, 2]
        assert m.col(1) == [2, 4]
        assert m.to_rows() == [[1, 2], [3, 4]]

    def test_from_rows_canonicalizes(self, f13):
        m = Matrix.from_rows(f13, [[14, -1]])
        assert m.to_rows() == [[1, 12]]

    def test_ragged_rejected(self, f13):
        with pytest.raises(ValueError):
            Matrix.from_rows(f13, [[1, 2], [3]])

    def test_zeros_identity_column(self, f13):
        assert Matrix.zeros(f13, 2, 3).to_rows() == [[0, 0, 0], [0, 0, 0]]
        assert Matrix.identity(f13, 2).to_rows() == [[1, 0], [0, 1]]
        assert Matrix.column(f13, [5, 6]).shape == (2, 1)

    def test_random_is_seeded(self, f13):
        a = Matrix.random(f13, 3, 4, random.Random(5))
        b = Matrix.random(f13, 3, 4, random.Random(5))
        assert a == b

    def test_immutable(self, f13):
        m = Matrix.identity(f13, 2)
        with pytest.raises(AttributeError):
            m.rows = 3

    def test_equality_and_hash(self, f13, f257):
        a = Matrix.from_rows(f13, [[1, 2]])
        assert a == Matrix.from_rows(f13, [[1, 2]])
        assert a != Matrix.from_rows(f13, [[1, 3]])
        assert a != Matrix.from_rows(f257, [[1, 2]])
        assert hash(a) == hash(Matrix.from_rows(f13, [[1, 2]]))


class TestMul:
    def test_identity_times_random(self, f13, rng):
        a = Matrix.random(f13, 4, 4, rng)
        assert Matrix.identity(f13, 4) @ a == a

    def test_worked_example_row(self, f13, params3, enc13):
        m = msr.message_matrix_from_record(EXAMPLE_RECORD, params3, f13)
        product = enc13.psi @ m.m
        assert product.row(0) == [12, 3]
        assert product.row(1) == [9, 11]

    def test_zero_annihilates(self, f13, rng):
        a = Matrix.random(f13, 3, 3, rng)
        assert (Matrix.zeros(f13, 3, 3) @ a).is_zero()

    def test_dimension_mismatch(self, f13):
        with pytest.raises(ValueError, match="dimension mismatch"):
            Matrix.zeros(f13, 2, 3) @ Matrix.zeros(f13, 2, 3)

    def test_field_mismatch(self, f13, f257):
        with pytest.raises(ValueError, match="incompatible fields"):
            Matrix.zeros(f13, 2, 2) @ Matrix.zeros(f257, 2, 2)

    def test_associativity_random(self, f257, rng):
        for _ in range(10):
            a = Matrix.random(f257, 3, 4, rng)
            b = Matrix.random(f257, 4, 2, rng)
            c = Matrix.random(f257, 2, 5, rng)
            assert (a @ b) @ c == a @ (b @ c)


class TestInverse:
    def test_identity(self, f13):
        eye = Matrix.identity(f13, 4)
        assert eye.inverse() == eye

    def test_interference_submatrix(self, f13):
        a = Matrix.from_rows(f13, INTERFERENCE_ROWS)
        inv = a.inverse()
        assert inv @ a == Matrix.identity(f13, 4)
        assert a @ inv == Matrix.identity(f13, 4)

    def test_singular_reports_rank(self, f13):
        a = Matrix.from_rows(f13, [[1, 2, 3], [1, 2, 3], [0, 1, 4]])
        with pytest.raises(SingularMatrixError, match="singular") as exc:
            a.inverse()
        assert exc.value.rank == 2

    def test_non_square_rejected(self, f13):
        with pytest.raises(ValueError):
            Matrix.zeros(f13, 2, 3).inverse()

    def test_random_invertible_roundtrip(self, f257, rng):
        eye = Matrix.identity(f257, 5)
        found = 0
        while found < 10:
            a = Matrix.random(f257, 5, 5, rng)
            try:
                inv = a.inverse()
            except SingularMatrixError:
                continue
            assert inv @ a == eye
            found += 1


class TestSolve:
    def test_identity(self, f13, rng):
        y = Matrix.random(f13, 3, 2, rng)
        assert Matrix.identity(f13, 3).solve(y) == y

    def test_interference_system(self, f13, params3, enc13, rng):
        # Forward-compute answers from a known database, solve, and compare
        # against the interference values computed straight from the data.
        records = [EXAMPLE_RECORD, [7, 8, 9, 10, 11, 12], [3, 1, 4, 1, 5, 9]]
        messages = [msr.message_matrix_from_record(r, params3, f13) for r in records]
        stack = messages[0].m.hstack(messages[1].m).hstack(messages[2].m)
        u = Matrix.random(f13, 3, 6, rng)
        u1 = u.row(0)
        # Answers of the interference-only nodes for subquery 1 are psi_h . M U_1^T.
        m_u1 = [sum(stack.entry(h, j) * u1[j] for j in range(6)) % 13 for h in range(4)]
        a = Matrix.from_rows(f13, INTERFERENCE_ROWS)
        rhs = Matrix.column(
            f13, [sum(r * v for r, v in zip(row, m_u1)) % 13 for row in INTERFERENCE_ROWS])
        solved = a.solve(rhs)
        assert solved.col(0) == m_u1

    def test_homogeneous(self, f13):
        a = Matrix.from_rows(f13, INTERFERENCE_ROWS)
        assert a.solve(Matrix.zeros(f13, 4, 1)).is_zero()

    def test_exactness(self, f257, rng):
        for _ in range(10):
            a = Matrix.random(f257, 6, 6, rng)
            try:
                x = a.solve(Matrix.random(f257, 6, 3, rng))
            except SingularMatrixError:
                continue
            y = a @ x
            assert a.solve(y) == x

    def test_singular_rejected(self, f13):
        a = Matrix.from_rows(f13, [[1, 1], [2, 2]])
        with pytest.raises(SingularMatrixError):
            a.solve(Matrix.column(f13, [1, 2]))


class TestVandermonde:
    def test_example_rows(self, f13):
        v = vandermonde(f13, range(1, 7), 4)
        assert v.row(2) == [1, 3, 9, 1]
        assert v.row(3) == [1, 4, 3, 12]
        assert v.to_rows() == EXAMPLE_PSI

    def test_single_point(self, f13):
        assert vandermonde(f13, [5], 1).to_rows() == [[1]]

    def test_duplicates_rejected(self, f13):
        with pytest.raises(ValueError, match="degenerate points"):
            vandermonde(f13, [1, 2, 1], 3)

    def test_zero_point_rejected(self, f13):
        with pytest.raises(ValueError, match="degenerate points"):
            vandermonde(f13, [0, 1, 2], 3)

    def test_rank_property_gf13(self, f13):
        # All point subsets of sizes 1..4: full expected rank every time.
        for size in range(1, 5):
            for pts in itertools.combinations(range(1, 13), size):
                for cols in range(1, 5):
                    v = vandermonde(f13, pts, cols)
                    assert v.rank() == min(size, cols), (pts, cols)


class TestRank:
    def test_identity(self, f13):
        assert Matrix.identity(f13, 5).rank() == 5

    def test_example_psi(self, f13):
        assert Matrix.from_rows(f13, EXAMPLE_PSI).rank() == 4

    def test_zero(self, f13):
        assert Matrix.zeros(f13, 3, 4).rank() == 0


class TestSubmatrixRows:
    def test_all_rows(self, f13):
        a = Matrix.from_rows(f13, EXAMPLE_PSI)
        assert a.submatrix_rows(range(6)) == a

    def test_interference_selection(self, f13):
        a = Matrix.from_rows(f13, EXAMPLE_PSI)
        assert a.submatrix_rows([1, 3, 4, 5]).to_rows() == INTERFERENCE_ROWS

    def test_empty(self, f13):
        a = Matrix.from_rows(f13, EXAMPLE_PSI)
        sub = a.submatrix_rows([])
        assert sub.shape == (0, 4)

    def test_out_of_range(self, f13):
        with pytest.raises(IndexError):
            Matrix.identity(f13, 3).submatrix_rows([0, 3])

    def test_duplicates_rejected(self, f13):
        with pytest.raises(ValueError, match="duplicate"):
            Matrix.identity(f13, 3).submatrix_rows([0, 0])

    def test_preserves_order(self, f13):
        a = Matrix.from_rows(f13, EXAMPLE_PSI)
        assert a.submatrix_rows([5, 0]).to_rows() == [EXAMPLE_PSI[5], EXAMPLE_PSI[0]]


class TestElementwise:
    def test_add_sub_roundtrip(self, f257, rng):
        a = Matrix.random(f257, 3, 4, rng)
        b = Matrix.random(f257, 3, 4, rng)
        assert (a + b) - b == a
        assert a - a == Matrix.zeros(f257, 3, 4)

    def test_scale(self, f13):
        a = Matrix.from_rows(f13, [[1, 7]])
        assert a.scale(2).to_rows() == [[2, 1]]

    def test_transpose(self, f13):
        a = Matrix.from_rows(f13, [[1, 2, 3], [4, 5, 6]])
        assert a.transpose().to_rows() == [[1, 4], [2, 5], [3, 6]]
        assert a.transpose().transpose() == a

    def test_hstack(self, f13):
        a = Matrix.from_rows(f13, [[1], [2]])
        b = Matrix.from_rows(f13, [[3, 4], [5, 6]])
        assert a.hstack(b).to_rows() == [[1, 3, 4], [2, 5, 6]]
