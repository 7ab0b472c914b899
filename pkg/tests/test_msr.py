import itertools
import random

import pytest

from pmsr import msr
from pmsr.field import Field
from pmsr.matrix import Matrix

from conftest import (
    EXAMPLE_LAMBDAS,
    EXAMPLE_MESSAGE,
    EXAMPLE_PSI,
    EXAMPLE_RECORD,
    random_record,
)


class TestParams:
    def test_from_nk_k3(self, params3):
        assert (params3.n, params3.k) == (6, 3)
        assert (params3.r, params3.alpha, params3.beta, params3.B) == (4, 2, 1, 6)

    def test_from_nk_k4(self):
        p = msr.MsrParams.from_nk(9, 4)
        assert (p.r, p.alpha, p.beta, p.B) == (6, 3, 1, 12)
        assert p.alpha * p.k == p.B

    def test_k_too_small(self):
        with pytest.raises(ValueError, match="k must be >= 2"):
            msr.MsrParams.from_nk(6, 1)

    def test_n_not_above_r(self):
        with pytest.raises(ValueError, match="need n > r"):
            msr.MsrParams.from_nk(4, 3)

    def test_inconsistent_derived_rejected(self):
        with pytest.raises(ValueError):
            msr.MsrParams(n=6, k=3, r=4, alpha=3, beta=1, B=6)

    def test_frozen(self, params3):
        with pytest.raises(AttributeError):
            params3.n = 7


class TestBuildEncodingMatrix:
    def test_default_points(self, enc13):
        assert enc13.points == (1, 2, 3, 4, 5, 6)
        assert enc13.psi.to_rows() == EXAMPLE_PSI
        assert enc13.lambdas == EXAMPLE_LAMBDAS
        assert enc13.phi.to_rows() == [row[:2] for row in EXAMPLE_PSI]

    def test_row_accessors_one_based(self, enc13):
        assert enc13.psi_row(6) == [1, 6, 10, 8]
        assert enc13.phi_row(3) == [1, 3]

    def test_custom_points(self, f13, params3):
        pts = (12, 11, 10, 9, 8, 7)
        enc = msr.build_encoding_matrix(params3, f13, points=pts)
        assert enc.points == pts
        # (-x)^2 == x^2, so these mirrored points share the default lambdas.
        assert enc.lambdas == EXAMPLE_LAMBDAS

    def test_field_too_small_no_points(self, params3):
        with pytest.raises(ValueError, match="field too small"):
            msr.build_encoding_matrix(params3, Field(5))

    def test_field_too_small_lambda_image(self, params3):
        # GF(7): squares of nonzero elements take only 3 values, need 6.
        with pytest.raises(ValueError, match="field too small"):
            msr.build_encoding_matrix(params3, Field(7))

    def test_lambda_collision_named_points(self, f13, params3):
        with pytest.raises(ValueError, match="lambda collision") as exc:
            msr.build_encoding_matrix(params3, f13, points=(1, 2, 3, 4, 5, 12))
        assert "12" in str(exc.value) and "1" in str(exc.value)

    def test_degenerate_points_rejected(self, f13, params3):
        with pytest.raises(ValueError, match="degenerate points"):
            msr.build_encoding_matrix(params3, f13, points=(0, 1, 2, 3, 4, 5))

    def test_wrong_point_count(self, f13, params3):
        with pytest.raises(ValueError, match="need 6 points"):
            msr.build_encoding_matrix(params3, f13, points=(1, 2, 3))

    def test_any_r_rows_invertible(self, enc13, f13):
        for subset in itertools.combinations(range(6), 4):
            assert enc13.psi.submatrix_rows(subset).rank() == 4

    def test_any_alpha_rows_of_phi_invertible(self, enc13):
        for subset in itertools.combinations(range(6), 2):
            assert enc13.phi.submatrix_rows(subset).rank() == 2

    def test_larger_field_k4(self):
        p = msr.MsrParams.from_nk(9, 4)
        enc = msr.build_encoding_matrix(p, Field(257))
        assert enc.psi.shape == (9, 6)
        assert len(set(enc.lambdas)) == 9


class TestMessageMatrix:
    def test_worked_example(self, f13, params3):
        m = msr.message_matrix_from_record(EXAMPLE_RECORD, params3, f13)
        assert m.m.to_rows() == EXAMPLE_MESSAGE

    def test_halves_are_symmetric(self, f13, params3, rng):
        rec = random_record(params3, f13, rng)
        m = msr.message_matrix_from_record(rec, params3, f13)
        assert m.s1 == m.s1.transpose()
        assert m.s2 == m.s2.transpose()

    def test_roundtrip(self, f13, params3, rng):
        for _ in range(20):
            rec = random_record(params3, f13, rng)
            m = msr.message_matrix_from_record(rec, params3, f13)
            assert msr.record_from_message_matrix(m) == rec

    def test_wrong_length(self, f13, params3):
        with pytest.raises(ValueError, match="must have 6 symbols"):
            msr.message_matrix_from_record([1, 2, 3], params3, f13)

    def test_asymmetric_rejected(self, f13, params3):
        bad = Matrix.from_rows(f13, [[1, 2], [3, 4], [5, 6], [6, 7]])
        with pytest.raises(ValueError, match="corrupt message matrix"):
            msr.record_from_message_matrix(msr.MessageMatrix(m=bad, params=params3))


class TestEncode:
    def test_worked_example_shares(self, f13, params3, enc13):
        m = msr.message_matrix_from_record(EXAMPLE_RECORD, params3, f13)
        code = msr.encode(m, enc13)
        assert code.c.shape == (6, 2)
        assert code.node_share(1) == [12, 3]
        assert code.node_share(2) == [9, 11]
        assert code.node_share(6) == [2, 1]

    def test_polynomial_form(self, f13, params3, enc13, rng):
        # Share symbols are two polynomial evaluations at the node's point.
        rec = random_record(params3, f13, rng)
        code = msr.encode(msr.message_matrix_from_record(rec, params3, f13), enc13)
        a1, a2, a3, a4, a5, a6 = rec
        for i in range(1, 7):
            first = (a1 + i * a2 + i * i * a4 + i ** 3 * a5) % 13
            second = (a2 + i * a3 + i * i * a5 + i ** 3 * a6) % 13
            assert code.node_share(i) == [first, second]

    def test_share_size_is_alpha(self, f13, params3, enc13):
        m = msr.message_matrix_from_record(EXAMPLE_RECORD, params3, f13)
        assert all(len(msr.encode(m, enc13).node_share(i)) == 2 for i in range(1, 7))


class TestRecover:
    def test_every_k_subset(self, f13, params3, enc13):
        m = msr.message_matrix_from_record(EXAMPLE_RECORD, params3, f13)
        code = msr.encode(m, enc13)
        for subset in itertools.combinations(range(1, 7), 3):
            shares = {i: code.node_share(i) for i in subset}
            got = msr.recover(shares, enc13)
            assert msr.record_from_message_matrix(got) == EXAMPLE_RECORD

    def test_random_records(self, f13, params3, enc13, rng):
        for _ in range(25):
            rec = random_record(params3, f13, rng)
            code = msr.encode(msr.message_matrix_from_record(rec, params3, f13), enc13)
            subset = rng.sample(range(1, 7), 3)
            got = msr.recover({i: code.node_share(i) for i in subset}, enc13)
            assert msr.record_from_message_matrix(got) == rec

    def test_matches_oracle(self, f13, params3, enc13, rng):
        # Structured recovery against the dense linear-system solver.
        for _ in range(25):
            rec = random_record(params3, f13, rng)
            code = msr.encode(msr.message_matrix_from_record(rec, params3, f13), enc13)
            shares = {i: code.node_share(i) for i in rng.sample(range(1, 7), 3)}
            assert msr.recover(shares, enc13).m == msr.recover_oracle(shares, enc13).m

    def test_wrong_share_count(self, enc13):
        with pytest.raises(ValueError, match="need exactly 3"):
            msr.recover({1: [0, 0], 2: [0, 0]}, enc13)
        with pytest.raises(ValueError, match="need exactly 3"):
            msr.recover({i: [0, 0] for i in range(1, 5)}, enc13)

    def test_node_out_of_range(self, enc13):
        with pytest.raises(ValueError, match="out of range"):
            msr.recover({1: [0, 0], 2: [0, 0], 7: [0, 0]}, enc13)

    def test_bad_share_length(self, enc13):
        with pytest.raises(ValueError, match="must have 2 symbols"):
            msr.recover({1: [0, 0], 2: [0], 3: [0, 0]}, enc13)

    def test_oracle_underdetermined(self, enc13):
        with pytest.raises(ValueError, match="underdetermined"):
            msr.recover_oracle({1: [0, 0], 2: [0, 0]}, enc13)

    def test_k4_roundtrip(self, rng):
        p = msr.MsrParams.from_nk(9, 4)
        field = Field(257)
        enc = msr.build_encoding_matrix(p, field)
        rec = random_record(p, field, rng)
        code = msr.encode(msr.message_matrix_from_record(rec, p, field), enc)
        for subset in ((1, 2, 3, 4), (6, 7, 8, 9), (1, 4, 5, 9)):
            got = msr.recover({i: code.node_share(i) for i in subset}, enc)
            assert msr.record_from_message_matrix(got) == rec
            assert got.m == msr.recover_oracle(
                {i: code.node_share(i) for i in subset}, enc).m


class TestRepair:
    def test_helper_symbol_example(self, f13, params3, enc13):
        m = msr.message_matrix_from_record(EXAMPLE_RECORD, params3, f13)
        code = msr.encode(m, enc13)
        # Node 2 helping node 1: [9, 11] . [1, 1] = 20 = 7 mod 13.
        assert msr.repair_helper_symbol(2, code.node_share(2), 1, enc13) == 7

    def test_helper_equals_failed(self, enc13):
        with pytest.raises(ValueError, match="helper must differ"):
            msr.repair_helper_symbol(3, [0, 0], 3, enc13)

    def test_helper_index_range(self, enc13):
        with pytest.raises(ValueError, match="out of range"):
            msr.repair_helper_symbol(7, [0, 0], 1, enc13)
        with pytest.raises(ValueError, match="out of range"):
            msr.repair_helper_symbol(1, [0, 0], 0, enc13)

    def test_helper_share_length(self, enc13):
        with pytest.raises(ValueError, match="helper share"):
            msr.repair_helper_symbol(2, [0], 1, enc13)

    def test_all_failures_all_helper_sets(self, f13, params3, enc13, rng):
        rec = random_record(params3, f13, rng)
        code = msr.encode(msr.message_matrix_from_record(rec, params3, f13), enc13)
        for failed in range(1, 7):
            survivors = [i for i in range(1, 7) if i != failed]
            for helpers in itertools.combinations(survivors, 4):
                symbols = {
                    h: msr.repair_helper_symbol(h, code.node_share(h), failed, enc13)
                    for h in helpers
                }
                assert msr.repair_regenerate(failed, symbols, enc13) == code.node_share(failed)

    def test_regenerate_wrong_helper_count(self, enc13):
        with pytest.raises(ValueError, match="need exactly 4 helper symbols"):
            msr.repair_regenerate(1, {2: 0, 3: 0, 4: 0}, enc13)

    def test_regenerate_helpers_include_failed(self, enc13):
        with pytest.raises(ValueError, match="must not include"):
            msr.repair_regenerate(1, {1: 0, 2: 0, 3: 0, 4: 0}, enc13)

    def test_k4_repair(self, rng):
        p = msr.MsrParams.from_nk(9, 4)
        field = Field(257)
        enc = msr.build_encoding_matrix(p, field)
        rec = random_record(p, field, rng)
        code = msr.encode(msr.message_matrix_from_record(rec, p, field), enc)
        for failed in (1, 5, 9):
            helpers = [i for i in range(1, 10) if i != failed][: p.r]
            symbols = {
                h: msr.repair_helper_symbol(h, code.node_share(h), failed, enc)
                for h in helpers
            }
            assert msr.repair_regenerate(failed, symbols, enc) == code.node_share(failed)

    def test_download_is_one_symbol_per_helper(self, f13, params3, enc13):
        # beta = 1: each helper contributes a single field element.
        sym = msr.repair_helper_symbol(2, [5, 6], 1, enc13)
        assert isinstance(sym, int)
        assert 0 <= sym < 13
