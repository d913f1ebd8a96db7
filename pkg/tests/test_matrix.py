import numpy as np
import pytest

from rsvdkit import (
    DenseMatrix,
    MatrixOperator,
    ParseError,
    SeededRng,
    SparseMatrixCSR,
    dense_svd_reference,
    frobenius_norm_sq,
    gaussian,
    load_dense_csv,
    load_matrix_market,
    matmul,
    spmm,
)

from _oracles import triple_loop_matmul


class TestSeededRng:
    def test_seed_range_validated(self):
        with pytest.raises(ValueError):
            SeededRng(-1)
        with pytest.raises(ValueError):
            SeededRng(1 << 64)

    def test_equal_seeds_bitwise_equal(self):
        a = SeededRng(42).normal_fill(1001)
        b = SeededRng(42).normal_fill(1001)
        assert np.array_equal(a, b)

    def test_different_seeds_differ(self):
        a = SeededRng(1).normal_fill(64)
        b = SeededRng(2).normal_fill(64)
        assert not np.array_equal(a, b)

    def test_even_splits_reproduce_one_shot_stream(self):
        rng = SeededRng(9)
        split = np.concatenate([rng.normal_fill(4), rng.normal_fill(2)])
        whole = SeededRng(9).normal_fill(6)
        assert np.array_equal(split, whole)

    def test_odd_fill_discards_half_pair(self):
        # 3 samples consume two full pairs; the next fill starts at pair 3
        rng = SeededRng(9)
        rng.normal_fill(3)
        follow = rng.normal_fill(2)
        whole = SeededRng(9).normal_fill(6)
        assert np.array_equal(follow, whole[4:6])


class TestGaussian:
    def test_shape_and_finite(self):
        g = gaussian(3, 2, SeededRng(7))
        assert g.shape == (3, 2)
        assert np.all(np.isfinite(g.data))

    def test_standard_normal_moments(self):
        g = gaussian(1000, 1, SeededRng(1)).data
        assert -0.15 < g.mean() < 0.15
        assert 0.8 < g.var() < 1.2

    def test_deterministic(self):
        a = gaussian(10, 4, SeededRng(3)).data
        b = gaussian(10, 4, SeededRng(3)).data
        assert np.array_equal(a, b)

    @pytest.mark.parametrize("rows,cols", [(0, 3), (3, 0), (0, 0)])
    def test_zero_dimension_rejected(self, rows, cols):
        with pytest.raises(ValueError):
            gaussian(rows, cols, SeededRng(0))


class TestDenseMatrix:
    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            DenseMatrix(np.array([[1.0, np.nan]]))
        with pytest.raises(ValueError):
            DenseMatrix(np.array([[np.inf, 0.0]]))

    def test_immutable(self):
        m = DenseMatrix(np.ones((2, 2)))
        with pytest.raises(ValueError):
            m.data[0, 0] = 5.0

    def test_does_not_freeze_caller_array(self):
        src = np.ones((2, 2))
        DenseMatrix(src)
        src[0, 0] = 3.0  # still writable


class TestMatmul:
    def test_identity(self):
        b = gaussian(3, 4, SeededRng(5))
        out = matmul(np.eye(3), b)
        assert np.array_equal(out.data, b.data)

    def test_hand_case(self):
        out = matmul(np.array([[1.0, 2.0], [3.0, 4.0]]), np.array([[0.0], [1.0]]))
        assert out.data.tolist() == [[2.0], [4.0]]

    def test_against_triple_loop_oracle(self):
        a = gaussian(17, 9, SeededRng(11)).data
        b = gaussian(9, 5, SeededRng(12)).data
        got = matmul(a, b).data
        want = triple_loop_matmul(a, b)
        assert np.max(np.abs(got - want)) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            matmul(np.ones((2, 3)), np.ones((2, 2)))

    def test_bitwise_deterministic(self):
        a = gaussian(20, 30, SeededRng(13)).data
        b = gaussian(30, 8, SeededRng(14)).data
        assert np.array_equal(matmul(a, b).data, matmul(a, b).data)


def _random_csr(n, d, seed, density=0.1):
    rng = SeededRng(seed)
    vals = rng.normal_fill(n * d)
    gate = rng.normal_fill(n * d)
    cut = np.quantile(gate, density)
    ri, ci, vv = [], [], []
    for idx in range(n * d):
        if gate[idx] < cut:
            ri.append(idx // d)
            ci.append(idx % d)
            vv.append(vals[idx])
    return SparseMatrixCSR.from_coo(n, d, ri, ci, vv)


class TestSparse:
    def test_identity(self):
        eye = SparseMatrixCSR.from_coo(3, 3, [0, 1, 2], [0, 1, 2], [1.0, 1.0, 1.0])
        b = gaussian(3, 5, SeededRng(2))
        assert np.array_equal(spmm(eye, b).data, b.data)

    def test_hand_case(self):
        a = SparseMatrixCSR.from_coo(2, 2, [0], [1], [2.0])
        out = spmm(a, np.array([[1.0], [1.0]]))
        assert out.data.tolist() == [[2.0], [0.0]]

    def test_against_densify_oracle(self):
        sp = _random_csr(30, 20, 21)
        b = gaussian(20, 6, SeededRng(22)).data
        want = matmul(sp.toarray(), b).data
        got = spmm(sp, b).data
        assert np.max(np.abs(got - want)) < 1e-12

    def test_transpose_against_densify_oracle(self):
        sp = _random_csr(30, 20, 23)
        b = gaussian(30, 4, SeededRng(24)).data
        want = matmul(sp.toarray().T, b).data
        got = spmm(sp, b, transpose_A=True).data
        assert np.max(np.abs(got - want)) < 1e-12

    def test_dimension_mismatch(self):
        sp = _random_csr(5, 4, 25)
        with pytest.raises(ValueError):
            spmm(sp, np.ones((5, 2)))
        with pytest.raises(ValueError):
            spmm(sp, np.ones((4, 2)), transpose_A=True)

    def test_invariants_enforced(self):
        with pytest.raises(ValueError):  # decreasing row_ptr
            SparseMatrixCSR(2, 2, [0, 2, 1], [0, 1], [1.0, 1.0])
        with pytest.raises(ValueError):  # unsorted columns within a row
            SparseMatrixCSR(1, 3, [0, 2], [2, 0], [1.0, 1.0])
        with pytest.raises(ValueError):  # explicit zero value
            SparseMatrixCSR(1, 2, [0, 1], [0], [0.0])
        with pytest.raises(ValueError):  # column out of bounds
            SparseMatrixCSR(1, 2, [0, 1], [2], [1.0])

    def test_duplicate_coordinates_summed_and_zero_dropped(self):
        sp = SparseMatrixCSR.from_coo(
            2, 2, [0, 0, 1, 1], [0, 0, 1, 1], [1.5, 2.0, 1.0, -1.0]
        )
        assert sp.nnz == 1
        assert sp.toarray().tolist() == [[3.5, 0.0], [0.0, 0.0]]


class TestMatrixMarket:
    def _write(self, tmp_path, text):
        path = tmp_path / "m.mtx"
        path.write_text(text)
        return str(path)

    def test_basic_real_general(self, tmp_path):
        path = self._write(
            tmp_path,
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 3.5\n",
        )
        op = load_matrix_market(path)
        assert op.is_sparse
        assert op.densify().data.tolist() == [[3.5, 0.0], [0.0, 0.0]]

    def test_symmetric_expansion(self, tmp_path):
        path = self._write(
            tmp_path,
            "%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n2 1 4\n",
        )
        dense = load_matrix_market(path).densify().data
        assert dense[1, 0] == 4.0 and dense[0, 1] == 4.0

    def test_pattern_entries_become_one(self, tmp_path):
        path = self._write(
            tmp_path,
            "%%MatrixMarket matrix coordinate pattern general\n2 2 2\n1 2\n2 1\n",
        )
        dense = load_matrix_market(path).densify().data
        assert dense.tolist() == [[0.0, 1.0], [1.0, 0.0]]

    def test_integer_field(self, tmp_path):
        path = self._write(
            tmp_path,
            "%%MatrixMarket matrix coordinate integer general\n1 2 1\n1 2 7\n",
        )
        assert load_matrix_market(path).densify().data.tolist() == [[0.0, 7.0]]

    def test_duplicates_summed(self, tmp_path):
        path = self._write(
            tmp_path,
            "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n1 1 2.0\n",
        )
        assert load_matrix_market(path).densify().data[0, 0] == 3.0

    def test_out_of_bounds_entry_names_line(self, tmp_path):
        path = self._write(
            tmp_path,
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n",
        )
        with pytest.raises(ParseError) as err:
            load_matrix_market(path)
        assert err.value.line == 3
        assert "line 3" in str(err.value)

    def test_malformed_header_names_line(self, tmp_path):
        path = self._write(tmp_path, "%%NotMatrixMarket nope\n1 1 0\n")
        with pytest.raises(ParseError) as err:
            load_matrix_market(path)
        assert err.value.line == 1

    def test_array_format_rejected(self, tmp_path):
        path = self._write(
            tmp_path, "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n"
        )
        with pytest.raises(ParseError):
            load_matrix_market(path)

    def test_comments_and_blank_lines_ignored(self, tmp_path):
        path = self._write(
            tmp_path,
            "%%MatrixMarket matrix coordinate real general\n"
            "% a comment\n\n2 2 1\n% another\n2 2 -1.5\n",
        )
        assert load_matrix_market(path).densify().data[1, 1] == -1.5


class TestDenseCsv:
    def test_basic(self, tmp_path):
        path = tmp_path / "a.csv"
        path.write_text("1,2\n3,4\n")
        assert load_dense_csv(str(path)).data.tolist() == [[1.0, 2.0], [3.0, 4.0]]

    def test_ragged_row_names_row(self, tmp_path):
        path = tmp_path / "a.csv"
        path.write_text("1,2\n3\n")
        with pytest.raises(ParseError) as err:
            load_dense_csv(str(path))
        assert err.value.line == 2

    def test_non_numeric_cell_names_position(self, tmp_path):
        path = tmp_path / "a.csv"
        path.write_text("a,2\n")
        with pytest.raises(ParseError) as err:
            load_dense_csv(str(path))
        assert "(1, 1)" in str(err.value)

    def test_header_skip_flag(self, tmp_path):
        path = tmp_path / "a.csv"
        path.write_text("x,y\n1,2\n")
        assert load_dense_csv(str(path), skip_header=True).data.tolist() == [[1.0, 2.0]]


class TestFrobenius:
    def test_hand_case(self):
        assert frobenius_norm_sq(np.diag([3.0, 2.0, 1.0])) == 14.0

    def test_zero(self):
        assert frobenius_norm_sq(np.zeros((4, 3))) == 0.0

    def test_matches_singular_value_identity(self):
        a = gaussian(20, 12, SeededRng(31))
        sv = dense_svd_reference(a).singular_values
        got = frobenius_norm_sq(a)
        want = float(np.sum(sv**2))
        assert abs(got - want) / want < 1e-10

    def test_sparse_operator(self):
        sp = _random_csr(12, 9, 33)
        got = frobenius_norm_sq(MatrixOperator(sp))
        assert abs(got - float(np.sum(sp.toarray() ** 2))) < 1e-12
