import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from smoothldc.gf2 import (
    BitMatrix,
    BitVector,
    column_mask,
    express_unit_vector,
    mat_vec_mul,
    rank,
    restrict_columns,
    row_reduce_augmented,
    stack,
)

bit_rows = st.integers(min_value=0, max_value=7)
bit_cols = st.integers(min_value=1, max_value=130)


def random_matrix(draw, rows=None, cols=None):
    r = draw(bit_rows) if rows is None else rows
    c = draw(bit_cols) if cols is None else cols
    bits = draw(
        st.lists(
            st.lists(st.integers(0, 1), min_size=c, max_size=c),
            min_size=r,
            max_size=r,
        )
    )
    return BitMatrix.from_bits(np.array(bits, dtype=np.uint8).reshape(r, c))


class TestRank:
    def test_identity(self):
        assert rank(BitMatrix.identity(3)) == 3

    @pytest.mark.parametrize("shape", [(1, 1), (3, 5), (5, 3), (0, 4), (4, 0)])
    def test_zero_matrix(self, shape):
        assert rank(BitMatrix.zeros(*shape)) == 0

    def test_dependent_rows(self):
        # third row is the sum of the first two
        m = BitMatrix.from_bits([[1, 1, 0], [0, 1, 1], [1, 0, 1]])
        assert rank(m) == 2

    def test_wide_matrix_crossing_word_boundary(self):
        bits = np.zeros((2, 100), dtype=np.uint8)
        bits[0, 63] = 1
        bits[1, 64] = 1
        assert rank(BitMatrix.from_bits(bits)) == 2

    @given(st.data())
    def test_invariant_under_row_permutation_and_xor(self, data):
        m = random_matrix(data.draw)
        if m.rows < 2:
            return
        perm = data.draw(st.permutations(range(m.rows)))
        bits = m.to_bits()
        permuted = BitMatrix.from_bits(bits[list(perm)])
        assert rank(permuted) == rank(m)
        i, j = data.draw(st.tuples(st.integers(0, m.rows - 1), st.integers(0, m.rows - 1)))
        if i != j:
            xored = bits.copy()
            xored[i] ^= xored[j]
            assert rank(BitMatrix.from_bits(xored)) == rank(m)

    @given(st.data())
    def test_subadditive_under_stacking(self, data):
        cols = data.draw(bit_cols)
        a = random_matrix(data.draw, cols=cols)
        b = random_matrix(data.draw, cols=cols)
        assert rank(stack(a, b)) <= rank(a) + rank(b)


class TestRestrictColumns:
    def test_keep_all_is_identity(self):
        m = BitMatrix.from_bits([[1, 0, 1], [0, 1, 1]])
        assert restrict_columns(m, range(3)) == m

    def test_keep_none(self):
        m = BitMatrix.from_bits([[1, 0, 1], [0, 1, 1]])
        out = restrict_columns(m, ())
        assert (out.rows, out.cols) == (2, 0)
        assert rank(out) == 0

    def test_projection(self):
        m = BitMatrix.from_bits([[1, 0, 1], [0, 1, 1]])
        out = restrict_columns(m, {0, 2})
        assert out == BitMatrix.from_bits([[1, 1], [0, 1]])

    def test_out_of_range(self):
        m = BitMatrix.from_bits([[1, 0, 1]])
        with pytest.raises(IndexError):
            restrict_columns(m, {3})

    @given(st.data())
    def test_keeping_all_preserves_rank(self, data):
        m = random_matrix(data.draw)
        assert rank(restrict_columns(m, range(m.cols))) == rank(m)

    @given(st.data())
    def test_masking_matches_physical_restriction(self, data):
        m = random_matrix(data.draw)
        keep = data.draw(st.sets(st.integers(0, m.cols - 1)))
        masked_words = m.words() & column_mask(m.cols, keep)[np.newaxis, :]
        masked = BitMatrix(m.rows, m.cols, masked_words)
        assert rank(masked) == rank(restrict_columns(m, keep))


class TestMatVec:
    def test_identity(self):
        v = BitVector.from_bits([1, 0, 1, 1])
        assert mat_vec_mul(BitMatrix.identity(4), v) == v

    def test_zero_vector(self):
        m = BitMatrix.from_bits([[1, 1, 0], [0, 1, 1]])
        assert mat_vec_mul(m, BitVector.zeros(3)) == BitVector.zeros(2)

    def test_small_product(self):
        m = BitMatrix.from_bits([[1, 1, 0], [0, 1, 1]])
        v = BitVector.from_bits([1, 0, 1])
        assert mat_vec_mul(m, v) == BitVector.from_bits([1, 1])

    def test_dimension_mismatch(self):
        m = BitMatrix.from_bits([[1, 1, 0]])
        with pytest.raises(ValueError):
            mat_vec_mul(m, BitVector.from_bits([1, 0]))

    @given(st.data())
    def test_linearity(self, data):
        m = random_matrix(data.draw)
        make = lambda: BitVector.from_bits(
            data.draw(st.lists(st.integers(0, 1), min_size=m.cols, max_size=m.cols))
        )
        u, v = make(), make()
        assert mat_vec_mul(m, u ^ v) == mat_vec_mul(m, u) ^ mat_vec_mul(m, v)


class TestBitPacking:
    def test_msb_first_bytes(self):
        v = BitVector.from_bits([1, 0, 0, 0, 0, 0, 0, 1, 1])
        assert v.to_bytes() == bytes([0b10000001, 0b10000000])
        assert v.to_hex() == "8180"

    def test_trailing_pad_bits_zeroed(self):
        v = BitVector.from_bytes(b"\xff\xff", 9)
        assert v.to_bytes() == bytes([0xFF, 0x80])

    @given(st.lists(st.integers(0, 1), max_size=200))
    def test_roundtrip_bits_bytes_hex(self, bits):
        v = BitVector.from_bits(bits)
        assert list(v.to_bits()) == bits
        assert BitVector.from_bytes(v.to_bytes(), len(bits)) == v
        assert BitVector.from_hex(v.to_hex(), len(bits)) == v

    def test_indexing_and_xor(self):
        v = BitVector.from_bits([1, 0, 1])
        assert (v[0], v[1], v[2]) == (1, 0, 1)
        assert v ^ v == BitVector.zeros(3)
        with pytest.raises(IndexError):
            v[3]


class TestRowReduce:
    def test_consistent_solve(self):
        m = BitMatrix.from_bits([[1, 1, 0], [0, 1, 1], [1, 0, 1]])
        rhs = BitVector.from_bits([1, 1, 0])
        red = row_reduce_augmented(m, rhs)
        assert red.consistent

    def test_inconsistent_detected(self):
        m = BitMatrix.from_bits([[1, 1, 0], [1, 1, 0]])
        rhs = BitVector.from_bits([1, 0])
        assert not row_reduce_augmented(m, rhs).consistent

    def test_express_unit_vector(self):
        # rows span e0 and e1 but not e2
        m = BitMatrix.from_bits([[1, 1, 0], [0, 1, 0]])
        rhs = BitVector.from_bits([1, 1])
        red = row_reduce_augmented(m, rhs)
        assert express_unit_vector(red, 0) == 0  # e0 = row0 + row1, value 1^1
        assert express_unit_vector(red, 1) == 1
        assert express_unit_vector(red, 2) is None
