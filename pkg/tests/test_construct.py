import random

import pytest

from oracles import message_slice
from smoothldc import capacity
from smoothldc.codespec import (
    CodeSpecError,
    content_hash,
    dump_document,
    from_document,
    load_document,
    to_document,
)
from smoothldc.construct import (
    BudgetExceeded,
    DecodeFailure,
    build_sldc,
    decode,
    digits_to_index,
    encode,
    encode_symbol,
    enumerate_supersets,
    index_to_digits,
    load_fixture,
    random_message,
)
from smoothldc.gf2 import BitVector, rank
from smoothldc.verify import check_correctness, check_smoothness, check_universality


class TestIndexing:
    def test_digit_roundtrip(self):
        for n, k in [(2, 3), (3, 2), (4, 3)]:
            for idx in range(n**k):
                assert digits_to_index(index_to_digits(idx, n, k), n) == idx

    def test_lexicographic(self):
        assert index_to_digits(0, 3, 3) == (0, 0, 0)
        assert index_to_digits(5, 3, 3) == (0, 1, 2)
        assert index_to_digits(26, 3, 3) == (2, 2, 2)


class TestBuild:
    def test_2_2_shape(self):
        code = build_sldc(2, 2)
        p = code.params
        assert (p.M, p.Lw, p.Lx) == (4, 4, 3)
        # groups by digit sum parity: {00, 11} vs {01, 10}
        assert code.groups == (0, 1, 1, 0)

    def test_2_3_shape(self):
        code = build_sldc(2, 3)
        p = code.params
        assert (p.M, p.Lw, p.Lx) == (8, 8, 7)
        assert all(len(sup.sets) == 4 for sup in code.supersets)

    def test_3_3_shape(self):
        code = build_sldc(3, 3)
        p = code.params
        assert (p.M, p.Lw, p.Lx) == (27, 54, 26)
        assert all(len(sup.sets) == 9 for sup in code.supersets)

    def test_exactly_one_zero_row_per_symbol(self, codes):
        for n, k in [(2, 2), (2, 3), (3, 2)]:
            code = codes[(n, k)]
            for m in range(code.params.M):
                gen = code.symbol_gens[m]
                zero_rows = [r for r in range(gen.rows) if gen.row_is_zero(r)]
                assert len(zero_rows) == 1
                # the zero row sits where every digit of gamma cancels p
                p_digits = code.digits[m]
                expected = digits_to_index([(-d) % n for d in p_digits], n)
                assert zero_rows == [expected]
                assert rank(gen) == code.params.Lx

    def test_symbol_rate_is_capacity(self, codes):
        for n, k in [(2, 1), (2, 2), (2, 3), (3, 2), (3, 3), (4, 2)]:
            code = codes[(n, k)]
            rate, _ = capacity.symbol_and_code_rate(code.params)
            assert rate == capacity.capacity_uldc(n, k)

    def test_size_budget(self):
        with pytest.raises(BudgetExceeded, match="4096"):
            build_sldc(2, 13)

    def test_rejects_single_database(self):
        with pytest.raises(ValueError):
            build_sldc(1, 3)


class TestSupersets:
    def test_2_2_first_message(self):
        sups = enumerate_supersets(2, 2)
        assert sups[0].sets == ((0, 2), (1, 3))
        assert sups[1].sets == ((0, 1), (2, 3))

    def test_partition_property(self):
        # every symbol appears exactly once per superset
        for n, k in [(2, 3), (3, 2), (3, 3)]:
            for sup in enumerate_supersets(n, k):
                seen = [m for s in sup.sets for m in s]
                assert sorted(seen) == list(range(n**k))

    def test_single_source_symbol(self):
        sups = enumerate_supersets(5, 1)
        assert len(sups) == 1
        assert sups[0].sets == ((0, 1, 2, 3, 4),)

    def test_transversal_of_groups(self, codes):
        code = codes[(3, 3)]
        for sup in code.supersets:
            for members in sup.sets:
                assert sorted(code.groups[m] for m in members) == [0, 1, 2]


class TestEncode:
    def test_zero_message_gives_zero_symbols(self, codes):
        code = codes[(2, 3)]
        msg = BitVector.zeros(code.params.K * code.params.Lw)
        for value in encode(code, msg):
            assert not value.any()
            assert value.length == 7

    def test_length_four_table_evaluation(self, codes):
        # first source symbol = 1000..., second all zero
        code = codes["eq28"]
        msg = BitVector.from_bits([1, 0, 0, 0, 0, 0, 0, 0])
        values = [v.to_bits().tolist() for v in encode(code, msg)]
        assert values == [[0, 0, 0], [1, 0, 0], [1, 0, 0], [0, 0, 0]]

    def test_message_length_checked(self, codes):
        with pytest.raises(ValueError):
            encode(codes[(2, 2)], BitVector.zeros(7))


class TestDecode:
    def test_roundtrip_grid(self):
        rng = random.Random(20240)
        for n in (2, 3):
            for k in (1, 2, 3):
                code = build_sldc(n, k)
                msg = random_message(code, rng)
                coded = encode(code, msg)
                for kk in range(1, k + 1):
                    for si, members in enumerate(code.supersets[kk - 1].sets):
                        got = decode(code, kk, si, [coded[m] for m in members])
                        assert list(got.to_bits()) == message_slice(code, msg, kk)

    def test_zero_symbols_give_zero_message(self, codes):
        code = codes[(2, 2)]
        zeros = [BitVector.zeros(3)] * 2
        assert not decode(code, 1, 0, zeros).any()

    def test_replicated_code_pairwise_xor(self, codes):
        # W_1 from the pair (X2, X5) is their XOR
        code = codes["fig1"]
        rng = random.Random(5)
        msg = random_message(code, rng)
        coded = encode(code, msg)
        set_index = code.supersets[0].sets.index((1, 4))
        got = decode(code, 1, set_index, [coded[1], coded[4]])
        assert got == coded[1] ^ coded[4]
        assert list(got.to_bits()) == message_slice(code, msg, 1)

    def test_inconsistent_values_detected(self, codes):
        # shared rows across the two symbols make single-bit tampering visible
        code = codes["fig2"]
        msg = random_message(code, rng := random.Random(9))
        coded = encode(code, msg)
        members = code.supersets[0].sets[0]
        values = [coded[m] for m in members]
        flip = BitVector.from_bits([0, 0, 1, 0, 0, 0])
        values[1] = values[1] ^ flip
        with pytest.raises(DecodeFailure):
            decode(code, 1, 0, values)


class TestFixtures:
    def test_unknown_name_lists_valid_ones(self):
        with pytest.raises(CodeSpecError, match="fig1"):
            load_fixture("nope")

    def test_fixture_battery(self, codes):
        from fractions import Fraction

        assert check_smoothness(codes["fig1"])
        assert check_universality(codes["intro_nonsmooth"])
        assert not check_smoothness(codes["intro_nonsmooth"])
        assert capacity.symbol_and_code_rate(codes["fig2"].params)[0] == Fraction(4, 6)

    def test_structural_equivalence_of_table_and_construction(self, codes):
        # the published length-4 table matches the canonical build up to
        # sub-symbol relabeling: same parameters, same structure profile
        table = codes["eq28"]
        built = codes[(2, 2)]
        assert table.params == built.params
        for code in (table, built):
            assert check_correctness(code).passed
            assert check_smoothness(code)
            assert check_universality(code)
        assert [rank(g) for g in table.symbol_gens] == [rank(g) for g in built.symbol_gens]
        assert sorted(table.groups) == sorted(built.groups)
        assert [len(s.sets) for s in table.supersets] == [len(s.sets) for s in built.supersets]

    def test_fig4_matches_two_database_layout(self, codes):
        code = codes["fig4"]
        assert code.params.Lw == 8 and code.params.Lx == 7
        assert code.groups == (0, 0, 0, 0, 1, 1, 1, 1)
        assert check_correctness(code).passed


class TestDocuments:
    def test_roundtrip(self, codes, tmp_path):
        code = codes[(2, 2)]
        doc = to_document(code)
        data = dump_document(doc)
        (tmp_path / "code.json").write_bytes(data)
        loaded = from_document(load_document((tmp_path / "code.json").read_bytes()))
        assert loaded.params == code.params
        assert loaded.groups == code.groups
        assert loaded.digits == code.digits
        assert [s.sets for s in loaded.supersets] == [s.sets for s in code.supersets]
        assert all(
            loaded.symbol_gens[m] == code.symbol_gens[m] for m in range(code.params.M)
        )

    def test_hash_covers_body(self, codes):
        doc = to_document(codes[(2, 2)])
        assert doc["content_hash"] == content_hash(doc)
        tampered = dict(doc)
        tampered["params"] = dict(doc["params"], Lx=2)
        assert content_hash(tampered) != doc["content_hash"]

    def test_tampered_document_rejected(self, codes):
        doc = to_document(codes[(2, 2)])
        doc["supersets"] = [list(reversed(s)) for s in doc["supersets"]]
        with pytest.raises(CodeSpecError, match="content_hash"):
            from_document(doc)

    def test_dump_deterministic(self, codes):
        code = codes[(2, 3)]
        assert dump_document(to_document(code)) == dump_document(to_document(code))

    def test_rebuild_gives_identical_document(self):
        assert to_document(build_sldc(3, 2)) == to_document(build_sldc(3, 2))
