import pytest
from hypothesis import given, strategies as st

from ncswitch import gf
from ncswitch.registers import RegisterBank, StoreOutcome, store_row

E1, E2, PAR = b"\x01\x00", b"\x00\x01", b"\x01\x01"


def test_new_row_then_duplicate():
    bank = RegisterBank(1, 2)
    assert store_row(bank, 0, E1, b"a") is StoreOutcome.NEW_ROW
    assert bank.slot(0).received_count == 1
    assert store_row(bank, 0, E1, b"a") is StoreOutcome.DUPLICATE_RANK
    assert store_row(bank, 0, PAR, b"x") is StoreOutcome.NEW_ROW
    assert bank.slot(0).complete
    assert store_row(bank, 0, E2, b"b") is StoreOutcome.DUPLICATE_RANK


def test_eviction_with_two_slots():
    bank = RegisterBank(1, 2, slots=2)
    store_row(bank, 0, E1, b"a")
    assert store_row(bank, 2, E1, b"c") is StoreOutcome.EVICTED
    assert bank.slot(0) is None
    assert bank.evictions == [(0, False)]
    assert bank.undelivered_evictions == 1
    # the evicted batch can never come back
    assert store_row(bank, 0, E2, b"b") is StoreOutcome.ALREADY_DELIVERED


def test_delivered_slot_reports_late():
    bank = RegisterBank(1, 2)
    store_row(bank, 3, E1, b"a")
    bank.slot(3).delivered = True
    assert store_row(bank, 3, E2, b"b") is StoreOutcome.ALREADY_DELIVERED


def test_far_ahead_batch_moves_the_window():
    bank = RegisterBank(1, 1, slots=4)
    store_row(bank, 0, b"\x01", b"a")
    store_row(bank, 10, b"\x01", b"k")
    assert bank.head_batch == 7
    assert store_row(bank, 5, b"\x01", b"f") is StoreOutcome.ALREADY_DELIVERED


def test_width_mismatch_is_a_shape_error():
    with pytest.raises(gf.ShapeError):
        RegisterBank(1, 2).store_row(0, b"\x01", b"a")
    with pytest.raises(ValueError):
        RegisterBank(1, 2, slots=0)


@given(st.lists(st.tuples(st.integers(0, 40), st.sampled_from([E1, E2, PAR])), max_size=80))
def test_slot_holds_one_batch_and_rows_stay_independent(ops):
    bank = RegisterBank(1, 2, slots=4)
    for batch, coeffs in ops:
        bank.store_row(batch, coeffs, b"s")
        for i, slot in enumerate(bank._slots):
            if slot is None:
                continue
            assert slot.batch_number % 4 == i
            assert gf.rank([c for c, _ in slot.rows]) == len(slot.rows) <= 2
