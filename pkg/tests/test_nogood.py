import pytest

from guarded_match.nogood import (
    ROOT_ID,
    AncestorArray,
    ConflictKind,
    MaskAccumulator,
    NogoodRecord,
    NogoodStore,
    bit,
    conflict_mask,
    encode_nogood,
    fixed_mask_from_deadend,
    fold_deadend_mask,
    mask_of,
    matches_record,
    positions,
)


def _ancestors(*ids):
    anc = AncestorArray(len(ids))
    for depth, node_id in enumerate(ids, start=1):
        anc.set(depth, node_id)
    return anc


def test_positions_and_mask_of():
    assert list(positions(0b10110)) == [1, 2, 4]
    assert mask_of([1, 2, 4]) == 0b10110
    assert list(positions(0)) == []


def test_encode_uses_shortest_enclosing_prefix():
    anc = _ancestors(11, 12, 13)
    rec = encode_nogood(0b101, anc)
    assert rec == NogoodRecord(13, 3, 0b101)
    assert encode_nogood(0, anc) == NogoodRecord(ROOT_ID, 0, 0)
    assert encode_nogood(0b1, anc) == NogoodRecord(11, 1, 0b1)


def test_record_matches_only_descendants():
    rec = encode_nogood(0b11, _ancestors(11, 12, 13))
    assert matches_record(rec, _ancestors(11, 12, 20), 3)
    assert not matches_record(rec, _ancestors(11, 21, 22), 3)
    # the prefix is longer than the current partial embedding
    assert not matches_record(rec, _ancestors(11, 12, 20), 1)


def test_empty_nogood_matches_everywhere():
    rec = encode_nogood(0, _ancestors(5))
    assert matches_record(rec, _ancestors(99, 98), 0)
    assert matches_record(rec, _ancestors(99, 98), 2)


def test_conflict_masks():
    assert conflict_mask(ConflictKind.INJECTIVITY, 4, other=1) == 0b10010
    image = {7: 0, 9: 2}
    mask = conflict_mask(ConflictKind.RESERVATION, 3, guard=(7, 9), image=image)
    assert mask == 0b1101
    rec = NogoodRecord(1, 1, 0b1)
    assert conflict_mask(ConflictKind.NOGOOD, 2, record=rec) == 0b101
    assert conflict_mask(ConflictKind.NO_CANDIDATE, 2, bound=0b011) == 0b011


def test_accumulator_unions_and_short_circuits():
    acc = MaskAccumulator(2)
    assert not acc.add(0b110)
    assert not acc.add(0b101)
    assert acc.fold(0b1000) == 0b1011
    assert acc.add(0b001)
    assert acc.add(0b010)
    assert acc.fold(0b1000) == 0b001


def test_fold_helpers():
    acc = MaskAccumulator(1)
    assert fold_deadend_mask(acc, 0b11, 1, 0) == 0b01
    assert fold_deadend_mask(acc, None, 1, 0b100) == 0b101
    with pytest.raises(ValueError):
        fold_deadend_mask(acc, 0b1, 2, 0)
    assert fixed_mask_from_deadend(0b1110, 2) == 0b1010
    assert bit(5) == 32


def test_store_overwrites_slots_and_audits():
    store = NogoodStore(audit=True)
    store.record_nv((2, 6), NogoodRecord(0, 0, 0), ())
    store.record_nv((2, 6), NogoodRecord(3, 1, 1), ((0, 0),))
    store.record_ne((2, 7, 4, 1), NogoodRecord(0, 0, 0), ())
    assert store.nv[(2, 6)] == NogoodRecord(3, 1, 1)
    assert len(store.audit_log) == 3
    assert store.audit_log[1].assignments == ((0, 0),)


def test_check_contained():
    store = NogoodStore()
    store.record_nv((2, 6), NogoodRecord(4, 1, 1), ((0, 0),))
    store.check_contained("nv", (2, 6), [0, 3, -1], 2)
    assert store.encoding_checks == 1
    with pytest.raises(AssertionError):
        store.check_contained("nv", (2, 6), [1, 3, -1], 2)
    # unknown slots are skipped
    store.check_contained("ne", (0, 0, 1, 1), [1, 3, -1], 2)
    assert store.encoding_checks == 2
