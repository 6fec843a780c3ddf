"""Counter algebra, batch assembly, and slot-directory arithmetic."""

import threading

import pytest
from hypothesis import given, strategies as st

from hyaline.core import (
    LocalBatch,
    ReclaimNode,
    compute_adjs,
    seal_batch,
    slot_location,
    word_mask,
    wrap_add,
)

POW2 = st.integers(min_value=0, max_value=16).map(lambda e: 1 << e)


class TestComputeAdjs:
    @given(k=POW2, bits=st.sampled_from([32, 64]))
    def test_k_contributions_wrap_to_zero(self, k, bits):
        adjs = compute_adjs(k, bits)
        assert (k * adjs) % (1 << bits) == 0

    @given(k=POW2, bits=st.sampled_from([32, 64]))
    def test_fewer_than_k_contributions_never_wrap(self, k, bits):
        adjs = compute_adjs(k, bits)
        for m in {1, 2, k - 1} & set(range(1, k)):
            assert (m * adjs) % (1 << bits) != 0

    def test_known_values(self):
        assert compute_adjs(1, 64) == 0
        assert compute_adjs(8, 64) == 1 << 61
        assert compute_adjs(2, 32) == 1 << 31

    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValueError):
            compute_adjs(3, 64)
        with pytest.raises(ValueError):
            compute_adjs(0, 64)

    def test_rejects_odd_word_width(self):
        with pytest.raises(ValueError):
            compute_adjs(4, 48)


class TestWrapAdd:
    @given(a=st.integers(min_value=0, max_value=(1 << 64) - 1),
           b=st.integers(min_value=0, max_value=(1 << 64) - 1))
    def test_modular(self, a, b):
        assert wrap_add(a, b, 64) == (a + b) % (1 << 64)

    def test_minus_one_is_mask(self):
        assert wrap_add(0, word_mask(64), 64) == word_mask(64)
        assert wrap_add(1, word_mask(64), 64) == 0


class TestSlotLocation:
    def test_entry_zero_covers_first_kmin(self):
        for s in range(8):
            assert slot_location(s, 8) == (0, s)

    def test_entry_boundaries(self):
        assert slot_location(8, 8) == (1, 0)
        assert slot_location(15, 8) == (1, 7)
        assert slot_location(16, 8) == (2, 0)
        assert slot_location(31, 8) == (2, 15)
        assert slot_location(32, 8) == (3, 0)

    @given(kexp=st.integers(min_value=0, max_value=4),
           slot=st.integers(min_value=0, max_value=1023))
    def test_bijective_and_sized(self, kexp, slot):
        kmin = 1 << kexp
        j, off = slot_location(slot, kmin)
        size = kmin if j == 0 else kmin * (1 << (j - 1))
        assert 0 <= off < size
        base = 0 if j == 0 else kmin * (1 << (j - 1))
        assert base + off == slot


class TestLocalBatch:
    def test_links_form_cycle_through_counter(self):
        batch = LocalBatch()
        nodes = [ReclaimNode() for _ in range(5)]
        for n in nodes:
            batch.append(n)
        assert batch.size == 5
        ctr = batch.nref_node
        assert ctr is nodes[0]
        # Walk the cycle: counter -> newest ... oldest-listed -> counter.
        seen = []
        node = ctr.batch_next
        while node is not ctr:
            seen.append(node)
            assert node.nref_node is ctr
            node = node.batch_next
        assert seen == [nodes[4], nodes[3], nodes[2], nodes[1]]

    def test_min_birth_tracks_integer_stamps(self):
        batch = LocalBatch()
        for stamp in (7, 3, 9):
            node = ReclaimNode()
            node.shared = stamp
            batch.append(node)
        assert batch.min_birth == 3

    def test_seal_zeroes_counter_and_adds_lock(self):
        batch = LocalBatch()
        for _ in range(3):
            batch.append(ReclaimNode())
        ctr = seal_batch(batch)
        assert ctr.shared == 0
        assert isinstance(ctr.ctr_lock, type(threading.Lock()))
