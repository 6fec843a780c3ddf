"""Stall-tolerant scheme variants: birth stamps, per-slot access eras,
acknowledgment-based slot avoidance, and adaptive slot growth.

Allocation stamps every node with a global era.  Dereferences keep each
slot's access era in sync with the clock, so a slot whose era lags a
batch's minimum birth stamp provably never obtained any of that batch's
nodes and can be skipped at retirement.  A slot monopolized by a
stalled thread accumulates unacknowledged insertions; once the balance
passes a threshold, entering threads route around it, and if every slot
saturates the slot table doubles.
"""

from __future__ import annotations

import threading

from .atomics import AtomicHead, AtomicRef, AtomicWord
from .core import compute_adjs, slot_location
from .general import HyalineScheme
from .single import Hyaline1Scheme

DEFAULT_FREQ = 150
DEFAULT_THRESHOLD = 8192


class _Slot:
    __slots__ = ("head", "access", "ack")

    def __init__(self):
        self.head = AtomicHead()
        self.access = AtomicWord(0)
        self.ack = AtomicWord(0)


class _EraMixin:
    """Era clock, allocation stamping, and validated link reads."""

    def _init_eras(self, freq):
        self.freq = freq
        self._era = AtomicWord(0)

    def current_era(self):
        return self._era.load()

    def alloc_init(self, node):
        """Stamp a fresh node's birth era; every freq-th allocation per
        thread advances the global clock."""
        count = getattr(self._tls, "alloc_count", 0) + 1
        self._tls.alloc_count = count
        if count % self.freq == 0:
            self._era.fetch_add(1)
        node.shared = self._era.load()

    def _access_word(self, slot):
        raise NotImplementedError

    def _touch(self, slot, era):
        raise NotImplementedError

    def read_link(self, cell):
        """Validated pointer read: retry until the slot's access era has
        caught up with the global clock observed after the read."""
        slot = getattr(self._tls, "slot", None)
        if slot is None:
            return cell.load()
        access = self._access_word(slot).load()
        while True:
            value = cell.load()
            alloc = self._era.load()
            if access == alloc:
                return value
            access = self._touch(slot, alloc)

    def _skip_slot(self, slot, href, batch):
        if href == 0:
            return True
        return self._access_word(slot).load() < batch.min_birth


class HyalineSScheme(_EraMixin, HyalineScheme):
    """Shared-slot robust variant with adaptive slot-table growth."""

    def __init__(self, slots=8, batch_min=64, reclaim=None, word_bits=64,
                 freq=DEFAULT_FREQ, threshold=DEFAULT_THRESHOLD):
        super().__init__(slots=slots, batch_min=batch_min, reclaim=reclaim,
                         word_bits=word_bits)
        self.kmin = slots
        self.threshold = threshold
        self._init_eras(freq)
        self._kw = AtomicWord(slots)
        self._dir = [AtomicRef(None) for _ in range(word_bits)]
        self._dir[0].store([_Slot() for _ in range(slots)])
        self._heads = None  # all access goes through the directory

    # -- slot directory ----------------------------------------------------

    def _current_k(self):
        return self._kw.load()

    def _slot(self, index):
        j, offset = slot_location(index, self.kmin)
        return self._dir[j].load()[offset]

    def _head(self, index):
        return self._slot(index).head

    def _access_word(self, index):
        return self._slot(index).access

    def _ack_word(self, index):
        return self._slot(index).ack

    def ack_balance(self, index):
        """Unacknowledged insertions currently charged to a slot."""
        return self._ack_word(index).load()

    def _grow(self, k_old):
        """Double the slot count; one installer wins, losers discard."""
        j, _ = slot_location(k_old, self.kmin)
        if j >= len(self._dir):
            raise AssertionError("slot directory exhausted")
        entry = self._dir[j]
        if entry.load() is None:
            entry.compare_exchange(None, [_Slot() for _ in range(k_old)])
        self._kw.compare_exchange(k_old, 2 * k_old)
        return self._kw.load()

    # -- entering: route around saturated slots ----------------------------

    def _pick_slot(self, preferred):
        k = self._kw.load()
        slot = preferred % k
        scanned = 0
        while self._ack_word(slot).load() >= self.threshold:
            slot = (slot + 1) % k
            scanned += 1
            if scanned >= k:
                new_k = self._grow(k)
                slot = k  # first slot of the fresh region
                k = new_k
                scanned = 0
        return slot

    # -- era-aware touch (shared slots need an atomic max) ------------------

    def _touch(self, slot, era):
        return self._access_word(slot).max_update(era)

    # -- acknowledgment bookkeeping -----------------------------------------

    def _after_insert(self, slot, href):
        self._ack_word(slot).fetch_add(href)

    def _after_traverse(self, slot, visited):
        if visited:
            self._ack_word(slot).fetch_add(-visited)

    # -- per-batch wrap constant (slot count varies over time) --------------

    def _seal_adjs(self, ctr, k):
        adjs = compute_adjs(k, self.word_bits)
        # The counter node needs no pointer to itself; its header word
        # stores the batch's own contribution constant instead.
        ctr.nref_node = adjs
        return adjs

    def _batch_adjs(self, ref):
        return ref.nref_node

    def _pad_for_k(self, batch, k):
        # A concurrent growth can outpace a batch sealed for a smaller
        # slot count; top it up instead of failing.
        from .core import DummyNode
        while batch.size < k + 1:
            dummy = DummyNode()
            self.alloc_init(dummy)
            batch.append(dummy)
            self._retired.inc()


class Hyaline1SScheme(_EraMixin, Hyaline1Scheme):
    """Dedicated-slot robust variant.

    Owner-exclusive slots need no acknowledgment machinery and a plain
    store suffices to publish a new access era.
    """

    def __init__(self, slots=8, batch_min=64, reclaim=None, word_bits=64,
                 freq=DEFAULT_FREQ):
        super().__init__(slots=slots, batch_min=batch_min, reclaim=reclaim,
                         word_bits=word_bits)
        self._init_eras(freq)
        self._accesses = [AtomicWord(0) for _ in range(slots)]

    def _access_word(self, slot):
        return self._accesses[slot]

    def _touch(self, slot, era):
        self._access_word(slot).store(era)
        return era
