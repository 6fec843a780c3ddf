"""The general multi-slot reclamation scheme (double-width head atomics).

Any number of threads may share a slot.  Entering bumps the slot's
active count while snapshotting its list head; retirement pushes one
batch node per occupied slot; leaving decrements the count and settles
reference-counter debts for every batch retired since the snapshot.
"""

from __future__ import annotations

import threading

from . import atomics
from .atomics import AtomicHead
from .base import ReclamationScheme
from .core import (
    DummyNode,
    LocalBatch,
    compute_adjs,
    seal_batch,
    word_mask,
    wrap_add,
    WORD_BITS_DEFAULT,
)


class Handle:
    """Per-operation ticket: the slot entered and its head-link snapshot.

    While the handle is live, no batch at or newer than the snapshot in
    that slot can be reclaimed.
    """

    __slots__ = ("slot", "snapshot")

    def __init__(self, slot, snapshot):
        self.slot = slot
        self.snapshot = snapshot


class HyalineScheme(ReclamationScheme):
    """General scheme over a fixed power-of-two number of shared slots."""

    def __init__(self, slots=8, batch_min=64, reclaim=None,
                 word_bits=WORD_BITS_DEFAULT):
        super().__init__(reclaim)
        if slots < 1 or slots & (slots - 1):
            raise ValueError("slot count must be a positive power of two")
        self.word_bits = word_bits
        self.mask = word_mask(word_bits)
        self.batch_min = batch_min
        self._k = slots
        self.adjs = compute_adjs(slots, word_bits)
        self._heads = [AtomicHead() for _ in range(slots)]

    # -- slot plumbing (overridden by the adaptive variant) ----------------

    def _current_k(self):
        return self._k

    def _head(self, slot):
        return self._heads[slot]

    def _preferred_slot(self):
        return self._thread_index() % self._current_k()

    def _pick_slot(self, preferred):
        return preferred

    # -- enter / leave / trim ----------------------------------------------

    def enter(self, slot=None):
        preferred = self._preferred_slot() if slot is None else slot
        slot = self._pick_slot(preferred)
        _, hptr = self._head(slot).fetch_add_ref(1)
        self._tls.slot = slot
        return Handle(slot, hptr)

    def leave(self, handle):
        head = self._head(handle.slot)
        while True:
            href, hptr = head.load()
            curr = hptr
            nxt = None
            if curr is not handle.snapshot:
                nxt = curr.shared  # per-slot list link
            new_ptr = None if href == 1 else curr
            if head.compare_exchange(href, hptr, href - 1, new_ptr):
                break
        if href == 1 and curr is not None:
            # Last leaver detached the list: settle the first node's slot
            # contribution as if a successor had displaced it.
            self._adjust(curr, self._batch_adjs(curr.nref_node))
        if curr is not handle.snapshot:
            self._traverse(handle.slot, nxt, handle.snapshot)

    def trim(self, handle):
        """Settle batches retired since the snapshot without leaving.

        Reads the head without modifying it; the observed first node is
        not decremented (the caller's slot count still covers it) and
        becomes the new snapshot.
        """
        head = self._head(handle.slot)
        _, curr = head.load()
        if curr is not handle.snapshot:
            self._traverse(handle.slot, curr.shared, handle.snapshot)
        return Handle(handle.slot, curr)

    # -- counter arithmetic ------------------------------------------------

    def _ctr_faa(self, ref, val):
        def op():
            new = (ref.shared + val) & self.mask
            ref.shared = new
            return new
        return atomics.guarded("ctr_faa", ref.ctr_lock, op)

    def _batch_adjs(self, ref):
        return self.adjs

    def _adjust(self, node, val):
        """Add `val` to the batch counter of `node`; free the batch at zero.

        A null node is a no-op: a slot can hold active threads above an
        empty list, so a displaced predecessor may legitimately be
        absent.
        """
        if node is None:
            return False
        ref = node.nref_node
        if self._ctr_faa(ref, val) == 0:
            self._free_batch(ref)
            return True
        return False

    def _traverse(self, slot, nxt, snapshot):
        """Walk the retirement sublist, one decrement per listed node.

        Processes down to and including the snapshot node; returns the
        number of batches freed.
        """
        freed = 0
        visited = 0
        while True:
            curr = nxt
            if curr is None:
                break
            nxt = curr.shared
            visited += 1
            if self._ctr_faa(curr.nref_node, self.mask) == 0:  # -1 wrapped
                self._free_batch(curr.nref_node)
                freed += 1
            if curr is snapshot:
                break
        self._after_traverse(slot, visited)
        return freed

    def _free_batch(self, ref):
        node = ref.batch_next
        while node is not ref:
            nxt = node.batch_next
            self._reclaim(node)
            node = nxt
        self._reclaim(ref)  # counter node goes last

    # -- retirement --------------------------------------------------------

    def _skip_slot(self, slot, href, batch):
        return href == 0

    def _after_insert(self, slot, href):
        pass

    def _after_traverse(self, slot, visited):
        pass

    def _seal_adjs(self, ctr, k):
        return self.adjs

    def _pad_for_k(self, batch, k):
        if batch.size < k + 1:
            raise ValueError(
                f"batch of {batch.size} nodes cannot cover {k} slots; "
                f"need at least {k + 1}")

    def _retire(self, batch):
        k = self._current_k()
        self._pad_for_k(batch, k)
        ctr = seal_batch(batch)
        own_adjs = self._seal_adjs(ctr, k)
        do_adj = False
        empty = 0
        curr_node = ctr.batch_next  # first batch node
        for slot in range(k):
            head = self._head(slot)
            inserted = False
            while True:
                href, hptr = head.load()
                if self._skip_slot(slot, href, batch):
                    do_adj = True
                    empty = wrap_add(empty, own_adjs, self.word_bits)
                    break
                curr_node.shared = hptr
                if head.compare_exchange(href, hptr, href, curr_node):
                    inserted = True
                    break
            if inserted:
                curr_node = curr_node.batch_next
                if hptr is not None:
                    self._adjust(
                        hptr, wrap_add(self._batch_adjs(hptr.nref_node), href,
                                       self.word_bits))
                self._after_insert(slot, href)
        if do_adj:
            self._adjust(ctr.batch_next, empty)

    def _seal_size(self):
        return max(self.batch_min, self._current_k() + 1)

    def _local_batch(self):
        batch = getattr(self._tls, "batch", None)
        if batch is None:
            batch = LocalBatch()
            self._tls.batch = batch
        return batch

    def retire_node(self, node):
        """Defer an unlinked node; retiring the same node twice is undefined."""
        batch = self._local_batch()
        batch.append(node)
        self._retired.inc()
        if batch.size >= self._seal_size():
            self._tls.batch = None
            self._retire(batch)

    def flush_local(self):
        """Pad and retire any partial local batch; the thread then owns
        no deferred nodes."""
        batch = getattr(self._tls, "batch", None)
        if batch is None or batch.size == 0:
            return
        self._tls.batch = None
        target = self._seal_size()
        while batch.size < target:
            dummy = DummyNode()
            self.alloc_init(dummy)
            batch.append(dummy)
            self._retired.inc()
        self._retire(batch)
