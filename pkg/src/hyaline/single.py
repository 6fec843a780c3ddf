"""One-slot-per-thread scheme variant (single-width-friendly heads).

Each thread owns a dedicated slot, which makes enter a single atomic
store and leave a single atomic exchange (wait-free).  Retirement does
no predecessor adjustment: it simply counts how many slots a batch was
inserted into and adds that count to the batch's own counter.
"""

from __future__ import annotations

import threading

from .core import wrap_add
from .general import Handle, HyalineScheme


class Hyaline1Scheme(HyalineScheme):
    """Dedicated-slot variant over a fixed slot capacity.

    Slots are handed out through :meth:`alloc_slot` / :meth:`release_slot`
    rather than trusting callers to coordinate ownership.
    """

    def __init__(self, slots=8, batch_min=64, reclaim=None, word_bits=64):
        # Capacity need not be a power of two here; bypass the parent's
        # power-of-two check by initializing at 1 and widening.
        super().__init__(slots=1, batch_min=batch_min, reclaim=reclaim,
                         word_bits=word_bits)
        from .atomics import AtomicHead
        self._k = slots
        self._heads = [AtomicHead() for _ in range(slots)]
        self._slot_lock = threading.Lock()
        self._free_slots = list(range(slots - 1, -1, -1))
        self._owned = threading.local()

    # -- slot ownership ----------------------------------------------------

    def alloc_slot(self):
        with self._slot_lock:
            if not self._free_slots:
                raise RuntimeError("no free slots; size the scheme for the "
                                   "number of concurrent threads")
            slot = self._free_slots.pop()
        self._owned.slot = slot
        return slot

    def release_slot(self, slot=None):
        if slot is None:
            slot = self._owned.slot
        href, _ = self._head(slot).load()
        if href != 0:
            raise RuntimeError("releasing a slot that is still entered")
        self._owned.slot = None
        with self._slot_lock:
            self._free_slots.append(slot)

    def _my_slot(self):
        slot = getattr(self._owned, "slot", None)
        if slot is None:
            slot = self.alloc_slot()
        return slot

    # -- enter / leave (owner-only, constant atomic steps) -----------------

    def enter(self, slot=None):
        if slot is None:
            slot = self._my_slot()
        self._head(slot).store(1, None)
        self._tls.slot = slot
        return Handle(slot, None)

    def leave(self, handle):
        _, hptr = self._head(handle.slot).exchange(0, None)
        if hptr is not None:
            # Sole owner: the detached first node is decremented too,
            # unlike the shared-slot variant.
            self._traverse(handle.slot, hptr, handle.snapshot)

    def trim(self, handle):
        _, curr = self._head(handle.slot).load()
        if curr is not handle.snapshot:
            self._traverse(handle.slot, curr.shared, handle.snapshot)
        return Handle(handle.slot, curr)

    # -- retirement: count insertions, no wrap-around constant -------------

    def _retire(self, batch):
        k = self._current_k()
        self._pad_for_k(batch, k)
        from .core import seal_batch
        ctr = seal_batch(batch)
        self._seal_adjs(ctr, k)
        inserts = 0
        curr_node = ctr.batch_next
        for slot in range(k):
            head = self._head(slot)
            inserted = False
            while True:
                href, hptr = head.load()
                if self._skip_slot(slot, href, batch):
                    break
                curr_node.shared = hptr
                if head.compare_exchange(href, hptr, href, curr_node):
                    inserted = True
                    break
            if inserted:
                curr_node = curr_node.batch_next
                inserts += 1
                self._after_insert(slot, href)
        self._adjust(ctr.batch_next, inserts)

    def _pad_for_k(self, batch, k):
        if batch.size < k + 1:
            raise ValueError(
                f"batch of {batch.size} nodes cannot cover {k} slots; "
                f"need at least {k + 1}")
