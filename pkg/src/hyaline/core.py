"""Shared domain types and counter algebra for the reclamation schemes.

The batch reference counters live in ordinary unsigned machine words and
rely on wrap-around: the per-slot contribution constant is chosen so
that exactly k contributions sum to zero modulo 2**N.  "Negative"
intermediate counter values are simply large unsigned values.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

WORD_BITS_DEFAULT = 64


def word_mask(word_bits):
    return (1 << word_bits) - 1


def compute_adjs(k, word_bits=WORD_BITS_DEFAULT):
    """Per-slot wrap-around contribution constant for k slots.

    floor((2**N - 1) / k) + 1, reduced modulo 2**N.  Requires k to be a
    power of two so that k * result == 0 (mod 2**N).
    """
    if word_bits not in (32, 64):
        raise ValueError(f"unsupported word width: {word_bits}")
    if k < 1 or k & (k - 1):
        raise ValueError(f"slot count must be a positive power of two, got {k}")
    mask = word_mask(word_bits)
    return (mask // k + 1) & mask


def wrap_add(counter, delta, word_bits=WORD_BITS_DEFAULT):
    """(counter + delta) mod 2**N -- the only arithmetic used on batch counters."""
    return (counter + delta) & word_mask(word_bits)


MAGIC_LIVE = 0xA11C_E55E_D00D_F00D
MAGIC_DEAD = 0xDEAD_DEAD_DEAD_DEAD


class ReclaimNode:
    """Base class for nodes managed by a reclamation scheme.

    The header is exactly three overlaid words:

    * ``shared`` -- batch reference counter (counter node), per-slot
      retirement-list link (listed node), or birth stamp (robust
      variants, before retirement);
    * ``nref_node`` -- the batch's counter node (on the counter node
      itself, the adaptive configuration repurposes this word to store
      the batch's contribution constant);
    * ``batch_next`` -- next node within the batch; the links form a
      cycle, with the counter node pointing at the first batch node.

    ``magic`` is a canary word, not part of the header: it is set at
    allocation and invalidated by the deallocation path so stress runs
    can detect use-after-free and double-free.
    """

    HEADER_FIELDS = ("shared", "nref_node", "batch_next")

    __slots__ = ("shared", "nref_node", "batch_next", "magic", "ctr_lock")

    def __init__(self):
        self.shared = None
        self.nref_node = None
        self.batch_next = None
        self.magic = MAGIC_LIVE
        self.ctr_lock = None  # allocated only for counter nodes


class DummyNode(ReclaimNode):
    """Library-allocated padding node used to finalize short batches."""

    __slots__ = ()


@dataclass
class LocalBatch:
    """Thread-local accumulation of retired nodes awaiting global retirement."""

    nref_node: ReclaimNode | None = None
    first_node: ReclaimNode | None = None
    min_birth: int = 0
    size: int = 0

    def append(self, node):
        if self.nref_node is None:
            # First node becomes the batch's designated counter node.
            self.nref_node = node
            self.first_node = node
            node.nref_node = node
            node.batch_next = node
            self.min_birth = node.shared if isinstance(node.shared, int) else 0
        else:
            birth = node.shared if isinstance(node.shared, int) else 0
            if birth < self.min_birth:
                self.min_birth = birth
            node.nref_node = self.nref_node
            node.batch_next = self.first_node
            self.first_node = node
            self.nref_node.batch_next = node
        self.size += 1


def seal_batch(batch):
    """Prepare an accumulated batch for global retirement.

    Zeroes the counter and gives the counter node its arithmetic lock.
    The first *listed* node is the counter node's batch successor; the
    counter node itself is never inserted into a retirement list, which
    is why batches must be strictly larger than the slot count.
    """
    ctr = batch.nref_node
    ctr.shared = 0
    ctr.ctr_lock = threading.Lock()
    return ctr


@dataclass
class SlotDirectory:
    """Power-of-two-growable table of slot arrays.

    Entry 0 covers slots [0, kmin); entry j >= 1 covers
    [2**(j-1) * kmin, 2**j * kmin).
    """

    kmin: int
    word_bits: int = WORD_BITS_DEFAULT
    entries: list = field(default_factory=list)

    def __post_init__(self):
        if self.kmin < 1 or self.kmin & (self.kmin - 1):
            raise ValueError("kmin must be a positive power of two")
        if not self.entries:
            self.entries = [None] * self.word_bits


def slot_location(slot, kmin):
    """Map a flat slot index onto (directory index, offset within array).

    Directory index is log2(slot div kmin) + 1 with log2(0) defined
    as -1, so indices below kmin land in entry 0.
    """
    assert slot >= 0
    q = slot // kmin
    if q == 0:
        return 0, slot
    j = q.bit_length()  # floor(log2(q)) + 1
    return j, slot - (1 << (j - 1)) * kmin
