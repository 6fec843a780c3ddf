"""Lock-free ordered structures driven through a reclamation scheme.

A sorted linked list with mark-bit logical deletion and helping
physical unlink (the thread whose compare-and-swap unlinks a node
retires it, exactly once), plus a fixed-bucket hash map of such lists.
Mutating traversals help unlink marked nodes so deleted nodes are
retired promptly, as the era-validated schemes require; read-only
lookups skip marked nodes without writing.

Every shared link read goes through the scheme's ``read_link`` so the
robust variants can validate access eras.
"""

from __future__ import annotations

from .atomics import AtomicMarkRef
from .core import MAGIC_LIVE, ReclaimNode


class UseAfterFreeError(RuntimeError):
    pass


class ListNode(ReclaimNode):
    __slots__ = ("key", "value", "link")

    def __init__(self, key, value):
        super().__init__()
        self.key = key
        self.value = value
        self.link = AtomicMarkRef()


# Restart an operation from scratch after this many CAS failures; keeps
# a starved thread from holding reservations indefinitely.
CAS_RESTART_LIMIT = 1000


class _OrderedListCore:
    """Set/map semantics over one sorted list hanging off a head cell."""

    __slots__ = ("_scheme", "_head")

    def __init__(self, scheme, head_cell):
        self._scheme = scheme
        self._head = head_cell

    @staticmethod
    def _check(node):
        if node.magic != MAGIC_LIVE:
            raise UseAfterFreeError("reached a node that was already reclaimed")

    def _find(self, key):
        """Position (prev_cell, curr) with curr the first node of key >= key.

        Unlinks any marked node encountered; the unlinking thread
        retires it.
        """
        scheme = self._scheme
        failures = 0
        while True:
            prev_cell = self._head
            curr, _ = scheme.read_link(prev_cell)
            while True:
                if curr is None:
                    return prev_cell, None
                self._check(curr)
                succ, cmark = scheme.read_link(curr.link)
                observed = scheme.read_link(prev_cell)
                if observed[0] is not curr or observed[1]:
                    break  # restart from the head
                if cmark:
                    if prev_cell.compare_exchange(curr, False, succ, False):
                        scheme.retire_node(curr)
                        curr = succ
                        continue
                    failures += 1
                    if failures >= CAS_RESTART_LIMIT:
                        failures = 0
                    break
                if curr.key >= key:
                    return prev_cell, curr
                prev_cell = curr.link
                curr = succ

    def insert(self, key, value):
        scheme = self._scheme
        node = ListNode(key, value)
        scheme.alloc_init(node)
        while True:
            prev_cell, curr = self._find(key)
            if curr is not None and curr.key == key:
                return False  # duplicate; speculative node is never published
            node.link.store(curr, False)
            if prev_cell.compare_exchange(curr, False, node, False):
                return True

    def remove(self, key):
        scheme = self._scheme
        while True:
            prev_cell, curr = self._find(key)
            if curr is None or curr.key != key:
                return False
            succ, cmark = scheme.read_link(curr.link)
            if cmark:
                continue  # another deleter owns it; find() will help
            if not curr.link.compare_exchange(succ, False, succ, True):
                continue
            if prev_cell.compare_exchange(curr, False, succ, False):
                scheme.retire_node(curr)
            else:
                self._find(key)  # let the helper unlink and retire
            return True

    def get(self, key):
        """Read-only lookup: no helping, no writes, no retirements."""
        scheme = self._scheme
        curr, _ = scheme.read_link(self._head)
        while curr is not None:
            self._check(curr)
            succ, cmark = scheme.read_link(curr.link)
            if not cmark and curr.key == key:
                return curr.value
            if curr.key > key:
                return None
            curr = succ
        return None

    def items(self):
        """Unmarked (key, value) pairs; single-threaded use only."""
        out = []
        curr, _ = self._scheme.read_link(self._head)
        while curr is not None:
            succ, cmark = self._scheme.read_link(curr.link)
            if not cmark:
                out.append((curr.key, curr.value))
            curr = succ
        return out


class HarrisMichaelList:
    """Sorted lock-free list with set/map semantics."""

    def __init__(self, scheme):
        self._core = _OrderedListCore(scheme, AtomicMarkRef())

    def insert(self, key, value=True):
        return self._core.insert(key, value)

    def remove(self, key):
        return self._core.remove(key)

    def get(self, key):
        return self._core.get(key)

    def items(self):
        return self._core.items()


class LockFreeHashMap:
    """Fixed-size bucket array of sorted lists; no resizing."""

    DEFAULT_BUCKETS = 1 << 14

    def __init__(self, scheme, buckets=DEFAULT_BUCKETS):
        self._cores = [
            _OrderedListCore(scheme, AtomicMarkRef()) for _ in range(buckets)
        ]
        self._n = buckets

    def _core(self, key):
        return self._cores[hash(key) % self._n]

    def insert(self, key, value=True):
        return self._core(key).insert(key, value)

    def remove(self, key):
        return self._core(key).remove(key)

    def get(self, key):
        return self._core(key).get(key)

    def items(self):
        out = []
        for core in self._cores:
            out.extend(core.items())
        return out
