"""Common plumbing shared by every reclamation scheme."""

from __future__ import annotations

import threading

from .core import DummyNode, MAGIC_DEAD, MAGIC_LIVE


class DoubleFreeError(RuntimeError):
    pass


class _Counter:
    """Plain shared tally (not an algorithm step; never hooked)."""

    __slots__ = ("_lock", "_value")

    def __init__(self):
        self._lock = threading.Lock()
        self._value = 0

    def inc(self, n=1):
        with self._lock:
            self._value += n

    def read(self):
        with self._lock:
            return self._value


class ReclamationScheme:
    """Base class: thread registry, retire/free ledgers, reclaim dispatch.

    The deallocation callback runs on whichever thread happens to drop
    the last reference, so it must be safe to call from any thread.
    """

    def __init__(self, reclaim=None):
        self._reclaim_cb = reclaim
        self._retired = _Counter()
        self._freed = _Counter()
        self._tls = threading.local()
        self._attach_lock = threading.Lock()
        self._next_index = 0

    # -- thread registry ---------------------------------------------------

    def attach_thread(self, index=None):
        """Register the calling thread; returns its index."""
        if index is None:
            with self._attach_lock:
                index = self._next_index
                self._next_index += 1
        self._tls.index = index
        return index

    def _thread_index(self):
        idx = getattr(self._tls, "index", None)
        if idx is None:
            idx = self.attach_thread()
        return idx

    def detach_thread(self):
        self._tls.index = None

    # -- ledgers -----------------------------------------------------------

    def retired_total(self):
        return self._retired.read()

    def freed_total(self):
        return self._freed.read()

    def unreclaimed(self):
        return self._retired.read() - self._freed.read()

    # -- reclaim dispatch --------------------------------------------------

    def _reclaim(self, node):
        self._freed.inc()
        if isinstance(node, DummyNode):
            if node.magic != MAGIC_LIVE:
                raise DoubleFreeError("padding node reclaimed twice")
            node.magic = MAGIC_DEAD
        elif self._reclaim_cb is not None:
            self._reclaim_cb(node)

    # -- default no-op surface ---------------------------------------------

    def alloc_init(self, node):
        """Hook for allocation-time stamping; plain schemes need none."""

    def read_link(self, cell):
        """Read a shared link cell; robust schemes validate eras here."""
        return cell.load()

    def flush_local(self):
        """Hand any thread-locally deferred nodes to the global scheme."""

    def finalize(self):
        """Post-join cleanup on the coordinating thread."""


class NoReclamation(ReclamationScheme):
    """Leaking baseline: retired nodes are counted but never freed."""

    def enter(self):
        return None

    def leave(self, handle):
        pass

    def retire_node(self, node):
        self._retired.inc()
