"""Lock-backed atomic cells.

CPython threads preempt at bytecode granularity, so compound
read-modify-write sequences are not atomic on their own.  Every shared
word the reclamation schemes touch goes through one of the cells below,
each guarded by its own lock.  A cell update is therefore a single
indivisible step, which is exactly the granularity the interleaving
oracle models.

A step hook can be installed to drive the schemes in lock-step replay
mode: ``hook.pre(kind)`` is called (and may block until it is the
calling thread's turn) before the operation takes effect and
``hook.post(kind)`` after it completes.  Only one thread is ever between
pre and post at a time under a serializing hook, which totally orders
the atomic operations according to an externally chosen schedule.
Normal runs leave the hook unset.
"""

from __future__ import annotations

import threading

_step_hook = None


def set_step_hook(hook):
    """Install (or clear, with None) the global step hook."""
    global _step_hook
    _step_hook = hook


def guarded(kind, lock, fn):
    """Run `fn` under `lock` as one schedulable atomic step."""
    hook = _step_hook
    if hook is None:
        with lock:
            return fn()
    hook.pre(kind)
    try:
        with lock:
            return fn()
    finally:
        hook.post(kind)


class AtomicWord:
    """A single machine word with optional wrap-around arithmetic."""

    __slots__ = ("_lock", "_value", "_mask")

    def __init__(self, value=0, bits=None):
        self._lock = threading.Lock()
        self._mask = (1 << bits) - 1 if bits else None
        self._value = value

    def load(self):
        return guarded("word_load", self._lock, lambda: self._value)

    def store(self, value):
        def op():
            self._value = value
        guarded("word_store", self._lock, op)

    def fetch_add(self, delta):
        def op():
            old = self._value
            new = old + delta
            if self._mask is not None:
                new &= self._mask
            self._value = new
            return old
        return guarded("word_faa", self._lock, op)

    def compare_exchange(self, expect, new):
        def op():
            if self._value == expect:
                self._value = new
                return True
            return False
        return guarded("word_cas", self._lock, op)

    def max_update(self, value):
        """Raise the word to `value` unless already >= value; returns result."""
        def op():
            if self._value < value:
                self._value = value
            return self._value
        return guarded("word_maxcas", self._lock, op)


class AtomicRef:
    """A single reference cell; comparisons are by identity."""

    __slots__ = ("_lock", "_value")

    def __init__(self, value=None):
        self._lock = threading.Lock()
        self._value = value

    def load(self):
        return guarded("ref_load", self._lock, lambda: self._value)

    def store(self, value):
        def op():
            self._value = value
        guarded("ref_store", self._lock, op)

    def compare_exchange(self, expect, new):
        def op():
            if self._value is expect:
                self._value = new
                return True
            return False
        return guarded("ref_cas", self._lock, op)


class AtomicHead:
    """Two-word slot head: active-thread count paired with the list head.

    The pair is always read and written as one unit (double-width
    load / compare-and-swap / fetch-add / exchange).
    """

    __slots__ = ("_lock", "_ref", "_ptr")

    def __init__(self):
        self._lock = threading.Lock()
        self._ref = 0
        self._ptr = None

    def load(self):
        return guarded("head_load", self._lock, lambda: (self._ref, self._ptr))

    def store(self, ref, ptr):
        def op():
            self._ref = ref
            self._ptr = ptr
        guarded("head_store", self._lock, op)

    def fetch_add_ref(self, delta):
        """Atomically bump the count, returning the prior (ref, ptr) pair."""
        def op():
            old = (self._ref, self._ptr)
            self._ref += delta
            return old
        return guarded("head_faa", self._lock, op)

    def compare_exchange(self, expect_ref, expect_ptr, new_ref, new_ptr):
        def op():
            if self._ref == expect_ref and self._ptr is expect_ptr:
                self._ref = new_ref
                self._ptr = new_ptr
                return True
            return False
        return guarded("head_cas", self._lock, op)

    def exchange(self, new_ref, new_ptr):
        def op():
            old = (self._ref, self._ptr)
            self._ref = new_ref
            self._ptr = new_ptr
            return old
        return guarded("head_swap", self._lock, op)


class AtomicMarkRef:
    """Reference paired with a boolean mark, updated as one unit.

    Used for the mark-compressed successor links of the lock-free list:
    the mark flags the *owning* node as logically deleted.  Data
    structure links are not schedulable scheme steps, so these are never
    hooked.
    """

    __slots__ = ("_lock", "_ref", "_mark")

    def __init__(self, ref=None, mark=False):
        self._lock = threading.Lock()
        self._ref = ref
        self._mark = mark

    def load(self):
        with self._lock:
            return self._ref, self._mark

    def store(self, ref, mark):
        with self._lock:
            self._ref = ref
            self._mark = mark

    def compare_exchange(self, expect_ref, expect_mark, new_ref, new_mark):
        with self._lock:
            if self._ref is expect_ref and self._mark == expect_mark:
                self._ref = new_ref
                self._mark = new_mark
                return True
            return False
