"""Epoch-based reclamation baseline.

The benchmarked flavor: the epoch counter is advanced unconditionally
every `epochf` operations per thread, each thread keeps a single limbo
list, and every `emptyf`-th retire scans it, freeing nodes whose retire
epoch precedes the minimum live reservation.  Deliberately not robust:
one stalled thread pins its reservation and the limbo lists grow
without bound.
"""

from __future__ import annotations

import threading

from .atomics import AtomicWord
from .base import ReclamationScheme

QUIESCENT = None


class _ThreadRecord:
    __slots__ = ("reservation", "limbo", "ops", "retires")

    def __init__(self):
        self.reservation = QUIESCENT
        self.limbo = []  # (node, retire_epoch), single-thread-owned
        self.ops = 0
        self.retires = 0


class EBRScheme(ReclamationScheme):

    def __init__(self, reclaim=None, epochf=150, emptyf=120):
        super().__init__(reclaim)
        self.epochf = epochf
        self.emptyf = emptyf
        self._epoch = AtomicWord(0)
        self._records_lock = threading.Lock()
        self._records = []

    def _record(self):
        rec = getattr(self._tls, "record", None)
        if rec is None:
            rec = _ThreadRecord()
            with self._records_lock:
                self._records.append(rec)
            self._tls.record = rec
        return rec

    def current_epoch(self):
        return self._epoch.load()

    def enter(self):
        rec = self._record()
        rec.ops += 1
        if rec.ops % self.epochf == 0:
            self._epoch.fetch_add(1)
        rec.reservation = self._epoch.load()
        return rec

    def leave(self, handle):
        handle.reservation = QUIESCENT

    def retire_node(self, node):
        rec = self._record()
        rec.limbo.append((node, self._epoch.load()))
        rec.retires += 1
        self._retired.inc()
        if rec.retires % self.emptyf == 0:
            self._scan(rec)

    def _min_reservation(self):
        low = None
        with self._records_lock:
            records = list(self._records)
        for rec in records:
            res = rec.reservation
            if res is not QUIESCENT and (low is None or res < low):
                low = res
        return low

    def _scan(self, rec):
        low = self._min_reservation()
        survivors = []
        for node, epoch in rec.limbo:
            if low is None or epoch < low:
                self._reclaim(node)
            else:
                survivors.append((node, epoch))
        rec.limbo = survivors

    def scan(self):
        """Explicit limbo scan for the calling thread."""
        self._scan(self._record())

    def finalize(self):
        """Drain every limbo list once all threads are quiescent."""
        low = self._min_reservation()
        with self._records_lock:
            records = list(self._records)
        for rec in records:
            survivors = []
            for node, epoch in rec.limbo:
                if low is None or epoch < low:
                    self._reclaim(node)
                else:
                    survivors.append((node, epoch))
            rec.limbo = survivors
