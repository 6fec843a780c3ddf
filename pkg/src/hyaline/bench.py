"""Benchmark harness: workload generation, metrics, stall injection, CSV.

Workloads over a prefilled structure with uniformly random keys:

* ``write``    -- 50% insert, 50% delete;
* ``read``     -- 90% lookup, 10% put (a put replaces an existing key by
  delete-and-reinsert, so read-dominated runs still retire nodes);
* ``balanced`` -- the first half of the threads run the write mix, the
  second half are lookup-only readers (used to measure what fraction of
  deallocations is performed by threads that never retire anything).

Every node carries a magic canary word that the deallocation callback
invalidates; structure traversals check it, so a use-after-free or
double free aborts the run instead of passing silently.

With ``stall > 0`` the last ``stall`` workers enter their scheme,
perform a single dereference, then sleep until the run ends without
ever leaving -- the adversarial reader that robust schemes must
tolerate.
"""

from __future__ import annotations

import csv
import random
import sys
import threading
import time
from dataclasses import dataclass, field

from . import create_scheme
from .base import DoubleFreeError
from .core import MAGIC_DEAD, MAGIC_LIVE
from .robust import HyalineSScheme
from .structures import HarrisMichaelList, LockFreeHashMap, UseAfterFreeError

SLOT_CAP = 128

CSV_COLUMNS = (
    "scheme", "structure", "workload", "threads", "duration_s",
    "ops_total", "throughput_ops_s", "unreclaimed_avg_per_op",
    "unreclaimed_final", "frees_min_thread", "frees_max_thread",
    "reader_free_fraction", "seed",
)

STRUCTURES = ("list", "hashmap")
WORKLOADS = ("write", "read", "balanced")


@dataclass
class BenchConfig:
    scheme: str = "hyaline"
    structure: str = "hashmap"
    workload: str = "write"
    threads: int = 8
    duration: float = 10.0
    prefill: int = 50_000
    key_range: int = 100_001
    slots: int | None = None
    batch_min: int = 64
    freq: int = 150
    threshold: int = 8192
    epochf: int = 150
    emptyf: int = 120
    stall: int = 0
    seed: int = 1
    csv: str | None = None
    buckets: int = 1 << 14


@dataclass
class BenchRecord:
    config: BenchConfig
    ops_total: int
    throughput: float
    unreclaimed_avg_per_op: float
    unreclaimed_final: int
    unreclaimed_series: list = field(default_factory=list)  # (seconds, count)
    frees_by_thread: dict = field(default_factory=dict)
    reader_free_fraction: float = 0.0
    stalled_slots: list = field(default_factory=list)
    stalled_acks: dict = field(default_factory=dict)
    abort: str | None = None

    def unreclaimed_at(self, seconds):
        """Unreclaimed count at the sample nearest to `seconds`.

        The monitor samples once per second with scheduling jitter, so
        the sample for the nominal 2-second mark may carry a timestamp
        slightly past 2.0; nearest-sample lookup reads the series the way
        the nominal timeline intends.
        """
        if not self.unreclaimed_series:
            return 0
        return min(self.unreclaimed_series,
                   key=lambda tv: abs(tv[0] - seconds))[1]


def _resolve_slots(config):
    if config.slots is not None:
        slots = config.slots
    else:
        slots = 1
        while slots < config.threads:
            slots *= 2
        slots = min(slots, SLOT_CAP)
    if config.scheme in ("hyaline1", "hyaline-1s") and slots < config.threads:
        raise ValueError(
            f"dedicated-slot scheme needs >= {config.threads} slots, "
            f"got {slots}")
    return slots


def _thread_rng(seed, index):
    return random.Random((seed << 20) ^ (index + 1))


def run(config):
    """Execute one benchmark run and return its record."""
    if config.structure not in STRUCTURES:
        raise ValueError(f"unknown structure {config.structure!r}")
    if config.workload not in WORKLOADS:
        raise ValueError(f"unknown workload {config.workload!r}")
    slots = _resolve_slots(config)

    tls = threading.local()
    frees = {}
    frees_lock = threading.Lock()

    def reclaim(node):
        if node.magic != MAGIC_LIVE:
            raise DoubleFreeError("deallocation callback saw a node that "
                                  "was already deallocated")
        node.magic = MAGIC_DEAD
        label = getattr(tls, "label", "main")
        with frees_lock:
            frees[label] = frees.get(label, 0) + 1

    scheme = create_scheme(
        config.scheme, slots=slots, batch_min=config.batch_min,
        reclaim=reclaim, freq=config.freq, threshold=config.threshold,
        epochf=config.epochf, emptyf=config.emptyf)
    if config.structure == "list":
        structure = HarrisMichaelList(scheme)
    else:
        structure = LockFreeHashMap(scheme, buckets=config.buckets)

    # Prefill from the coordinating thread (no critical section needed:
    # nothing is retired before workers start).
    tls.label = "main"
    scheme.attach_thread()
    rng = random.Random(config.seed)
    filled = 0
    while filled < config.prefill:
        if structure.insert(rng.randrange(config.key_range), filled):
            filled += 1

    n = config.threads
    stallers = set(range(n - config.stall, n)) if config.stall else set()
    readers = set()
    if config.workload == "balanced":
        readers = {i for i in range(n // 2, n) if i not in stallers}

    stop = threading.Event()
    started = threading.Barrier(n + 1)
    ops_by_thread = [0] * n
    stalled_slots = []
    stalled_lock = threading.Lock()
    aborts = []

    def body(i, rng):
        handle = scheme.enter()
        try:
            if i in stallers:
                structure.get(rng.randrange(config.key_range))
                slot = getattr(handle, "slot", None)
                with stalled_lock:
                    stalled_slots.append(slot)
                stop.wait()
                return False  # never leaves
            key = rng.randrange(config.key_range)
            if i in readers:
                structure.get(key)
            elif config.workload == "read" and rng.random() < 0.9:
                structure.get(key)
            elif config.workload == "read":
                # put: replace by delete-and-reinsert if present
                if not structure.insert(key, i):
                    structure.remove(key)
                    structure.insert(key, i)
            elif rng.random() < 0.5:
                structure.insert(key, i)
            else:
                structure.remove(key)
        finally:
            if i not in stallers:
                scheme.leave(handle)
        return True

    def worker(i):
        tls.label = i
        scheme.attach_thread(i)
        if config.scheme in ("hyaline1", "hyaline-1s"):
            scheme.alloc_slot()
        rng = _thread_rng(config.seed, i)
        started.wait()
        count = 0
        try:
            if i in stallers:
                body(i, rng)
            else:
                while not stop.is_set():
                    body(i, rng)
                    count += 1
                scheme.flush_local()
        except (UseAfterFreeError, DoubleFreeError) as exc:
            aborts.append(f"thread {i}: {exc}")
            stop.set()
        ops_by_thread[i] = count

    series = []
    t0 = None

    def monitor():
        while not stop.is_set():
            stop.wait(1.0)
            series.append((time.monotonic() - t0,
                           max(0, scheme.unreclaimed())))

    old_interval = sys.getswitchinterval()
    sys.setswitchinterval(1e-4)
    threads = [threading.Thread(target=worker, args=(i,), name=f"worker-{i}")
               for i in range(n)]
    try:
        for t in threads:
            t.start()
        started.wait()
        t0 = time.monotonic()
        mon = threading.Thread(target=monitor, name="monitor")
        mon.start()
        stop.wait(config.duration)
        stop.set()
        for t in threads:
            t.join()
        mon.join()
    finally:
        sys.setswitchinterval(old_interval)

    stalled_acks = {}
    if isinstance(scheme, HyalineSScheme):
        for slot in stalled_slots:
            if slot is not None:
                stalled_acks[slot] = scheme.ack_balance(slot)

    scheme.finalize()
    series.append((time.monotonic() - t0, max(0, scheme.unreclaimed())))

    ops_total = sum(ops_by_thread)
    elapsed = series[-1][0] if series else config.duration
    worker_frees = {i: frees.get(i, 0) for i in range(n) if i not in stallers}
    total_frees = sum(frees.values())
    reader_frees = sum(frees.get(i, 0) for i in readers)
    avg_sample = (sum(v for _, v in series) / len(series)) if series else 0.0

    return BenchRecord(
        config=config,
        ops_total=ops_total,
        throughput=ops_total / elapsed if elapsed else 0.0,
        unreclaimed_avg_per_op=(avg_sample / ops_total) if ops_total else 0.0,
        unreclaimed_final=max(0, scheme.unreclaimed()),
        unreclaimed_series=series,
        frees_by_thread=worker_frees,
        reader_free_fraction=(reader_frees / total_frees) if total_frees else 0.0,
        stalled_slots=stalled_slots,
        stalled_acks=stalled_acks,
        abort=aborts[0] if aborts else None,
    )


def emit_csv(records, path):
    """Append one row per record; writes the header if the file is new."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            need_header = not fh.readline().strip()
    except FileNotFoundError:
        need_header = True
    with open(path, "a", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        if need_header:
            writer.writerow(CSV_COLUMNS)
        for rec in records:
            cfg = rec.config
            writer.writerow([
                cfg.scheme,
                cfg.structure,
                cfg.workload,
                cfg.threads,
                f"{cfg.duration:g}",
                rec.ops_total,
                f"{rec.throughput:.2f}",
                f"{rec.unreclaimed_avg_per_op:.6g}",
                rec.unreclaimed_final,
                min(rec.frees_by_thread.values(), default=0),
                max(rec.frees_by_thread.values(), default=0),
                f"{rec.reader_free_fraction:.4f}",
                cfg.seed,
            ])
