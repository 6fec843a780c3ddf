"""Exhaustive interleaving oracle for the reclamation schemes.

An independent executable model of the retirement-list schemes, small
enough to enumerate *every* thread interleaving of a bounded scenario.
The model and the production implementation share nothing but the
algorithm: the model is rebuilt from the scheme's definition over plain
dictionaries, so agreement between the two is meaningful evidence.

Model granularity
-----------------
A *step* is one atomic operation on scheme-shared memory: a slot-head
load / fetch-add / compare-and-swap / exchange, a batch-counter
fetch-add, or (for the era-based variants) an era, access-era,
acknowledgment or protected-location operation.  Reads of immutable
published values (a listed node's successor link, a node's birth stamp)
are glued to the adjacent step, which is exact because those words never
change while readable.  This matches the production build, whose atomic
cells are individually lock-guarded and hookable at the same
granularity, so a model schedule replays 1:1 on the real code.

Exploration
-----------
Thread programs are Python generators that yield step descriptors; the
explorer re-executes a thread from its recorded step results to recover
its continuation, so search nodes are plain values: (shared state,
per-thread histories).  Depth-first search over schedule prefixes with
duplicate-state pruning (two nodes with identical shared state and
per-thread histories have identical futures) keeps bounded scenarios
tractable.  Safety properties are checked online while executing steps:

* a batch is never freed twice, and never freed before retirement;
* a batch is never freed while a thread that must still decrement it
  holds a live handle;
* a batch is never freed while an era-validated pointer to one of its
  nodes is held by an active thread;
* the successor link of an already-freed node is never read;
* a batch's counter receives exactly one per-slot contribution unit per
  covered slot (insertion count per slot for the dedicated-slot
  variant) by the time it reaches zero;
* a failed head compare-and-swap always coincides with an intervening
  successful head update (lock-freedom witness);
* at termination without stalled threads, every retired batch has been
  freed.
"""

from __future__ import annotations

import hashlib
import random
import threading
from dataclasses import dataclass

from .core import compute_adjs

MASK64 = (1 << 64) - 1

VARIANTS = ("hyaline", "hyaline1", "hyaline-s", "hyaline-1s")

#: Deliberate model mutations; each must make `explore` produce a witness.
BUGS = ("skip-empty-adjs", "drop-displacement-count")


class OracleOverflow(Exception):
    """The state space exceeded the configured bound."""

    def __init__(self, bound):
        super().__init__(f"state-space bound of {bound} states exceeded")
        self.bound = bound


@dataclass(frozen=True)
class BatchSpec:
    """A retirement batch: its listed nodes, one per covered slot."""

    name: str
    nodes: tuple
    k: int


class Scenario:
    """A bounded multi-threaded scenario over one scheme variant."""

    def __init__(self, variant, k, programs, batches, locs=None,
                 freq=1, has_stall=False, bug=None):
        if variant not in VARIANTS:
            raise ValueError(f"unknown variant {variant!r}")
        if bug is not None and bug not in BUGS:
            raise ValueError(f"unknown bug {bug!r}")
        self.variant = variant
        self.k = k
        self.programs = [tuple(p) for p in programs]
        self.batches = {b.name: b for b in batches}
        self.locs = dict(locs or {})
        self.freq = freq
        self.has_stall = has_stall
        self.bug = bug
        self.robust = variant in ("hyaline-s", "hyaline-1s")
        self.single = variant in ("hyaline1", "hyaline-1s")
        self.node_batch = {n: b.name for b in batches for n in b.nodes}
        self._adjs = {
            b.name: (0 if self.single else compute_adjs(b.k, 64))
            for b in batches
        }

    @property
    def nthreads(self):
        return len(self.programs)

    def adjs_of(self, batch_name):
        return self._adjs[batch_name]

    def expected_units(self, state, batch_name):
        if self.single:
            return len(state.inserted.get(batch_name, frozenset()))
        return self.batches[batch_name].k


# ---------------------------------------------------------------------------
# Model state


class MState:
    """Complete shared state of a scenario; copyable and canonicalizable."""

    __slots__ = (
        "heads", "entered", "nxt", "ctr", "units", "births", "minb",
        "retired", "inserted", "freed_at", "free_order", "protected",
        "active", "validated", "era", "access", "acks", "locs", "violations",
    )

    def __init__(self, sc):
        self.heads = [(0, None, 0) for _ in range(sc.k)]  # (count, head, version)
        self.entered = [frozenset() for _ in range(sc.k)]
        self.nxt = {}
        self.ctr = {}
        self.units = {}
        self.births = {}
        self.minb = {}
        self.retired = frozenset()
        self.inserted = {}
        self.freed_at = {}
        self.free_order = ()
        self.protected = frozenset()
        self.active = {}
        self.validated = {}
        self.era = 0
        self.access = [0] * sc.k
        self.acks = [0] * sc.k
        self.locs = dict(sc.locs)
        self.violations = []

    def copy(self):
        new = MState.__new__(MState)
        new.heads = list(self.heads)
        new.entered = list(self.entered)
        new.nxt = dict(self.nxt)
        new.ctr = dict(self.ctr)
        new.units = dict(self.units)
        new.births = dict(self.births)
        new.minb = dict(self.minb)
        new.retired = self.retired
        new.inserted = dict(self.inserted)
        new.freed_at = dict(self.freed_at)
        new.free_order = self.free_order
        new.protected = self.protected
        new.active = dict(self.active)
        new.validated = dict(self.validated)
        new.era = self.era
        new.access = list(self.access)
        new.acks = list(self.acks)
        new.locs = dict(self.locs)
        new.violations = list(self.violations)
        return new

    def key(self):
        return (
            tuple(self.heads),
            tuple(tuple(sorted(s)) for s in self.entered),
            tuple(sorted(self.nxt.items(), key=lambda kv: kv[0])),
            tuple(sorted(self.ctr.items())),
            tuple(sorted(self.units.items())),
            tuple(sorted(self.births.items())),
            tuple(sorted(self.minb.items())),
            tuple(sorted(self.retired)),
            tuple(sorted((b, tuple(sorted(s)))
                         for b, s in self.inserted.items())),
            tuple(sorted(self.freed_at.items())),
            self.free_order,
            tuple(sorted(self.protected)),
            tuple(sorted(self.active.items(), key=lambda kv: kv[0])),
            tuple(sorted((t, tuple(sorted(v)))
                         for t, v in self.validated.items())),
            self.era,
            tuple(self.access),
            tuple(self.acks),
            tuple(sorted(self.locs.items(), key=lambda kv: kv[0])),
        )


def _free(st, sc, batch):
    if batch in st.freed_at:
        st.violations.append(f"double free of batch {batch}")
        return
    if batch not in st.retired:
        st.violations.append(f"batch {batch} freed before being retired")
    st.freed_at[batch] = len(st.free_order)
    st.free_order = st.free_order + (batch,)
    holders = sorted(t for (b, t) in st.protected if b == batch)
    if holders:
        st.violations.append(
            f"batch {batch} freed while threads {holders} still hold "
            f"handles covering it")
    bnodes = set(sc.batches[batch].nodes)
    for t, vset in st.validated.items():
        if st.active.get(t) is not None and vset & bnodes:
            st.violations.append(
                f"batch {batch} freed while thread {t} holds a validated "
                f"pointer into it")
    expect = sc.expected_units(st, batch)
    got = st.units.get(batch, 0)
    if got != expect:
        st.violations.append(
            f"batch {batch} freed after {got} per-slot contribution "
            f"units; expected {expect}")


def exec_step(st, tid, step, sc):
    """Apply one atomic step for thread `tid`; returns its result."""
    kind = step[0]
    if kind == "head_faa":
        _, slot, delta = step
        href, ptr, ver = st.heads[slot]
        st.heads[slot] = (href + delta, ptr, ver + 1)
        st.entered[slot] = st.entered[slot] | {tid}
        st.active[tid] = slot
        return (href, ptr)
    if kind == "head_load":
        return st.heads[step[1]]
    if kind == "head_store1":
        slot = step[1]
        _, _, ver = st.heads[slot]
        st.heads[slot] = (1, None, ver + 1)
        st.entered[slot] = frozenset((tid,))
        st.active[tid] = slot
        return None
    if kind == "head_swap0":
        slot = step[1]
        href, ptr, ver = st.heads[slot]
        st.heads[slot] = (0, None, ver + 1)
        st.entered[slot] = frozenset()
        st.active[tid] = None
        st.validated[tid] = frozenset()
        return (href, ptr)
    if kind == "leave_cas":
        _, slot, e_href, e_ptr, n_href, n_ptr, ver_seen = step
        href, ptr, ver = st.heads[slot]
        if href == e_href and ptr == e_ptr:
            st.heads[slot] = (n_href, n_ptr, ver + 1)
            st.entered[slot] = st.entered[slot] - {tid}
            st.active[tid] = None
            st.validated[tid] = frozenset()
            if e_ptr is not None:
                st.protected = st.protected - {(sc.node_batch[e_ptr], tid)}
            return True
        if ver == ver_seen:
            st.violations.append(
                "head compare-and-swap failed although no other head "
                "update intervened")
        return False
    if kind == "retire_cas":
        _, slot, e_href, e_ptr, node, ver_seen = step
        href, ptr, ver = st.heads[slot]
        if href == e_href and ptr == e_ptr:
            st.nxt[node] = e_ptr
            st.heads[slot] = (href, node, ver + 1)
            batch = sc.node_batch[node]
            st.inserted[batch] = st.inserted.get(batch, frozenset()) | {slot}
            # Every thread active in the slot right now must decrement
            # this batch (and, via the displacement contribution, the
            # batch of the node it displaces) before either can be freed.
            adds = {(batch, t) for t in st.entered[slot]}
            if e_ptr is not None:
                displaced = sc.node_batch[e_ptr]
                adds |= {(displaced, t) for t in st.entered[slot]}
            st.protected = st.protected | adds
            return True
        if ver == ver_seen:
            st.violations.append(
                "head compare-and-swap failed although no other head "
                "update intervened")
        return False
    if kind == "ctr_faa":
        _, batch, delta, units, release = step
        new = (st.ctr.get(batch, 0) + delta) & MASK64
        st.ctr[batch] = new
        st.units[batch] = st.units.get(batch, 0) + units
        if release:
            st.protected = st.protected - {(batch, tid)}
        if new == 0:
            _free(st, sc, batch)
        return new
    if kind == "era_faa":
        old = st.era
        st.era = old + 1
        return old
    if kind == "era_load":
        return st.era
    if kind == "access_load":
        return st.access[step[1]]
    if kind == "access_max":
        _, slot, value = step
        if st.access[slot] < value:
            st.access[slot] = value
        return st.access[slot]
    if kind == "access_store":
        _, slot, value = step
        st.access[slot] = value
        return value
    if kind == "ack_faa":
        _, slot, delta = step
        st.acks[slot] += delta
        return st.acks[slot]
    if kind == "loc_load":
        return st.locs[step[1]]
    if kind == "loc_store":
        _, loc, node = step
        st.locs[loc] = node
        return None
    raise ValueError(f"unknown step kind {kind!r}")


# ---------------------------------------------------------------------------
# Thread programs


def _next_reader(sc, node):
    def fn(st):
        batch = sc.node_batch.get(node)
        if batch is not None and batch in st.freed_at:
            st.violations.append(
                f"successor link of node {node} read after its batch "
                f"was freed")
        return st.nxt.get(node)
    return fn


def _birth_writer(node, era):
    def fn(st):
        st.births[node] = era
        return era
    return fn


def _validator(sc, tid, node):
    def fn(st):
        batch = sc.node_batch.get(node)
        if batch is not None and batch in st.freed_at:
            st.violations.append(
                f"thread {tid} validated a pointer to node {node} of "
                f"already-freed batch {batch}")
        st.validated[tid] = st.validated.get(tid, frozenset()) | {node}
        return None
    return fn


def _retire_init(sc, bname):
    spec = sc.batches[bname]
    def fn(st):
        st.retired = st.retired | {bname}
        minb = min((st.births.get(n, 0) for n in spec.nodes), default=0)
        st.minb[bname] = minb
        st.ctr[bname] = 0
        st.units[bname] = 0
        return minb
    return fn


def _noop(st):
    return None


def _traverse(sc, mem, slot, start, snap):
    """Decrement one counter per listed node, down to and including `snap`."""
    visited = 0
    curr = start
    while curr is not None:
        nxt = mem.inline(("nx", curr), _next_reader(sc, curr))
        visited += 1
        yield ("ctr_faa", sc.node_batch[curr], MASK64, 0, True)
        if curr == snap:
            break
        curr = nxt
    if sc.robust and not sc.single and visited:
        yield ("ack_faa", slot, -visited)


def _retire_general(sc, mem, tid, bname):
    spec = sc.batches[bname]
    k = spec.k
    adjs = sc.adjs_of(bname)
    minb = mem.inline(("rt", bname), _retire_init(sc, bname))
    do_adj = False
    empty = 0
    empty_units = 0
    idx = 0
    for slot in range(k):
        inserted = False
        while True:
            href, hptr, _ver = yield ("head_load", slot)
            if href == 0:
                skip = True
            elif sc.robust:
                acc = yield ("access_load", slot)
                skip = acc < minb
            else:
                skip = False
            if skip:
                if sc.bug != "skip-empty-adjs":
                    do_adj = True
                    empty = (empty + adjs) & MASK64
                    empty_units += 1
                break
            node = spec.nodes[idx]
            ok = yield ("retire_cas", slot, href, hptr, node, _ver)
            if ok:
                inserted = True
                break
        if inserted:
            idx += 1
            if hptr is not None:
                displaced = sc.node_batch[hptr]
                delta = sc.adjs_of(displaced)
                if sc.bug != "drop-displacement-count":
                    delta = (delta + href) & MASK64
                yield ("ctr_faa", displaced, delta, 1, False)
            if sc.robust:
                yield ("ack_faa", slot, href)
    if do_adj:
        yield ("ctr_faa", bname, empty, empty_units, False)


def _retire_single(sc, mem, tid, bname):
    spec = sc.batches[bname]
    k = spec.k
    minb = mem.inline(("rt", bname), _retire_init(sc, bname))
    inserts = 0
    idx = 0
    for slot in range(k):
        inserted = False
        while True:
            href, hptr, _ver = yield ("head_load", slot)
            if href == 0:
                skip = True
            elif sc.robust:
                acc = yield ("access_load", slot)
                skip = acc < minb
            else:
                skip = False
            if skip:
                break
            ok = yield ("retire_cas", slot, href, hptr, spec.nodes[idx], _ver)
            if ok:
                inserted = True
                break
        if inserted:
            idx += 1
            inserts += 1
    yield ("ctr_faa", bname, inserts, inserts, False)


def _program(sc, tid, mem):
    handle = None
    alloc_count = 0
    for index, op in enumerate(sc.programs[tid]):
        kind = op[0]
        mem.inline(("op", index, kind), _noop)
        if kind == "enter":
            slot = op[1] if len(op) > 1 else (tid if sc.single else tid % sc.k)
            if sc.single:
                yield ("head_store1", slot)
                handle = (slot, None)
            else:
                _href, hptr = yield ("head_faa", slot, 1)
                handle = (slot, hptr)
        elif kind == "leave":
            slot, snap = handle
            if sc.single:
                _href, hptr = yield ("head_swap0", slot)
                if hptr is not None:
                    yield from _traverse(sc, mem, slot, hptr, None)
            else:
                while True:
                    href, hptr, ver = yield ("head_load", slot)
                    curr = hptr
                    nxtp = None
                    if curr != snap:
                        nxtp = mem.inline(("nx", curr), _next_reader(sc, curr))
                    newp = None if href == 1 else curr
                    ok = yield ("leave_cas", slot, href, hptr,
                                href - 1, newp, ver)
                    if ok:
                        break
                if href == 1 and curr is not None:
                    batch = sc.node_batch[curr]
                    yield ("ctr_faa", batch, sc.adjs_of(batch), 1, False)
                if curr != snap:
                    yield from _traverse(sc, mem, slot, nxtp, snap)
            handle = None
        elif kind == "trim":
            slot, snap = handle
            _href, hptr, _ver = yield ("head_load", slot)
            if hptr != snap:
                nxtp = mem.inline(("nx", hptr), _next_reader(sc, hptr))
                yield from _traverse(sc, mem, slot, nxtp, snap)
            handle = (slot, hptr)
        elif kind == "retire":
            if sc.single:
                yield from _retire_single(sc, mem, tid, op[1])
            else:
                yield from _retire_general(sc, mem, tid, op[1])
        elif kind == "alloc":
            node = op[1]
            alloc_count += 1
            if sc.robust:
                if alloc_count % sc.freq == 0:
                    yield ("era_faa",)
                era = yield ("era_load",)
            else:
                era = 0
            mem.inline(("bi", node), _birth_writer(node, era))
        elif kind == "publish":
            yield ("loc_store", op[1], op[2])
        elif kind == "deref":
            loc = op[1]
            slot = handle[0]
            if sc.robust:
                acc = yield ("access_load", slot)
                while True:
                    node = yield ("loc_load", loc)
                    era = yield ("era_load",)
                    if acc == era:
                        break
                    if sc.single:
                        acc = yield ("access_store", slot, era)
                    else:
                        acc = yield ("access_max", slot, era)
            else:
                node = yield ("loc_load", loc)
            if node is not None:
                mem.inline(("va", node), _validator(sc, tid, node))
        elif kind == "stall":
            return
        else:
            raise ValueError(f"unknown op {kind!r}")


# ---------------------------------------------------------------------------
# Re-execution driver and explorer


class _ThreadDriver:
    """Rebuilds one thread's continuation from its recorded step results.

    During replay, yielded steps and inline reads are answered from the
    history; once the history is exhausted the driver holds the thread's
    next pending step, which `execute_pending` applies to the live state.
    """

    def __init__(self, sc, tid, history, state):
        self.sc = sc
        self.tid = tid
        self.history = list(history)
        self.limit = len(self.history)
        self.pos = 0
        self.state = state
        self.finished = False
        self.pending = None
        self.gen = _program(sc, tid, self)
        self._advance(None, replaying=True)

    def inline(self, tag, fn):
        if self.pos < self.limit:
            entry = self.history[self.pos]
            if entry[0] != "r" or entry[1] != tag:
                raise AssertionError(
                    f"replay divergence: expected {entry}, got inline {tag}")
            self.pos += 1
            return entry[2]
        value = fn(self.state)
        self.history.append(("r", tag, value))
        return value

    def _advance(self, send_value, replaying):
        try:
            step = self.gen.send(send_value)
        except StopIteration:
            self.finished = True
            self.pending = None
            return
        while replaying and self.pos < self.limit:
            entry = self.history[self.pos]
            if entry[0] != "s" or entry[1] != step:
                raise AssertionError(
                    f"replay divergence: expected {entry}, got step {step}")
            self.pos += 1
            try:
                step = self.gen.send(entry[2])
            except StopIteration:
                self.finished = True
                self.pending = None
                return
        self.pending = step

    def execute_pending(self):
        step = self.pending
        result = exec_step(self.state, self.tid, step, self.sc)
        self.history.append(("s", step, result))
        self._advance(result, replaying=False)


class _SearchNode:
    __slots__ = ("state", "hists", "path", "fin")

    def __init__(self, state, hists, path, fin):
        self.state = state
        self.hists = hists
        self.path = path
        self.fin = fin


def _expand(sc, node, tid):
    state = node.state.copy()
    driver = _ThreadDriver(sc, tid, node.hists[tid], state)
    if driver.finished:
        return None
    driver.execute_pending()
    hists = node.hists[:tid] + (tuple(driver.history),) + node.hists[tid + 1:]
    fin = node.fin | {tid} if driver.finished else node.fin
    return _SearchNode(state, hists, node.path + (tid,), fin)


def _node_digest(node):
    blob = repr((node.state.key(), node.hists)).encode()
    return hashlib.blake2b(blob, digest_size=16).digest()


def _terminal_violations(st, sc):
    out = []
    if not sc.has_stall:
        for batch in sorted(st.retired):
            if batch not in st.freed_at:
                out.append(
                    f"batch {batch} retired but never freed "
                    f"(counter {st.ctr.get(batch)})")
    return out


@dataclass
class Verdict:
    ok: bool
    states: int
    terminals: int
    violation: str | None
    witness: tuple | None
    outcomes: set
    max_thread_steps: int

    def summary(self):
        if self.ok:
            return (f"pass: {self.states} states, {self.terminals} terminal "
                    f"schedules, {len(self.outcomes)} distinct free orders, "
                    f"max {self.max_thread_steps} steps per thread")
        return f"FAIL: {self.violation}\n  witness schedule: {self.witness}"


def explore(sc, max_states=1_000_000):
    """Enumerate every distinct interleaving of the scenario.

    Returns a Verdict; raises OracleOverflow if the deduplicated state
    count exceeds `max_states`.
    """
    nthreads = sc.nthreads
    root = _SearchNode(MState(sc), tuple(() for _ in range(nthreads)),
                       (), frozenset())
    seen = {_node_digest(root)}
    stack = [root]
    states = 0
    terminals = 0
    outcomes = set()
    max_thread_steps = 0

    while stack:
        node = stack.pop()
        enabled = [t for t in range(nthreads) if t not in node.fin]
        if not enabled:
            terminals += 1
            problems = _terminal_violations(node.state, sc)
            if problems:
                return Verdict(False, states, terminals, problems[0],
                               node.path, outcomes, max_thread_steps)
            outcomes.add(node.state.free_order)
            continue
        for tid in enabled:
            child = _expand(sc, node, tid)
            if child is None:
                continue
            states += 1
            if child.state.violations:
                return Verdict(False, states, terminals,
                               child.state.violations[0], child.path,
                               outcomes, max_thread_steps)
            nsteps = sum(1 for e in child.hists[tid] if e[0] == "s")
            if nsteps > max_thread_steps:
                max_thread_steps = nsteps
            digest = _node_digest(child)
            if digest in seen:
                continue
            if len(seen) > max_states:
                raise OracleOverflow(max_states)
            seen.add(digest)
            stack.append(child)

    return Verdict(True, states, terminals, None, None, outcomes,
                   max_thread_steps)


def run_schedule(sc, schedule, strict=True):
    """Execute one explicit schedule (a sequence of thread ids).

    Returns the final search node; with strict=True a schedule entry
    for a finished thread is an error.
    """
    node = _SearchNode(MState(sc), tuple(() for _ in range(sc.nthreads)),
                       (), frozenset())
    for tid in schedule:
        if tid in node.fin:
            if strict:
                raise ValueError(
                    f"schedule addresses finished thread {tid} at "
                    f"position {len(node.path)}")
            continue
        node = _expand(sc, node, tid)
    return node


def sample_schedule(sc, rng):
    """Random complete schedule: repeatedly pick an unfinished thread."""
    node = _SearchNode(MState(sc), tuple(() for _ in range(sc.nthreads)),
                       (), frozenset())
    while True:
        enabled = [t for t in range(sc.nthreads) if t not in node.fin]
        if not enabled:
            return node.path, node.state
        node = _expand(sc, node, rng.choice(enabled))


def thread_step_counts(node):
    """Atomic steps executed per thread, per program op index."""
    out = []
    for hist in node.hists:
        counts = {}
        current = None
        for entry in hist:
            if entry[0] == "r" and entry[1][0] == "op":
                current = entry[1][1]
                counts.setdefault(current, 0)
            elif entry[0] == "s":
                counts[current] = counts.get(current, 0) + 1
        out.append(counts)
    return out


# ---------------------------------------------------------------------------
# Ready-made scenarios


def basic_scenario(variant, threads, slots, batches, bug=None):
    """Threads enter round-robin; the first `batches` threads each retire
    one batch covering every slot; everyone leaves."""
    single = variant in ("hyaline1", "hyaline-1s")
    robust = variant in ("hyaline-s", "hyaline-1s")
    if single and threads > slots:
        raise ValueError("dedicated-slot variants need one slot per thread")
    specs = []
    for i in range(batches):
        nodes = tuple(f"B{i}.n{j}" for j in range(slots))
        specs.append(BatchSpec(f"B{i}", nodes, slots))
    programs = []
    for i in range(threads):
        ops = []
        if robust and i < batches:
            ops.extend(("alloc", n) for n in specs[i].nodes)
        ops.append(("enter", i if single else i % slots))
        if i < batches:
            ops.append(("retire", f"B{i}"))
        ops.append(("leave",))
        programs.append(ops)
    return Scenario(variant, slots, programs, specs, freq=1, bug=bug)


def stalled_reader_scenario(bug=None):
    """Era-validated scenario with a stalled reader.

    Thread 0 enters, era-validates a dereference of location L, then
    stalls forever while holding its handle.  Thread 1 allocates fresh
    nodes (advancing the era clock), briefly publishes one of them at L,
    unlinks it, retires the batch and leaves.  Safety demands that the
    batch is never freed while thread 0 holds a validated pointer into
    it; liveness of the skip logic is exercised because thread 0's slot
    may lawfully be skipped when its access era predates every birth
    stamp in the batch.
    """
    specs = [BatchSpec("B0", ("B0.y", "B0.n1"), 2)]
    programs = [
        [("enter", 0), ("deref", "L"), ("stall",)],
        [("alloc", "B0.y"), ("alloc", "B0.n1"), ("enter", 1),
         ("publish", "L", "B0.y"), ("publish", "L", None),
         ("retire", "B0"), ("leave",)],
    ]
    return Scenario("hyaline-s", 2, programs, specs,
                    locs={"L": "X0"}, freq=1, has_stall=True, bug=bug)


def single_slot_handoff_scenario():
    """One slot, three threads, two single-node batches.

    The classic handoff: the first retirer's batch is freed by the
    second thread's leave, and the second batch by the third thread's
    leave, even though neither retirer could free anything itself.
    """
    specs = [BatchSpec("B1", ("N1",), 1), BatchSpec("B2", ("N2",), 1)]
    programs = [
        [("enter", 0), ("retire", "B1"), ("leave",)],
        [("enter", 0), ("retire", "B2"), ("leave",)],
        [("enter", 0), ("leave",)],
    ]
    return Scenario("hyaline", 1, programs, specs)


#: Schedule for `single_slot_handoff_scenario` reproducing the handoff:
#: thread 0 enters and retires B1; thread 1 enters and half-retires B2
#: (insertion done, displacement contribution still pending); thread 2
#: enters; thread 0 leaves (decrementing B1 to -1); thread 1 finishes the
#: displacement contribution (+2) and leaves, freeing B1; thread 2
#: leaves last and frees B2 via the detach contribution.
SINGLE_SLOT_HANDOFF_SCHEDULE = (
    0, 0, 0,
    1, 1, 1,
    2,
    0, 0, 0,
    1, 1, 1, 1,
    2, 2, 2,
)


# ---------------------------------------------------------------------------
# Lock-step agreement with the production implementation


class LockstepHook:
    """Serializes production atomic steps according to a model schedule."""

    def __init__(self, schedule, timeout=30.0):
        self.schedule = list(schedule)
        self.timeout = timeout
        self.pos = 0
        self.cv = threading.Condition()
        self.tids = {}
        self.failed = None

    def register(self, tid):
        with self.cv:
            self.tids[threading.get_ident()] = tid

    def pre(self, kind):
        me = self.tids[threading.get_ident()]
        deadline = None
        with self.cv:
            while True:
                if self.failed:
                    raise RuntimeError(self.failed)
                if self.pos >= len(self.schedule):
                    self.failed = (f"thread {me} attempted step {kind} "
                                   f"beyond the schedule")
                    self.cv.notify_all()
                    raise RuntimeError(self.failed)
                if self.schedule[self.pos] == me:
                    return
                if not self.cv.wait(self.timeout):
                    self.failed = (f"lock-step stall: thread {me} waited on "
                                   f"step {self.pos}, scheduled for thread "
                                   f"{self.schedule[self.pos]}")
                    self.cv.notify_all()
                    raise RuntimeError(self.failed)

    def post(self, kind):
        with self.cv:
            self.pos += 1
            self.cv.notify_all()


def model_outcome(sc, schedule):
    """(frozen set of freed batches, counters of surviving retired batches)."""
    node = run_schedule(sc, schedule)
    st = node.state
    if st.violations:
        raise AssertionError(f"model violation: {st.violations[0]}")
    freed = frozenset(st.freed_at)
    survivors = {b: st.ctr[b] for b in st.retired if b not in st.freed_at}
    return freed, survivors


def production_outcome(sc, schedule, timeout=30.0):
    """Replay a model schedule on the real general scheme, lock-step.

    Supported for the plain shared-slot variant, whose model steps map
    one-to-one onto the production build's hooked atomic operations.
    """
    if sc.variant != "hyaline":
        raise ValueError("lock-step replay supports the plain shared-slot "
                         "variant only")
    from . import atomics
    from .core import ReclaimNode
    from .general import HyalineScheme

    node_batch = {}
    freed_by_batch = {}

    def on_free(n):
        batch = node_batch[id(n)]
        freed_by_batch[batch] = freed_by_batch.get(batch, 0) + 1

    scheme = HyalineScheme(slots=sc.k, batch_min=1, reclaim=on_free)
    real = {}
    counters = {}
    for name, spec in sc.batches.items():
        nodes = [ReclaimNode() for _ in range(spec.k + 1)]
        real[name] = nodes
        counters[name] = nodes[0]  # first retired node becomes the counter
        for n in nodes:
            node_batch[id(n)] = name

    hook = LockstepHook(schedule, timeout=timeout)
    errors = []

    def worker(tid):
        try:
            hook.register(tid)
            scheme.attach_thread(tid)
            handle = None
            for op in sc.programs[tid]:
                kind = op[0]
                if kind == "enter":
                    handle = scheme.enter(op[1])
                elif kind == "leave":
                    scheme.leave(handle)
                elif kind == "retire":
                    for n in real[op[1]]:
                        scheme.retire_node(n)
                elif kind == "stall":
                    return
                else:
                    raise ValueError(
                        f"op {kind!r} not supported in lock-step replay")
        except Exception as exc:  # surfaced to the caller after join
            errors.append(exc)
            with hook.cv:
                if not hook.failed:
                    hook.failed = repr(exc)
                hook.cv.notify_all()

    threads = [threading.Thread(target=worker, args=(tid,))
               for tid in range(sc.nthreads)]
    atomics.set_step_hook(hook)
    try:
        for t in threads:
            t.start()
        for t in threads:
            t.join(timeout=timeout + 5)
    finally:
        atomics.set_step_hook(None)
    if errors:
        raise AssertionError(f"lock-step replay failed: {errors[0]!r}")
    if any(t.is_alive() for t in threads):
        raise AssertionError("lock-step replay deadlocked")
    if hook.pos != len(schedule):
        raise AssertionError(
            f"production consumed {hook.pos} of {len(schedule)} steps")

    expected = {name: len(nodes) for name, nodes in real.items()}
    freed = frozenset(b for b, n in freed_by_batch.items()
                      if n == expected[b])
    for b, n in freed_by_batch.items():
        if n != expected[b]:
            raise AssertionError(
                f"batch {b} partially freed: {n} of {expected[b]} nodes")
    survivors = {b: counters[b].shared for b in sc.batches
                 if b not in freed}
    return freed, survivors
