"""Atomic cells and the lock-step hook protocol."""

import threading

from hyaline.atomics import (
    AtomicHead,
    AtomicMarkRef,
    AtomicRef,
    AtomicWord,
    set_step_hook,
)


class TestAtomicWord:
    def test_fetch_add_wraps_at_mask(self):
        w = AtomicWord((1 << 64) - 1, bits=64)
        assert w.fetch_add(1) == (1 << 64) - 1
        assert w.load() == 0

    def test_compare_exchange(self):
        w = AtomicWord(5)
        assert not w.compare_exchange(4, 9)
        assert w.compare_exchange(5, 9)
        assert w.load() == 9

    def test_max_update_is_monotonic(self):
        w = AtomicWord(10)
        assert w.max_update(7) == 10
        assert w.max_update(12) == 12
        assert w.load() == 12


class TestAtomicHead:
    def test_pair_updated_as_unit(self):
        h = AtomicHead()
        obj = object()
        assert h.fetch_add_ref(1) == (0, None)
        assert h.load() == (1, None)
        assert not h.compare_exchange(2, None, 0, obj)
        assert h.compare_exchange(1, None, 1, obj)
        assert h.exchange(0, None) == (1, obj)

    def test_pointer_compared_by_identity(self):
        h = AtomicHead()
        a, b = [], []  # equal but distinct objects
        h.store(1, a)
        assert not h.compare_exchange(1, b, 1, None)
        assert h.compare_exchange(1, a, 1, None)


class TestAtomicMarkRef:
    def test_mark_and_ref_move_together(self):
        c = AtomicMarkRef()
        node = object()
        assert c.load() == (None, False)
        assert c.compare_exchange(None, False, node, False)
        assert not c.compare_exchange(node, True, None, False)
        assert c.compare_exchange(node, False, node, True)
        assert c.load() == (node, True)


class _RecordingHook:
    def __init__(self):
        self.events = []

    def pre(self, kind):
        self.events.append(("pre", kind))

    def post(self, kind):
        self.events.append(("post", kind))


class TestStepHook:
    def test_pre_and_post_bracket_each_operation(self):
        hook = _RecordingHook()
        set_step_hook(hook)
        try:
            w = AtomicWord(0)
            w.fetch_add(1)
            h = AtomicHead()
            h.load()
        finally:
            set_step_hook(None)
        assert hook.events == [
            ("pre", "word_faa"), ("post", "word_faa"),
            ("pre", "head_load"), ("post", "head_load"),
        ]

    def test_mark_ref_is_never_hooked(self):
        hook = _RecordingHook()
        set_step_hook(hook)
        try:
            c = AtomicMarkRef()
            c.load()
            c.store(None, False)
            c.compare_exchange(None, False, None, True)
        finally:
            set_step_hook(None)
        assert hook.events == []

    def test_serializing_hook_orders_concurrent_increments(self):
        """A hook that admits threads in a fixed order totally orders ops."""
        schedule = [0, 1] * 50
        cv = threading.Condition()
        pos = [0]
        tids = {}
        order = []

        class Hook:
            def pre(self, kind):
                me = tids[threading.get_ident()]
                with cv:
                    while schedule[pos[0]] != me:
                        cv.wait()

            def post(self, kind):
                with cv:
                    order.append(tids[threading.get_ident()])
                    pos[0] += 1
                    cv.notify_all()

        w = AtomicWord(0)

        def body(me):
            tids[threading.get_ident()] = me
            with cv:
                pass
            for _ in range(50):
                w.fetch_add(1)

        threads = [threading.Thread(target=body, args=(i,)) for i in range(2)]
        set_step_hook(Hook())
        try:
            for t in threads:
                t.start()
            for t in threads:
                t.join()
        finally:
            set_step_hook(None)
        assert w.load() == 100
        assert order == schedule
