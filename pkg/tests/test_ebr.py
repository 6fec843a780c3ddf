"""Epoch-based baseline: epoch advance, limbo gating, stall behavior."""

import threading

from hyaline.core import ReclaimNode
from hyaline.ebr import EBRScheme


def make_scheme(epochf=150, emptyf=120):
    freed = []
    scheme = EBRScheme(reclaim=freed.append, epochf=epochf, emptyf=emptyf)
    return scheme, freed


class TestEpochClock:
    def test_epoch_ticks_every_epochf_operations(self):
        scheme, _ = make_scheme(epochf=5)
        for _ in range(4):
            scheme.leave(scheme.enter())
        assert scheme.current_epoch() == 0
        scheme.leave(scheme.enter())
        assert scheme.current_epoch() == 1

    def test_reservation_tracks_current_epoch(self):
        scheme, _ = make_scheme(epochf=1)
        handle = scheme.enter()  # first op ticks the epoch, then reserves
        assert handle.reservation == scheme.current_epoch() == 1
        scheme.leave(handle)
        assert handle.reservation is None


class TestLimboGating:
    def test_scan_every_emptyf_retires(self):
        scheme, freed = make_scheme(epochf=1, emptyf=3)
        for _ in range(2):
            scheme.retire_node(ReclaimNode())
        assert freed == []
        scheme.leave(scheme.enter())  # advance the epoch past retire stamps
        scheme.retire_node(ReclaimNode())  # third retire triggers the scan
        assert len(freed) >= 2

    def test_free_requires_epoch_strictly_before_reservation(self):
        scheme, freed = make_scheme(epochf=1, emptyf=1)
        handle = scheme.enter()
        scheme.retire_node(ReclaimNode())  # stamped at the reserved epoch
        assert freed == []
        scheme.leave(handle)
        scheme.leave(scheme.enter())  # tick the epoch forward
        scheme.retire_node(ReclaimNode())
        assert len(freed) >= 1

    def test_no_reservations_means_everything_frees(self):
        scheme, freed = make_scheme(emptyf=1)
        for _ in range(5):
            scheme.retire_node(ReclaimNode())
        assert len(freed) == 5


class TestStall:
    def test_stalled_reservation_blocks_all_frees(self):
        scheme, freed = make_scheme(epochf=1, emptyf=1)
        stalled = {}

        def staller():
            stalled["handle"] = scheme.enter()

        t = threading.Thread(target=staller)
        t.start()
        t.join()

        for _ in range(50):
            scheme.leave(scheme.enter())  # epochs keep advancing
            scheme.retire_node(ReclaimNode())
        assert freed == []  # every stamp >= the stalled reservation
        assert scheme.unreclaimed() == 50

        scheme.leave(stalled["handle"])
        scheme.retire_node(ReclaimNode())
        scheme.finalize()
        assert scheme.unreclaimed() == 0


class TestFinalize:
    def test_finalize_drains_every_threads_limbo(self):
        scheme, freed = make_scheme(emptyf=1000)

        def worker():
            scheme.attach_thread()
            for _ in range(10):
                h = scheme.enter()
                scheme.retire_node(ReclaimNode())
                scheme.leave(h)

        threads = [threading.Thread(target=worker) for _ in range(3)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert scheme.unreclaimed() == 30
        scheme.finalize()
        assert len(freed) == 30
        assert scheme.retired_total() == scheme.freed_total() == 30
