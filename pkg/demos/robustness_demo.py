"""What a stalled reader does to each scheme's memory footprint.

One worker enters its critical section, dereferences once, and never
leaves.  Epoch-based reclamation can free nothing from that moment on;
the plain retirement-list scheme keeps pinning every batch inserted
into the stalled thread's slot.  The era-validated variants notice that
the stalled slot's access era predates new batches' birth stamps, skip
it, and route new entries away from it -- the footprint plateaus.

Run: python3 demos/robustness_demo.py   (about a minute)
"""

from hyaline.bench import BenchConfig, run

COMMON = dict(structure="hashmap", workload="write", threads=4, stall=1,
              duration=10.0, prefill=2000, key_range=4000, batch_min=16,
              seed=7)

RUNS = [
    ("ebr", dict(emptyf=1000)),
    ("hyaline", dict(slots=2)),
    ("hyaline-s", dict(slots=2, threshold=200, freq=30)),
    ("hyaline-1s", dict(slots=8, freq=30)),
]

print(f"{'scheme':<12} {'t=2s':>8} {'t=10s':>8} {'growth':>7}  verdict")
for scheme, extra in RUNS:
    rec = run(BenchConfig(scheme=scheme, **extra, **COMMON))
    u2 = rec.unreclaimed_at(2.0)
    u10 = rec.unreclaimed_at(10.0)
    growth = u10 / u2 if u2 else float("inf")
    verdict = "plateaus (robust)" if growth <= 2.0 else "keeps growing"
    print(f"{scheme:<12} {u2:>8} {u10:>8} {growth:>6.1f}x  {verdict}")
    if rec.stalled_acks:
        slot, acks = next(iter(rec.stalled_acks.items()))
        print(f"{'':12} stalled slot {slot} accumulated {acks} "
              f"unacknowledged insertions -> new entries route around it")
