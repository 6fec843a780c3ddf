"""Why a batch's counter can start at zero and still defer its free.

A batch inserted into k slots owes one "accounted" contribution per
slot.  Instead of waiting to learn k before initializing the counter,
each slot contribution adds the wrap constant Adjs = floor((2^N-1)/k)+1
modulo 2^N: any fewer than k contributions leave the counter nonzero,
and exactly k of them wrap it back to zero.  Thread references ride on
top as ordinary +1/-1 deltas, so "counter hits zero" means "all slots
accounted for and no reader left" -- a single test, no flag bits.

Run: python3 demos/counter_algebra.py
"""

from hyaline.core import compute_adjs

N = 64
MOD = 1 << N

for k in (1, 2, 4, 8):
    adjs = compute_adjs(k, N)
    print(f"k={k}: Adjs = {adjs:#x}")
    total = 0
    for i in range(1, k + 1):
        total = (total + adjs) % MOD
        state = "ZERO (all slots accounted)" if total == 0 else "nonzero"
        print(f"  after {i} slot contribution(s): counter = {total:#x} "
              f"-> {state}")
    print()

print("With thread references mixed in (k=4):")
adjs = compute_adjs(4, N)
counter = 0
events = [
    ("slot 0 accounted (+Adjs)", adjs),
    ("slot 1 accounted, 2 readers held it (+Adjs+2)", adjs + 2),
    ("reader leaves (-1)", -1),
    ("slot 2 accounted (+Adjs)", adjs),
    ("slot 3 accounted (+Adjs)", adjs),
    ("last reader leaves (-1)", -1),
]
for label, delta in events:
    counter = (counter + delta) % MOD
    print(f"  {label:<48} counter = {counter:#x}"
          + ("   << free the batch" if counter == 0 else ""))
