"""The reclamation handoff, step by step, on the real scheme.

One shared slot, three threads.  Thread A retires a batch while A and B
are inside; neither retirer can free anything itself -- whoever drops
the last covering reference frees the batch, even a thread that never
retired a node.  This is what spreads deallocation work onto readers.

Run: python3 demos/reclamation_walkthrough.py
"""

from hyaline.core import ReclaimNode
from hyaline.general import HyalineScheme

class NamedNode(ReclaimNode):
    __slots__ = ("payload",)

    def __init__(self, payload):
        super().__init__()
        self.payload = payload


freed = []
scheme = HyalineScheme(slots=1, batch_min=1,
                       reclaim=lambda n: freed.append(n.payload))


def retire_batch(label, size):
    for i in range(size):
        scheme.retire_node(NamedNode(f"{label}.{i}"))


def show(step):
    print(f"{step:<58} freed so far: {freed}")


print("slot 0 is shared by everyone; batch_min=1 seals a batch at 2 nodes\n")

a = scheme.enter()
show("A enters (href 0->1)")

retire_batch("first", 2)
show("A retires a 2-node batch (A still inside: nothing freed)")

b = scheme.enter()
show("B enters; its snapshot includes the first batch")

retire_batch("second", 2)
show("B retires a second batch (A and B both cover it)")

c = scheme.enter()
show("C enters; C never retires anything")

scheme.leave(a)
show("A leaves -- not last, so both batches survive")

scheme.leave(b)
show("B leaves -- settles what its snapshot covered")

scheme.leave(c)
show("C (a pure reader!) leaves last and frees the rest")

assert scheme.unreclaimed() == 0
print("\nledger: retired == freed ==", scheme.retired_total())
