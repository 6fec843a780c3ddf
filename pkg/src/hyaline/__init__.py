"""Reference-counted retirement-list memory reclamation for lock-free
data structures, with an epoch-based baseline, an exhaustive
interleaving oracle, and a benchmark harness."""

from .base import DoubleFreeError, NoReclamation, ReclamationScheme
from .core import ReclaimNode, compute_adjs, slot_location, wrap_add
from .ebr import EBRScheme
from .general import Handle, HyalineScheme
from .robust import Hyaline1SScheme, HyalineSScheme
from .single import Hyaline1Scheme
from .structures import HarrisMichaelList, LockFreeHashMap, UseAfterFreeError

SCHEME_NAMES = ("hyaline", "hyaline1", "hyaline-s", "hyaline-1s", "ebr", "none")


def create_scheme(name, *, slots=8, batch_min=64, reclaim=None,
                  freq=150, threshold=8192, epochf=150, emptyf=120,
                  word_bits=64):
    """Build a reclamation scheme by benchmark name."""
    if name == "hyaline":
        return HyalineScheme(slots=slots, batch_min=batch_min,
                             reclaim=reclaim, word_bits=word_bits)
    if name == "hyaline1":
        return Hyaline1Scheme(slots=slots, batch_min=batch_min,
                              reclaim=reclaim, word_bits=word_bits)
    if name == "hyaline-s":
        return HyalineSScheme(slots=slots, batch_min=batch_min,
                              reclaim=reclaim, word_bits=word_bits,
                              freq=freq, threshold=threshold)
    if name == "hyaline-1s":
        return Hyaline1SScheme(slots=slots, batch_min=batch_min,
                               reclaim=reclaim, word_bits=word_bits, freq=freq)
    if name == "ebr":
        return EBRScheme(reclaim=reclaim, epochf=epochf, emptyf=emptyf)
    if name == "none":
        return NoReclamation(reclaim=reclaim)
    raise ValueError(f"unknown scheme {name!r}; expected one of {SCHEME_NAMES}")
