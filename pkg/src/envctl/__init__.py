"""Exact envelopes of extensions of a prior and a strategy, with an LP coherence oracle."""

from envctl.algebra import (
    AtomSpace,
    BadIndex,
    EmptyConditioning,
    EmptyRowOrColumn,
    Event,
    Subalgebra,
    build_space,
    event_of,
    finite_partitions,
    gn_implies,
)

__all__ = [
    "AtomSpace",
    "BadIndex",
    "EmptyConditioning",
    "EmptyRowOrColumn",
    "Event",
    "Subalgebra",
    "build_space",
    "event_of",
    "finite_partitions",
    "gn_implies",
]
