from .dephasing import (
    age_cutoff_ns,
    coherence,
    current_fidelity,
    dephase_prob,
    pair_fidelity,
    should_discard,
    swap_fidelity,
    swapped_pair,
)

__all__ = [
    "age_cutoff_ns",
    "coherence",
    "current_fidelity",
    "dephase_prob",
    "pair_fidelity",
    "should_discard",
    "swap_fidelity",
    "swapped_pair",
]
