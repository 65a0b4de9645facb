from .streams import RngStreams
from .arrivals import ArrivalSpec, ArrivalProcess, sample_arrivals
from .channel import SwapOutcomes, sample_link_generation, sample_swap_outcomes, swap_trial

__all__ = [
    "RngStreams",
    "ArrivalSpec",
    "ArrivalProcess",
    "sample_arrivals",
    "SwapOutcomes",
    "sample_link_generation",
    "sample_swap_outcomes",
    "swap_trial",
]
