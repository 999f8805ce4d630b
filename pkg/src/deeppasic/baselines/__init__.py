"""Classical interference-management chains rate-matched to the learned system."""

from .budget import LinkBudget
from .jpeg import jpeg_decode_or_gray, jpeg_fit_to_budget
from .link import LinkResult, run_classical_link, run_classical_links
from .qam import qam16_hard_demap, qam16_map, qam16_soft_demod
from .receivers import receive_orthogonal, receive_sic, receive_tin
from .turbo import TurboConfig, make_interleaver, turbo_decode, turbo_encode

__all__ = [
    "LinkBudget",
    "LinkResult",
    "TurboConfig",
    "jpeg_decode_or_gray",
    "jpeg_fit_to_budget",
    "make_interleaver",
    "qam16_hard_demap",
    "qam16_map",
    "qam16_soft_demod",
    "receive_orthogonal",
    "receive_sic",
    "receive_tin",
    "run_classical_link",
    "run_classical_links",
    "turbo_decode",
    "turbo_encode",
]
