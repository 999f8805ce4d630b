"""Symbol-budget accounting that keeps classical chains rate-matched.

The learned two-stage scheme consumes S_layers * h_feat * w_feat real
channel dimensions per experiment; at two real dimensions per complex use
that is T = S * h * w / 2 complex channel uses shared by the K users.
Orthogonal users split the horizon (T/K uses each); TIN and SIC users each
occupy the full horizon T.  With 16QAM and the rate-1/3 turbo code the
per-user info-bit budget is uses * 4 / 3 less termination overhead.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import InvalidConfig, PlanInconsistent
from ..plan import ResourcePlan
from .turbo import TurboConfig

BITS_PER_SYMBOL = 4  # 16QAM
SCHEMES = ("orthogonal", "tin", "sic")


@dataclass(frozen=True)
class LinkBudget:
    """Channel-use and bit budgets for one experiment configuration."""

    s_layers: int
    h_feat: int
    w_feat: int
    k_users: int
    tail_bits: int = TurboConfig().tail_bits

    def __post_init__(self):
        if (self.s_layers * self.h_feat * self.w_feat) % 2:
            raise PlanInconsistent("total real dimensions must be even (complex pairing)")

    @classmethod
    def from_plan(cls, plan: ResourcePlan, cfg: TurboConfig | None = None) -> "LinkBudget":
        tail = (cfg or TurboConfig()).tail_bits
        return cls(plan.s_layers, plan.h_feat, plan.w_feat, plan.k_users, tail)

    @property
    def total_complex_uses(self) -> int:
        """T: complex channel uses per experiment, all users together."""
        return self.s_layers * self.h_feat * self.w_feat // 2

    def channel_uses(self, scheme: str) -> int:
        """Per-user complex channel uses for a scheme."""
        if scheme == "orthogonal":
            return self.total_complex_uses // self.k_users
        if scheme in ("tin", "sic"):
            return self.total_complex_uses
        raise InvalidConfig(f"unknown classical scheme {scheme!r}")

    def coded_bits(self, scheme: str) -> int:
        return self.channel_uses(scheme) * BITS_PER_SYMBOL

    def info_bits(self, scheme: str) -> int:
        """Max info bits per user: termination and padding count against the budget."""
        return (self.coded_bits(scheme) - self.tail_bits) // 3

    def info_bit_budget(self, scheme: str) -> int:
        """Byte-aligned JPEG payload budget in bits."""
        return (self.info_bits(scheme) // 8) * 8
