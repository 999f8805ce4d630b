"""Two-stage transmission resource accounting.

A :class:`ResourcePlan` ties together the number of users K, the encoder
feature layers E, and the private/common layer split (P, C = E - P).  The
total orthogonal budget is S = U + K*V where U/V are the common/private
lengths; in layer units the same identity reads S_layers = C + K*P.  Given a
budget S and encoding length M, the private length is V = (S - M) / (K - 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InfeasibleBudget, InvalidUserCount, NonIntegralSplit, PlanInconsistent


def private_length(s, m, k):
    """Private-part length (S - M) / (K - 1).

    Works in layer units or real-value units; integer inputs must divide
    exactly (layer-unit arithmetic), float inputs return a float.

    Raises
    ------
    InvalidUserCount
        if k < 2 (a single user has no interference to split against).
    InfeasibleBudget
        if s < m.
    NonIntegralSplit
        if integer inputs do not divide exactly.
    """
    if k < 2:
        raise InvalidUserCount(f"need K >= 2 users, got {k}")
    if s < m:
        raise InfeasibleBudget(f"budget S={s} smaller than encoding length M={m}")
    if isinstance(s, int) and isinstance(m, int) and isinstance(k, int):
        quot, rem = divmod(s - m, k - 1)
        if rem:
            raise NonIntegralSplit(f"(S - M) = {s - m} not divisible by K - 1 = {k - 1}")
        return quot
    return (s - m) / (k - 1)


@dataclass(frozen=True)
class ResourcePlan:
    """Layer-level split and its derived real-value resource counts.

    ``c_layers`` and ``s_layers`` may be passed explicitly (so stored plans
    can be cross-checked) or left to be derived; :func:`validate_plan`
    asserts every identity either way.
    """

    k_users: int
    e_layers: int
    p_layers: int
    h_feat: int
    w_feat: int
    c_layers: int = field(default=-1)
    s_layers: int = field(default=-1)

    def __post_init__(self):
        if self.c_layers < 0:
            object.__setattr__(self, "c_layers", self.e_layers - self.p_layers)
        if self.s_layers < 0:
            object.__setattr__(self, "s_layers", self.c_layers + self.k_users * self.p_layers)

    @classmethod
    def from_budget(cls, k_users, e_layers, s_layers, h_feat, w_feat):
        """Derive the split from a total layer budget via V = (S - M)/(K - 1)."""
        p = private_length(int(s_layers), int(e_layers), int(k_users))
        return cls(k_users, e_layers, p, h_feat, w_feat)

    # real-value views (one real dimension per feature-map cell)
    @property
    def spatial(self):
        return self.h_feat * self.w_feat

    @property
    def m_real(self):
        """Encoding length M = E * h * w."""
        return self.e_layers * self.spatial

    @property
    def u_real(self):
        """Common length U = C * h * w."""
        return self.c_layers * self.spatial

    @property
    def v_real(self):
        """Private length V = P * h * w."""
        return self.p_layers * self.spatial

    @property
    def s_real(self):
        """Total orthogonal resources S = U + K*V."""
        return self.u_real + self.k_users * self.v_real


def validate_plan(plan: ResourcePlan) -> ResourcePlan:
    """Check every plan identity; return the plan unchanged if consistent.

    Raises PlanInconsistent naming the first violated identity.
    """
    if plan.k_users < 2:
        raise PlanInconsistent(f"K >= 2 required, got K={plan.k_users}")
    if plan.h_feat <= 0 or plan.w_feat <= 0:
        raise PlanInconsistent(f"feature dims must be positive, got {plan.h_feat}x{plan.w_feat}")
    if plan.p_layers < 0:
        raise PlanInconsistent(f"P >= 0 violated: P={plan.p_layers}")
    if plan.c_layers < 0:
        raise PlanInconsistent(f"C >= 0 violated: C={plan.c_layers}")
    if plan.c_layers != plan.e_layers - plan.p_layers:
        raise PlanInconsistent(
            f"C = E - P violated: C={plan.c_layers}, E={plan.e_layers}, P={plan.p_layers}"
        )
    if plan.s_layers != plan.c_layers + plan.k_users * plan.p_layers:
        raise PlanInconsistent(
            f"S = C + K*P violated: S={plan.s_layers}, C={plan.c_layers}, "
            f"K={plan.k_users}, P={plan.p_layers}"
        )
    if plan.s_real != plan.u_real + plan.k_users * plan.v_real:
        raise PlanInconsistent("S = U + K*V violated in real units")
    # V = (S - M) / (K - 1), exact in layer units
    try:
        expected_p = private_length(plan.s_layers, plan.e_layers, plan.k_users)
    except (InfeasibleBudget, NonIntegralSplit, InvalidUserCount) as exc:
        raise PlanInconsistent(f"P = (S - E)/(K - 1) violated: {exc}") from exc
    if expected_p != plan.p_layers:
        raise PlanInconsistent(
            f"P = (S - E)/(K - 1) violated: expected P={expected_p}, got {plan.p_layers}"
        )
    return plan
