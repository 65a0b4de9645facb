from .region import (
    MembershipReport,
    StationaryPlan,
    boundary_q,
    build_stationary_plan,
    choose_delta,
    kl_divergence,
    never_stable,
    region_membership,
    select_T0,
)

__all__ = [
    "MembershipReport",
    "StationaryPlan",
    "boundary_q",
    "build_stationary_plan",
    "choose_delta",
    "kl_divergence",
    "never_stable",
    "region_membership",
    "select_T0",
]
