from ._core import (
    CoopgridError,
    Scenario,
    check_core,
    coalition_value,
    impute,
    leastcore,
    load_scenario,
    nucleolus,
    parse_scenario,
    run_cases,
    shapley,
    support_ellipsoid,
    sweep,
)

__all__ = [
    "CoopgridError",
    "Scenario",
    "check_core",
    "coalition_value",
    "impute",
    "leastcore",
    "load_scenario",
    "nucleolus",
    "parse_scenario",
    "run_cases",
    "shapley",
    "support_ellipsoid",
    "sweep",
]
