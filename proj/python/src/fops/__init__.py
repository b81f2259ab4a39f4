"""Fair opportunistic polling: simulator and exact analyzer."""

from ._core import (
    Config,
    Evaluator,
    check_mof_bound,
    load_config,
    mof,
    pof,
    run,
    solve_fixed_point,
    sweep,
    validate,
)

__all__ = [
    "Config",
    "Evaluator",
    "check_mof_bound",
    "load_config",
    "mof",
    "pof",
    "run",
    "solve_fixed_point",
    "sweep",
    "validate",
]
