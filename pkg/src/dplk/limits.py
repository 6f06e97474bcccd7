"""Blow-up guards and their environment override.

The expansions in this package (full DNF, the disjoint-paths translation of
apex projection, pairing enumeration) are intrinsically exponential; each is
guarded by an explicit budget.  ``DPLK_BUDGET`` overrides the formula-side
budgets for a whole process.
"""

import os

from .errors import BudgetExceeded

DNF_CLAUSE_BUDGET = 10**6
ZETA_NODE_BUDGET = 10**7
PAIRINGS_MAX_N = 8


def dnf_budget():
    return _env_override(DNF_CLAUSE_BUDGET)


def zeta_budget():
    return _env_override(ZETA_NODE_BUDGET)


def _env_override(default):
    raw = os.environ.get("DPLK_BUDGET")
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise BudgetExceeded("env", {"DPLK_BUDGET": raw, "reason": "not an integer"})


def check_budget(guard, amount, budget, **details):
    """Raise BudgetExceeded when ``amount`` exceeds ``budget``."""
    if amount > budget:
        raise BudgetExceeded(guard, {"amount": amount, "budget": budget, **details})
