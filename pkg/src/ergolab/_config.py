"""Run-wide resource budgets.

Every operation whose cost grows combinatorially checks one of these caps
before doing any work. ``ERGOLAB_BUDGET`` overrides the orbit-step cap.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, replace


class BudgetExceeded(ValueError):
    """A requested computation is larger than the configured budget."""


@dataclass(frozen=True)
class Budgets:
    orbit_steps: int = 2_000_000_000
    grid_points: int = 1_000_000
    frequencies: int = 10_000
    dictionary: int = 100_000
    falsifier_vectors: int = 10_000_000
    step_cells: int = 100_000


def _from_env() -> Budgets:
    raw = os.environ.get("ERGOLAB_BUDGET")
    if raw is None:
        return Budgets()
    try:
        steps = int(float(raw))
    except ValueError:
        raise ValueError(f"ERGOLAB_BUDGET must be an integer, got {raw!r}") from None
    if steps < 1:
        raise ValueError("ERGOLAB_BUDGET must be positive")
    return replace(Budgets(), orbit_steps=steps)


_budgets = _from_env()


def budgets() -> Budgets:
    return _budgets


def set_budgets(**changes: int) -> Budgets:
    """Replace some budget caps; returns the previous settings."""
    global _budgets
    previous = _budgets
    _budgets = replace(_budgets, **changes)
    return previous


def check(kind: str, required: int, what: str = "") -> None:
    limit = getattr(_budgets, kind)
    if required > limit:
        label = what or kind.replace("_", " ")
        raise BudgetExceeded(f"{label} needs {required} but the {kind} budget is {limit}")
