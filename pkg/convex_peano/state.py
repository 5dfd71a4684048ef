"""
State definitions, shared result types and errors for the partition engine.

The build pipeline passes a ``state`` dictionary between graph nodes.  This
module documents the expected shape of that dictionary and provides the few
types every other module needs: the validation report returned by all
verifiers, and the construction errors raised by the builders.  Keeping them
here avoids circular imports between the kernel modules.
"""

from __future__ import annotations

import datetime
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

# The state object is a plain dictionary with string keys.  Nodes add and
# modify keys as they run:
#   domain, transform, schedule, config   inputs fixed by ``init_level``
#   levels                                list of built PartitionLevel
#   candidate                             level produced by ``build_level``
#   reports                               validation reports of the candidate
#   attempts, station_delta_scale         retry bookkeeping
#   fatal_error, fatal_reason, fatal_error_obj, budget_error
PipelineState = Dict[str, Any]


@dataclass
class ValidationReport:
    """Outcome of one verifier run.

    Verifiers never raise for a failed check; they return a report whose
    ``witness`` locates the first violation (indices, condition name).
    """

    criterion: str
    passed: bool
    witness: Optional[Dict[str, Any]] = None
    tolerances: Dict[str, float] = field(default_factory=dict)
    checked: int = 0

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> Dict[str, Any]:
        return {
            "criterion": self.criterion,
            "pass": self.passed,
            "witness": self.witness,
            "tolerances": dict(self.tolerances),
            "checked": self.checked,
        }


class ConstructionError(RuntimeError):
    """A builder could not certify one of its geometric conditions.

    ``context`` names where it happened (level, parent index, condition).
    """

    def __init__(self, message: str, context: Dict[str, Any] | None = None):
        super().__init__(message)
        self.context: Dict[str, Any] = dict(context or {})


class BudgetExceeded(ConstructionError):
    """The next level (or a single net) would exceed the cell budget."""

    def __init__(
        self,
        message: str,
        context: Dict[str, Any] | None = None,
        levels: List[Any] | None = None,
    ):
        super().__init__(message, context)
        self.levels: List[Any] = list(levels or [])


def build_fatal_error_object(
    *,
    label: str,
    stage: str,
    fatal_reason: str,
    attempts: int,
    context: Dict[str, Any] | None = None,
) -> Dict[str, Any]:
    """JSON-ready record of a run that gave up.

    ``label`` names the domain shape, ``stage`` the node where the failure
    surfaced and ``attempts`` the number of builds of the failing level.
    ``context`` (level, witness, budget figures) is stored verbatim next to a
    UTC timestamp.
    """
    timestamp = datetime.datetime.utcnow().isoformat() + "Z"
    return {
        "pipeline": "convex_peano",
        "label": label,
        "stage": stage,
        "fatal_reason": fatal_reason,
        "attempts": attempts,
        "timestamp": timestamp,
        "context": context or {},
    }


__all__ = [
    "PipelineState",
    "ValidationReport",
    "ConstructionError",
    "BudgetExceeded",
    "build_fatal_error_object",
]
