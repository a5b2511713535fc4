"""Three-valued decision results shared by the certification operations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

YES = "yes"
NO = "no"
UNKNOWN = "unknown"


@dataclass
class Decision:
    """Outcome of a search-based decision procedure.

    status is "yes" (with a certificate), "no" (provable absence), or
    "unknown" (search exhausted its depth without deciding).
    """
    status: str
    certificate: Any = None
    reason: str = ""

    @property
    def is_yes(self) -> bool:
        return self.status == YES

    @property
    def is_no(self) -> bool:
        return self.status == NO

    def exit_code(self) -> int:
        return {YES: 0, NO: 10, UNKNOWN: 20}[self.status]
