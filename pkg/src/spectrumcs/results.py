from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class SolverResult:
    """Output of any reconstruction routine.

    ``selected`` holds 1-based bin indices. For the greedy solvers it is the
    final index set in the order it was built; for the convex ones it is the
    support of ``f_hat``.
    """

    f_hat: np.ndarray
    selected: np.ndarray
    residual_norm: float
    iterations: int
    wall_time: float
    residual_history: list[float] = field(default_factory=list)
    flags: tuple[str, ...] = ()
    info: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return not ({"not_converged", "stall", "capacity_stop", "bracket_failed"} & set(self.flags))
