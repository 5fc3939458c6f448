from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class WeightFn:
    """A smooth weight with analytic derivatives.

    support_lo/support_hi bound supp(w'); value_lo/value_hi bound supp(w)
    (infinite when w does not vanish on a half-line); plateau is the interval
    where w == 1, when there is one.
    """

    name: str
    evaluate: ArrayFn
    derivative: ArrayFn
    support_lo: float
    support_hi: float
    value_lo: float = -np.inf
    value_hi: float = np.inf
    second_derivative: Optional[ArrayFn] = None
    plateau: Optional[Tuple[float, float]] = None
    constant: Optional[float] = None

    def __call__(self, x):
        return self.evaluate(np.asarray(x, dtype=float))
