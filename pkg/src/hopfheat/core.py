"""Small shared value types."""
from dataclasses import dataclass, field, replace


@dataclass(frozen=True)
class ModelParams:
    """Fibration index n: the sphere is S^{4n+3}, the base HP^n."""
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")


def as_n(params):
    """Accept ModelParams or a bare integer."""
    return params.n if isinstance(params, ModelParams) else ModelParams(int(params)).n


@dataclass(frozen=True)
class Truncation:
    """Series cutoff policy.

    term_tol is relative: terms are dropped once their bound falls below
    term_tol times the running sum of absolute terms. The achieved tail
    bound of an evaluation is reported back in a copy of this object.
    """
    max_index: int = 20000
    term_tol: float = 1e-18
    achieved_tail_bound: float = None

    def __post_init__(self):
        if self.max_index < 1 or not self.term_tol > 0:
            raise ValueError("max_index >= 1 and term_tol > 0 required")

    def report(self, tail):
        return replace(self, achieved_tail_bound=float(tail))


@dataclass
class KernelEval:
    value: object
    error_estimate: object
    diagnostics: dict = field(default_factory=dict)

    def __float__(self):
        return float(self.value)
