"""Model parameters for the relaxed wave equation and its parabolic limit."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Params:
    """Physical parameters of the third-order-in-time acoustic model.

    tau       thermal relaxation time (> 0)
    delta     sound diffusivity (> 0; the dissipative regime)
    b_over_a  quadratic nonlinearity coefficient B/A (0 switches it off)

    The wave speed is normalised to 1 throughout, so per spatial mode of
    magnitude ``r`` the linear equation reads

        tau u''' + u'' + (delta + tau) r^2 u' + r^2 u = f.
    """

    tau: float
    delta: float
    b_over_a: float = 0.0

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if self.b_over_a < 0:
            raise ValueError(f"b_over_a must be nonnegative, got {self.b_over_a}")

    @property
    def damping_gap(self) -> float:
        """delta - tau; positive exactly when the quadratic energy is coercive."""
        return self.delta - self.tau
