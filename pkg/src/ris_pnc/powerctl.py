"""UE power control that equalizes the two arrival amplitudes at the relay."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class AllocationError(ValueError):
    """Raised when an effective gain is zero and no finite allocation exists."""


@dataclass(frozen=True)
class PowerAllocation:
    """Transmit powers in watts. Fields are arrays when allocating a batch."""

    p_a: float
    p_b: float
    gamma: float
    p_max: float


def allocate(alpha_a, alpha_b, p_max: float) -> PowerAllocation:
    """The weaker UE transmits at ``p_max``, the stronger one at ``gamma**2 * p_max``.

    ``gamma = min(|alpha_a|, |alpha_b|) / max(|alpha_a|, |alpha_b|)``, which
    makes ``sqrt(p_a)|alpha_a| == sqrt(p_b)|alpha_b|``. Accepts scalars or
    equally-shaped arrays of gains.
    """
    if p_max <= 0:
        raise ValueError("p_max must be positive")
    mag_a = np.abs(np.asarray(alpha_a))
    mag_b = np.abs(np.asarray(alpha_b))
    if np.any(mag_a == 0) or np.any(mag_b == 0):
        raise AllocationError("zero effective gain: equal-arrival allocation impossible")
    a_strong = mag_a >= mag_b
    gamma = np.where(a_strong, mag_b / mag_a, mag_a / mag_b)
    p_weak = np.full(gamma.shape, float(p_max))
    p_strong = gamma * gamma * p_max
    p_a = np.where(a_strong, p_strong, p_weak)
    p_b = np.where(a_strong, p_weak, p_strong)
    if gamma.ndim == 0:
        return PowerAllocation(float(p_a), float(p_b), float(gamma), float(p_max))
    return PowerAllocation(p_a, p_b, gamma, float(p_max))
