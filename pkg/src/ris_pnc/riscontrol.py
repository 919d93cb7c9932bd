"""RIS phase configuration and the resulting scalar cascaded gain."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class RisPhaseConfig:
    """Per-element phase ``theta`` in [0, 2pi) and amplitude ``mu`` in [0, 1].

    ``undefined`` counts elements whose estimated coefficient was exactly zero
    and therefore had no angle (those get ``theta = 0``).
    """

    theta: np.ndarray
    mu: np.ndarray
    undefined: int = 0

    def __post_init__(self):
        if self.theta.shape != self.mu.shape:
            raise ValueError("theta and mu must have the same length")
        if np.any((self.mu < 0) | (self.mu > 1)):
            raise ValueError("mu must lie in [0, 1]")

    @property
    def n_elements(self) -> int:
        return self.theta.shape[-1]

    def reflection(self) -> np.ndarray:
        """Diagonal of the RIS phase matrix, ``mu * exp(j theta)``."""
        return self.mu * np.exp(1j * self.theta)


def _wrap(theta):
    out = np.mod(theta, TWO_PI)
    # np.mod can return exactly 2pi for tiny negative inputs
    return np.where(out >= TWO_PI, 0.0, out)


def optimal_phases(h_est, g_est) -> RisPhaseConfig:
    """Co-phase every element: ``theta_i = -(angle(h_i) + angle(g_i)) mod 2pi``."""
    h_est = np.asarray(h_est, dtype=complex)
    g_est = np.asarray(g_est, dtype=complex)
    if h_est.shape != g_est.shape:
        raise ValueError("h and g must have the same length")
    zero = (h_est == 0) | (g_est == 0)
    theta = np.where(zero, 0.0, _wrap(-(np.angle(h_est) + np.angle(g_est))))
    return RisPhaseConfig(theta=theta, mu=np.ones(theta.shape), undefined=int(zero.sum()))


def random_phases(n_elements: int, rng: np.random.Generator) -> RisPhaseConfig:
    if n_elements < 1:
        raise ValueError("a RIS needs at least one element")
    theta = rng.uniform(0.0, TWO_PI, n_elements)
    return RisPhaseConfig(theta=theta, mu=np.ones(n_elements))


def effective_gain(h, g, cfg: RisPhaseConfig) -> complex:
    """Summed cascaded gain ``sum_i g_i mu_i exp(j theta_i) h_i``.

    Pass the *true* channels here; the phases may come from estimates.
    """
    h = np.asarray(h, dtype=complex)
    g = np.asarray(g, dtype=complex)
    if not (h.shape == g.shape == cfg.theta.shape):
        raise ValueError("h, g and the phase configuration must have equal lengths")
    return complex(np.sum(g * cfg.reflection() * h))
