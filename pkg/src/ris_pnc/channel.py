"""Cascaded UE -> RIS -> relay channels and channel-estimation error.

Each link is free-space path loss times i.i.d. unit-variance complex Gaussian
(Rayleigh) fading per RIS element. Side ``a`` uses the RIS nearest UE_A and
side ``b`` the one nearest UE_B.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0
CEE_MODES = ("absolute", "relative")


@dataclass(frozen=True)
class NodeGeometry:
    """Node positions in metres and the carrier frequency in Hz."""

    ue_a: tuple = (0.0, 2.0, 1.5)
    ue_b: tuple = (0.0, 30.0, 1.5)
    ris_a: tuple = (0.0, 8.0, 2.5)
    ris_b: tuple = (0.0, 22.0, 2.5)
    relay: tuple = (0.0, 14.0, 2.0)
    carrier_hz: float = 28e9

    def __post_init__(self):
        for name in ("ue_a", "ue_b", "ris_a", "ris_b", "relay"):
            pos = tuple(float(v) for v in getattr(self, name))
            if len(pos) != 3:
                raise ValueError(f"{name} must be an (x, y, z) triple")
            object.__setattr__(self, name, pos)
        if self.carrier_hz <= 0:
            raise ValueError("carrier_hz must be positive")
        for d in self.distances().values():
            if d <= 0:
                raise ValueError("coincident nodes: every link distance must be positive")

    @cached_property
    def _losses(self) -> dict:
        return {k: free_space_path_loss(d, self.carrier_hz) for k, d in self.distances().items()}

    def distances(self) -> dict:
        """Link lengths keyed ``h_a, g_a, h_b, g_b`` (UE->RIS is h, RIS->relay is g)."""
        dist = lambda p, r: float(np.linalg.norm(np.subtract(p, r)))
        return {
            "h_a": dist(self.ue_a, self.ris_a),
            "g_a": dist(self.ris_a, self.relay),
            "h_b": dist(self.ue_b, self.ris_b),
            "g_b": dist(self.ris_b, self.relay),
        }

    def path_losses(self) -> dict:
        return dict(self._losses)


def free_space_path_loss(d, f_c):
    """Friis power ratio ``(c / (4 pi d f_c))**2``."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0) or f_c <= 0:
        raise ValueError("distance and carrier frequency must be positive")
    out = (SPEED_OF_LIGHT / (4.0 * np.pi * d * f_c)) ** 2
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class CeeSpec:
    """Channel-estimation error level.

    ``db=None`` means perfect CSI. In ``"absolute"`` mode ``db`` is read as
    dBm, i.e. the error variance is ``10**((db - 30) / 10)`` on the raw,
    path-loss-inclusive coefficients. In ``"relative"`` mode ``db`` is a ratio
    to the mean power of the link being estimated.
    """

    db: float | None = None
    mode: str = "absolute"

    def __post_init__(self):
        if self.mode not in CEE_MODES:
            raise ValueError(f"CEE mode must be one of {CEE_MODES}, got {self.mode!r}")
        if self.db is not None and not np.isfinite(self.db):
            raise ValueError("CEE level must be finite (use None for perfect CSI)")

    def variance(self, link_power: float = 1.0) -> float:
        if self.db is None:
            return 0.0
        if self.mode == "absolute":
            return 10.0 ** ((self.db - 30.0) / 10.0)
        return 10.0 ** (self.db / 10.0) * link_power


@dataclass(frozen=True)
class ChannelRealization:
    """True per-element coefficients plus the estimates the RIS controllers see."""

    h_a: np.ndarray
    g_a: np.ndarray
    h_b: np.ndarray
    g_b: np.ndarray
    path_loss: dict
    h_a_est: np.ndarray = field(default=None)
    g_a_est: np.ndarray = field(default=None)
    h_b_est: np.ndarray = field(default=None)
    g_b_est: np.ndarray = field(default=None)

    def __post_init__(self):
        # estimates default to the truth (perfect CSI)
        for name in ("h_a", "g_a", "h_b", "g_b"):
            if getattr(self, name + "_est") is None:
                object.__setattr__(self, name + "_est", getattr(self, name))

    @property
    def n_elements(self) -> int:
        return self.h_a.shape[-1]


def complex_normal(rng: np.random.Generator, size, variance=1.0) -> np.ndarray:
    """Circularly-symmetric complex Gaussian draws, ``E|x|^2 = variance``."""
    shape = (2, size) if isinstance(size, int) else (2, *size)
    z = rng.standard_normal(shape)
    return np.sqrt(variance / 2.0) * (z[0] + 1j * z[1])


LINKS = ("h_a", "g_a", "h_b", "g_b")


def sample_realization(geom: NodeGeometry, n_elements: int, rng: np.random.Generator) -> ChannelRealization:
    """Draw one block-fading realization with ``n_elements`` per RIS."""
    if n_elements < 1:
        raise ValueError("a RIS needs at least one element")
    pl = geom.path_losses()
    fading = complex_normal(rng, (len(LINKS), n_elements))
    coeffs = {k: np.sqrt(pl[k]) * fading[i] for i, k in enumerate(LINKS)}
    return ChannelRealization(path_loss=pl, **coeffs)


def apply_cee(real: ChannelRealization, spec: CeeSpec, rng: np.random.Generator) -> ChannelRealization:
    """Return a copy whose estimates are the true coefficients plus CN(0, var) error.

    Errors are independent per element and per link. With zero variance no
    random numbers are consumed.
    """
    est = {}
    for k in LINKS:
        true = getattr(real, k)
        var = spec.variance(real.path_loss[k])
        est[k + "_est"] = true + complex_normal(rng, true.shape, var) if var > 0 else true
    return replace(real, **est)
