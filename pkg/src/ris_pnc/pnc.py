"""Denoising PNC map at the relay and peer recovery at the UEs.

The relay never separates the two users. It slices the superposed signal onto
the ``2q - 1`` level grid of per-dimension digit sums and keeps only the sum
modulo ``q``. With ``q = 2`` this is the XOR map.
"""
from __future__ import annotations

import numpy as np

from .modem import Modulation, _check_range, digits_to_symbol, nearest_index


def _digits(x, m: Modulation) -> np.ndarray:
    d = np.asarray(x, dtype=np.int64)
    if d.shape[-1:] != (m.ndim,):
        raise ValueError(f"digits must have trailing dimension {m.ndim}, got shape {d.shape}")
    _check_range(d, m.digits_per_dim)
    return d


def superposed_levels(m: Modulation) -> np.ndarray:
    """Noiseless per-dimension amplitudes ``(2s - 2(q-1)) * scale`` for s in [0, 2q-2]."""
    q = m.digits_per_dim
    s = np.arange(2 * q - 1)
    return (2 * s - 2 * (q - 1)) * m.scale


def superpose(a, b, m: Modulation):
    """Noiseless equal-gain superposition of two users' symbols."""
    return digits_to_symbol(a, m) + digits_to_symbol(b, m)


def detect_sum(y, branch_gain, m: Modulation) -> np.ndarray:
    """Per-dimension digit sum ``s`` in [0, 2q-2] nearest to ``y / branch_gain``."""
    branch_gain = np.asarray(branch_gain, dtype=float)
    if np.any(branch_gain <= 0):
        raise ValueError("branch_gain must be positive")
    u = np.asarray(y, dtype=complex) / branch_gain
    q = m.digits_per_dim
    parts = [u.real] if m.ndim == 1 else [u.real, u.imag]
    # level index s sits at 2s - 2(q-1) in units of scale
    return np.stack(
        [np.clip(nearest_index(p / m.scale, 2 * (q - 1)), 0, 2 * q - 2) for p in parts],
        axis=-1,
    )


def relay_detect(y, branch_gain, m: Modulation) -> np.ndarray:
    """Network-coded digits ``z = s mod q`` from the superposed observation.

    ``branch_gain`` is the common real amplitude with which each user's
    signal reaches the relay after power control.
    """
    return detect_sum(y, branch_gain, m) % m.digits_per_dim


def pnc_map_digits(a, b, m: Modulation) -> np.ndarray:
    return (_digits(a, m) + _digits(b, m)) % m.digits_per_dim


def recover_peer(z, own, m: Modulation) -> np.ndarray:
    """Undo the modular sum with the UE's own digits: ``(z - own) mod q``."""
    return (_digits(z, m) - _digits(own, m)) % m.digits_per_dim
