"""Square M-QAM (and BPSK) mapping with per-dimension PAM digits.

Every symbol is represented by one digit per real dimension: ``(d_I, d_Q)``
for square QAM and ``(d_I,)`` for BPSK. Digit arrays carry the dimensions on
the last axis, so a batch of symbols has shape ``(..., ndim)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SUPPORTED_ORDERS = (2, 4, 16, 64)
LABELINGS = ("natural", "gray")


@dataclass(frozen=True)
class Modulation:
    """Square M-QAM constellation normalized to unit average energy.

    ``labeling`` selects how the ``log2(q)`` bits of each dimension map to a
    digit index: ``"natural"`` binary (default, required by the modular PNC
    map) or ``"gray"``.
    """

    order: int
    labeling: str = "natural"
    digits_per_dim: int = field(init=False)
    ndim: int = field(init=False)
    bits_per_dim: int = field(init=False)
    scale: float = field(init=False)

    def __post_init__(self):
        if self.order not in SUPPORTED_ORDERS:
            raise ValueError(
                f"unsupported modulation order {self.order!r}; "
                f"valid orders are {{{', '.join(map(str, SUPPORTED_ORDERS))}}}"
            )
        if self.labeling not in LABELINGS:
            raise ValueError(f"labeling must be one of {LABELINGS}, got {self.labeling!r}")
        if self.order == 2:
            q, ndim, scale = 2, 1, 1.0
        else:
            q = int(round(np.sqrt(self.order)))
            ndim = 2
            # mean |(2i-(q-1)) + j(2k-(q-1))|^2 over the grid = 2(q^2-1)/3
            scale = 1.0 / np.sqrt(2.0 * (q * q - 1) / 3.0)
        object.__setattr__(self, "digits_per_dim", q)
        object.__setattr__(self, "ndim", ndim)
        object.__setattr__(self, "bits_per_dim", int(np.log2(q)))
        object.__setattr__(self, "scale", float(scale))

    @property
    def bits_per_symbol(self) -> int:
        return int(np.log2(self.order))

    def all_digits(self) -> np.ndarray:
        """Every digit tuple of the constellation, shape ``(M, ndim)``."""
        q = self.digits_per_dim
        grids = np.meshgrid(*([np.arange(q)] * self.ndim), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)

    def constellation(self) -> np.ndarray:
        """Constellation points in :meth:`all_digits` order."""
        return digits_to_symbol(self.all_digits(), self)


def _gray_encode(d):
    return d ^ (d >> 1)


def _gray_decode(g):
    d = g.copy()
    shift = g >> 1
    while np.any(shift):
        d ^= shift
        shift = shift >> 1
    return d


def bits_to_digits(bits, m: Modulation) -> np.ndarray:
    """Group bits into per-dimension digits (I digits first, then Q, MSB first).

    Returns an integer array of shape ``(n_symbols, ndim)``.
    """
    bits = np.asarray(bits, dtype=np.int64).ravel()
    k = m.bits_per_symbol
    if bits.size % k:
        raise ValueError(
            f"bit count {bits.size} is not a multiple of bits_per_symbol={k}"
        )
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("bits must be 0 or 1")
    b = bits.reshape(-1, m.ndim, m.bits_per_dim)
    weights = 1 << np.arange(m.bits_per_dim - 1, -1, -1)
    labels = b @ weights
    if m.labeling == "gray":
        return _gray_decode(labels)
    return labels


def digits_to_bits(digits, m: Modulation) -> np.ndarray:
    """Inverse of :func:`bits_to_digits`; returns a flat 0/1 array."""
    d = np.asarray(digits, dtype=np.int64).reshape(-1, m.ndim)
    _check_range(d, m.digits_per_dim)
    labels = _gray_encode(d) if m.labeling == "gray" else d
    shifts = np.arange(m.bits_per_dim - 1, -1, -1)
    return ((labels[..., None] >> shifts) & 1).astype(np.int8).ravel()


def _check_range(d, q):
    if np.any((d < 0) | (d >= q)):
        raise ValueError(f"digit out of range [0, {q})")


def digits_to_symbol(digits, m: Modulation):
    """Map digits of shape ``(..., ndim)`` to complex points of shape ``(...)``."""
    d = np.asarray(digits, dtype=np.int64)
    if d.shape[-1:] != (m.ndim,):
        raise ValueError(f"digits must have trailing dimension {m.ndim}, got shape {d.shape}")
    q = m.digits_per_dim
    _check_range(d, q)
    amp = (2 * d - (q - 1)).astype(float) * m.scale
    if m.ndim == 1:
        return amp[..., 0] + 0j
    return amp[..., 0] + 1j * amp[..., 1]


def nearest_index(u, offset):
    """Index i of the nearest level ``2i - offset`` (unclipped).

    Exact midpoints resolve to the lower index.
    """
    t = (np.asarray(u, dtype=float) + offset) / 2.0
    return np.ceil(t - 0.5).astype(np.int64)


def detect_symbol(y, m: Modulation) -> np.ndarray:
    """Nearest-point hard decision, returned as digits of shape ``(..., ndim)``.

    Square-grid slicing per dimension; equivalent to exhaustive Euclidean
    search. Ties break toward the smaller digit.
    """
    y = np.asarray(y, dtype=complex)
    q = m.digits_per_dim
    parts = [y.real] if m.ndim == 1 else [y.real, y.imag]
    out = [np.clip(nearest_index(p / m.scale, q - 1), 0, q - 1) for p in parts]
    return np.stack(out, axis=-1)
