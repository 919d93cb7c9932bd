"""64-point OFDM framing: 48 data and 4 pilot subcarriers, 16-sample cyclic prefix.

Subcarrier layout follows IEEE 802.11a/p: logical subcarriers -26..26 are
occupied except DC, pilots sit on -21, -7, 7, 21. Logical index ``k`` lives in
DFT bin ``k mod 64``. Both transforms are unitary (``norm="ortho"``), so
per-bin noise variance equals per-sample noise variance.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

PILOT_SUBCARRIERS = (-21, -7, 7, 21)
PILOT_SEQUENCE = np.array([1.0, 1.0, 1.0, -1.0], dtype=complex)


def _default_data():
    return tuple(k for k in range(-26, 27) if k != 0 and k not in PILOT_SUBCARRIERS)


@dataclass(frozen=True)
class OfdmGrid:
    n_fft: int = 64
    n_cp: int = 16
    data_subcarriers: tuple = field(default_factory=_default_data)
    pilot_subcarriers: tuple = PILOT_SUBCARRIERS

    def __post_init__(self):
        data, pilots = set(self.data_bins), set(self.pilot_bins)
        if len(data) != len(self.data_subcarriers) or len(pilots) != len(self.pilot_subcarriers):
            raise ValueError("subcarrier indices must be distinct")
        if data & pilots:
            raise ValueError("data and pilot subcarriers overlap")

    @property
    def data_bins(self) -> np.ndarray:
        return np.mod(self.data_subcarriers, self.n_fft)

    @property
    def pilot_bins(self) -> np.ndarray:
        return np.mod(self.pilot_subcarriers, self.n_fft)

    @property
    def null_bins(self) -> np.ndarray:
        used = set(self.data_bins) | set(self.pilot_bins)
        return np.array([k for k in range(self.n_fft) if k not in used])

    @property
    def n_data(self) -> int:
        return len(self.data_subcarriers)

    @property
    def n_pilots(self) -> int:
        return len(self.pilot_subcarriers)

    @property
    def symbol_length(self) -> int:
        return self.n_fft + self.n_cp


DEFAULT_GRID = OfdmGrid()


def assemble(data, pilots, grid: OfdmGrid = DEFAULT_GRID) -> np.ndarray:
    """Frequency-domain values -> time samples with cyclic prefix.

    ``data`` has shape ``(..., n_data)`` and ``pilots`` ``(..., n_pilots)``;
    the result has shape ``(..., n_fft + n_cp)``.
    """
    data = np.asarray(data, dtype=complex)
    pilots = np.asarray(pilots, dtype=complex)
    if data.shape[-1:] != (grid.n_data,) or pilots.shape[-1:] != (grid.n_pilots,):
        raise ValueError(
            f"expected {grid.n_data} data and {grid.n_pilots} pilot values, "
            f"got shapes {data.shape} and {pilots.shape}"
        )
    lead = np.broadcast_shapes(data.shape[:-1], pilots.shape[:-1])
    freq = np.zeros(lead + (grid.n_fft,), dtype=complex)
    freq[..., grid.data_bins] = data
    freq[..., grid.pilot_bins] = pilots
    body = np.fft.ifft(freq, norm="ortho")
    return np.concatenate([body[..., -grid.n_cp:], body], axis=-1)


def disassemble(rx, grid: OfdmGrid = DEFAULT_GRID):
    """Strip the cyclic prefix, transform, and return ``(data, pilots)`` bins."""
    rx = np.asarray(rx, dtype=complex)
    if rx.shape[-1] != grid.symbol_length:
        raise ValueError(f"expected {grid.symbol_length} samples, got {rx.shape[-1]}")
    freq = np.fft.fft(rx[..., grid.n_cp:], norm="ortho")
    return freq[..., grid.data_bins], freq[..., grid.pilot_bins]
