"""Monte Carlo PNC rounds and BER sweeps.

A round is one OFDM symbol per UE sent through one block-fading channel
realization: the multiple-access (MA) slot into the relay and, for the
end-to-end metric, the broadcast (BC) slot back to both UEs.

Every round owns a random stream derived from ``(master_seed, point_index,
round_index)``. All randomness a round needs is drawn up front into a
:class:`RoundDraw`; nothing drawn depends on the transmit power, so the same
draws can be re-evaluated at any power (common random numbers), which is
what :func:`power_for_ber` relies on.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import ofdm
from .channel import CeeSpec, NodeGeometry, apply_cee, complex_normal, sample_realization
from .modem import Modulation, bits_to_digits, detect_symbol, digits_to_bits, digits_to_symbol
from .pnc import pnc_map_digits, recover_peer, relay_detect
from .powerctl import allocate
from .riscontrol import effective_gain, optimal_phases, random_phases

PHASE_MODES = ("optimal", "random")
METRICS = ("uplink", "end_to_end")
FRAMINGS = ("ofdm", "flat")
SWEEP_AXES = ("p_max_dbm", "cee_db", "L")
THERMAL_DBM_PER_HZ = -174.0
CHUNK_ROUNDS = 128


def dbm_to_watts(dbm):
    return 10.0 ** ((np.asarray(dbm, dtype=float) - 30.0) / 10.0)


def watts_to_dbm(w):
    return 10.0 * np.log10(w) + 30.0


def noise_power(bandwidth_hz: float, noise_figure_db: float = 0.0) -> float:
    """Thermal noise over ``bandwidth_hz`` in watts (-174 dBm/Hz + NF)."""
    if bandwidth_hz <= 0:
        raise ValueError("bandwidth must be positive")
    return float(dbm_to_watts(THERMAL_DBM_PER_HZ + 10.0 * math.log10(bandwidth_hz) + noise_figure_db))


@dataclass(frozen=True)
class Scenario:
    """Everything that defines one operating point.

    ``cee_db=None`` is perfect CSI. ``min_errors`` lets a sweep point stop
    early once that many bit errors are collected; ``rounds`` is then a cap.
    ``silence_b`` switches to single-user detection of UE_A with UE_B off,
    ``power_control=False`` sends both UEs at ``p_max``, and ``framing="flat"``
    replaces OFDM framing by noise added directly on each data subcarrier.
    """

    geometry: NodeGeometry = field(default_factory=NodeGeometry)
    L: int = 1
    M: int = 4
    p_max_dbm: float = 20.0
    p_relay_dbm: float = 20.0
    cee_db: float | None = None
    cee_mode: str = "absolute"
    phase_mode: str = "optimal"
    metric: str = "uplink"
    rounds: int = 1000
    min_errors: int | None = 100
    master_seed: int = 0
    bandwidth_hz: float = 10e6
    noise_figure_db: float = 0.0
    power_control: bool = True
    framing: str = "ofdm"
    silence_b: bool = False
    labeling: str = "natural"

    def __post_init__(self):
        if self.L < 1:
            raise ValueError("L must be >= 1")
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if self.phase_mode not in PHASE_MODES:
            raise ValueError(f"phase_mode must be one of {PHASE_MODES}")
        if self.framing not in FRAMINGS:
            raise ValueError(f"framing must be one of {FRAMINGS}")
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}")
        if self.min_errors is not None and self.min_errors < 1:
            raise ValueError("min_errors must be positive or None")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")
        if self.silence_b and self.metric != "uplink":
            raise ValueError("silence_b only applies to the uplink metric")
        Modulation(self.M, self.labeling)
        CeeSpec(self.cee_db, self.cee_mode)
        noise_power(self.bandwidth_hz, self.noise_figure_db)

    @property
    def modulation(self) -> Modulation:
        return Modulation(self.M, self.labeling)

    @property
    def cee(self) -> CeeSpec:
        return CeeSpec(self.cee_db, self.cee_mode)

    @property
    def noise_per_bin(self) -> float:
        """Per-subcarrier (and per-sample) noise variance in watts."""
        return noise_power(self.bandwidth_hz, self.noise_figure_db) / ofdm.DEFAULT_GRID.n_fft

    @property
    def bits_per_round(self) -> int:
        per_ue = ofdm.DEFAULT_GRID.n_data * self.modulation.bits_per_symbol
        return 2 * per_ue if self.metric == "end_to_end" else per_ue

    def to_dict(self) -> dict:
        d = asdict(self)
        d["geometry"] = {k: list(v) if isinstance(v, tuple) else v for k, v in d["geometry"].items()}
        return d


@dataclass(frozen=True)
class BerPoint:
    swept_value: float
    bits: int
    errors: int
    dropped_rounds: int
    rounds: int = 0

    @property
    def ber(self) -> float:
        return self.errors / self.bits if self.bits else float("nan")


def round_stream(master_seed: int, point_index: int, round_index: int) -> np.random.Generator:
    """Independent generator for one round; a pure function of its three indices."""
    seq = np.random.SeedSequence(entropy=master_seed, spawn_key=(point_index, round_index))
    return np.random.Generator(np.random.PCG64(seq))


@dataclass
class RoundDraw:
    """All randomness of one round, independent of transmit powers."""

    alpha_a: complex
    alpha_b: complex
    digits_a: np.ndarray
    digits_b: np.ndarray
    noise: np.ndarray
    bc_noise: np.ndarray | None = None
    undefined_phases: int = 0


def draw_round(sc: Scenario, rng: np.random.Generator) -> RoundDraw:
    """Channel, RIS configuration, payloads and MA-slot noise for one round.

    Draw order is fixed: fading, CEE, random phases (if any), payload bits of
    UE_A then UE_B, relay noise.
    """
    m = sc.modulation
    grid = ofdm.DEFAULT_GRID
    real = sample_realization(sc.geometry, sc.L, rng)
    if sc.cee_db is not None:
        real = apply_cee(real, sc.cee, rng)
    if sc.phase_mode == "optimal":
        cfg_a = optimal_phases(real.h_a_est, real.g_a_est)
        cfg_b = optimal_phases(real.h_b_est, real.g_b_est)
    else:
        cfg_a = random_phases(sc.L, rng)
        cfg_b = random_phases(sc.L, rng)
    n_bits = grid.n_data * m.bits_per_symbol
    bits = rng.integers(0, 2, size=(2, n_bits))
    n_noise = grid.symbol_length if sc.framing == "ofdm" else grid.n_data
    return RoundDraw(
        alpha_a=effective_gain(real.h_a, real.g_a, cfg_a),
        alpha_b=effective_gain(real.h_b, real.g_b, cfg_b),
        digits_a=bits_to_digits(bits[0], m),
        digits_b=bits_to_digits(bits[1], m),
        noise=complex_normal(rng, n_noise),
        undefined_phases=cfg_a.undefined + cfg_b.undefined,
    )


def draw_bc_noise(sc: Scenario, rng: np.random.Generator) -> np.ndarray:
    """Unit-variance noise at UE_A and UE_B for the BC slot, shape ``(2, n)``."""
    grid = ofdm.DEFAULT_GRID
    n = grid.symbol_length if sc.framing == "ofdm" else grid.n_data
    return complex_normal(rng, (2, n))


def draw_rounds(sc: Scenario, point_index: int, start: int, stop: int) -> list:
    draws = []
    for r in range(start, stop):
        rng = round_stream(sc.master_seed, point_index, r)
        d = draw_round(sc, rng)
        if sc.metric == "end_to_end":
            d.bc_noise = draw_bc_noise(sc, rng)
        draws.append(d)
    return draws


@dataclass
class BatchResult:
    """Per-round outcomes of a batch. ``snr`` is the per-bin arrival SNR of one branch."""

    errors: np.ndarray
    bits: np.ndarray
    dropped: np.ndarray
    snr: np.ndarray
    z_hat: np.ndarray | None = None

    @property
    def total_errors(self) -> int:
        return int(self.errors.sum())

    @property
    def total_bits(self) -> int:
        return int(self.bits.sum())


def _through_channel(sc, symbols, gain, noise, sigma):
    """Send one frequency-domain data block (per round) through a flat gain plus noise."""
    grid = ofdm.DEFAULT_GRID
    if sc.framing == "ofdm":
        tx = ofdm.assemble(symbols, ofdm.PILOT_SEQUENCE, grid)
        rx = gain[..., None] * tx + sigma * noise
        return ofdm.disassemble(rx, grid)[0]
    return gain[..., None] * symbols + sigma * noise


def _superposed_rx(sc, gain_a, gain_b, x_a, x_b, noise, sigma):
    grid = ofdm.DEFAULT_GRID
    if sc.framing == "ofdm":
        tx_a = ofdm.assemble(x_a, ofdm.PILOT_SEQUENCE, grid)
        tx_b = ofdm.assemble(x_b, ofdm.PILOT_SEQUENCE, grid)
        rx = gain_a[:, None] * tx_a + gain_b[:, None] * tx_b + sigma * noise
        return ofdm.disassemble(rx, grid)[0]
    return gain_a[:, None] * x_a + gain_b[:, None] * x_b + sigma * noise


def _bit_errors(d_hat, d_true, m: Modulation) -> np.ndarray:
    """Bit errors per round between two digit arrays of shape ``(R, n, ndim)``."""
    n_rounds = d_true.shape[0]
    b_hat = digits_to_bits(d_hat, m).reshape(n_rounds, -1)
    b_true = digits_to_bits(d_true, m).reshape(n_rounds, -1)
    return np.count_nonzero(b_hat != b_true, axis=1)


def _snr(amplitude, noise_var):
    if noise_var == 0:
        return np.full(np.shape(amplitude), np.inf)
    return amplitude**2 / noise_var


def evaluate_ma(sc: Scenario, draws: list) -> BatchResult:
    """Relay-side uplink outcome of each drawn round at ``sc.p_max_dbm``.

    Dropped rounds (zero effective gain) contribute neither bits nor errors.
    """
    m = sc.modulation
    n_rounds = len(draws)
    alpha_a = np.array([d.alpha_a for d in draws])
    alpha_b = np.array([d.alpha_b for d in draws])
    digits_a = np.stack([d.digits_a for d in draws])
    digits_b = np.stack([d.digits_b for d in draws])
    noise = np.stack([d.noise for d in draws])
    sigma = math.sqrt(sc.noise_per_bin)
    p_max = float(dbm_to_watts(sc.p_max_dbm))

    dropped = (alpha_a == 0) | (alpha_b == 0)
    if sc.silence_b:
        dropped = alpha_a == 0
    keep = ~dropped
    errors = np.zeros(n_rounds, dtype=np.int64)
    snr = np.zeros(n_rounds)
    z_hat = np.zeros_like(digits_a)
    per_round_bits = ofdm.DEFAULT_GRID.n_data * m.bits_per_symbol
    bits = np.where(keep, per_round_bits, 0)
    if not keep.any():
        return BatchResult(errors, bits, dropped, snr, z_hat)

    a_a, a_b = alpha_a[keep], alpha_b[keep]
    d_a, d_b, nz = digits_a[keep], digits_b[keep], noise[keep]
    if sc.silence_b:
        p_a, p_b = np.full(a_a.shape, p_max), np.zeros(a_a.shape)
    elif sc.power_control:
        alloc = allocate(a_a, a_b, p_max)
        p_a, p_b = np.atleast_1d(alloc.p_a), np.atleast_1d(alloc.p_b)
    else:
        p_a = p_b = np.full(a_a.shape, p_max)
    gain_a = np.sqrt(p_a) * a_a
    gain_b = np.sqrt(p_b) * a_b

    y = _superposed_rx(sc, gain_a, gain_b, digits_to_symbol(d_a, m), digits_to_symbol(d_b, m), nz, sigma)
    if sc.silence_b:
        branch = np.abs(gain_a)
        d_hat = detect_symbol(y / branch[:, None], m)
        errors[keep] = _bit_errors(d_hat, d_a, m)
    else:
        # the relay's detector assumes equal arrivals; without power control it
        # normalizes by the mean of the two amplitudes
        branch = np.abs(gain_b) if sc.power_control else 0.5 * (np.abs(gain_a) + np.abs(gain_b))
        d_hat = relay_detect(y, branch[:, None], m)
        errors[keep] = _bit_errors(d_hat, pnc_map_digits(d_a, d_b, m), m)
        z_hat[keep] = d_hat
    snr[keep] = _snr(branch, sc.noise_per_bin)
    return BatchResult(errors, bits, dropped, snr, z_hat)


def evaluate_bc(sc: Scenario, draws: list, ma: BatchResult) -> BatchResult:
    """End-to-end outcome: both UEs decode the broadcast ``z_hat`` and recover their peer.

    Errors are counted on each UE's recovered peer bits, so a round carries
    twice the MA bit count.
    """
    m = sc.modulation
    keep = ~ma.dropped
    n_rounds = len(draws)
    errors = np.zeros(n_rounds, dtype=np.int64)
    bits = np.where(keep, 2 * ofdm.DEFAULT_GRID.n_data * m.bits_per_symbol, 0)
    snr = np.zeros(n_rounds)
    if not keep.any():
        return BatchResult(errors, bits, ma.dropped, snr, ma.z_hat)
    sigma = math.sqrt(sc.noise_per_bin)
    amp = math.sqrt(float(dbm_to_watts(sc.p_relay_dbm)))
    kept = [d for d, k in zip(draws, keep) if k]
    bc_noise = np.stack([d.bc_noise for d in kept])
    x_r = digits_to_symbol(ma.z_hat[keep], m)
    d_a = np.stack([d.digits_a for d in kept])
    d_b = np.stack([d.digits_b for d in kept])
    total = np.zeros(len(kept), dtype=np.int64)
    for side, (own, peer) in enumerate(((d_a, d_b), (d_b, d_a))):
        alpha = np.array([d.alpha_a if side == 0 else d.alpha_b for d in kept])
        gain = amp * alpha
        y = _through_channel(sc, x_r, gain, bc_noise[:, side], sigma)
        z_ue = detect_symbol(y / np.abs(gain)[:, None], m)
        total += _bit_errors(recover_peer(z_ue, own, m), peer, m)
        if side == 0:
            snr[keep] = _snr(np.abs(gain), sc.noise_per_bin)
    errors[keep] = total
    return BatchResult(errors, bits, ma.dropped, snr, ma.z_hat)


def evaluate(sc: Scenario, draws: list) -> BatchResult:
    ma = evaluate_ma(sc, draws)
    return evaluate_bc(sc, draws, ma) if sc.metric == "end_to_end" else ma


@dataclass(frozen=True)
class RoundResult:
    """Outcome of a single round; ``draw`` and ``z_hat`` feed the BC slot."""

    errors: int
    bits: int
    dropped: bool
    draw: RoundDraw
    z_hat: np.ndarray

    def __iter__(self):
        return iter((self.errors, self.bits))


def run_ma_round(sc: Scenario, rng: np.random.Generator) -> RoundResult:
    """One MA slot; unpacks as ``(bit_errors, bits)``."""
    draw = draw_round(sc, rng)
    res = evaluate_ma(replace(sc, metric="uplink"), [draw])
    return RoundResult(int(res.errors[0]), int(res.bits[0]), bool(res.dropped[0]), draw, res.z_hat[0])


def run_bc_round(sc: Scenario, ma: RoundResult, rng: np.random.Generator) -> RoundResult:
    """BC slot following ``ma`` on the same (reciprocal) effective gains."""
    draw = replace(ma.draw, bc_noise=draw_bc_noise(sc, rng))
    prior = BatchResult(
        errors=np.array([ma.errors]),
        bits=np.array([ma.bits]),
        dropped=np.array([ma.dropped]),
        snr=np.zeros(1),
        z_hat=ma.z_hat[None],
    )
    res = evaluate_bc(sc, [draw], prior)
    return RoundResult(int(res.errors[0]), int(res.bits[0]), ma.dropped, draw, ma.z_hat)


def run_point(sc: Scenario, point_index: int = 0, swept_value: float = float("nan")) -> BerPoint:
    """Accumulate rounds in fixed-size chunks until ``min_errors`` or ``rounds``.

    The stopping check happens only at chunk boundaries, so the result does
    not depend on how the work is scheduled.
    """
    errors = bits = dropped = done = 0
    while done < sc.rounds:
        stop = min(done + CHUNK_ROUNDS, sc.rounds)
        res = evaluate(sc, draw_rounds(sc, point_index, done, stop))
        errors += res.total_errors
        bits += res.total_bits
        dropped += int(res.dropped.sum())
        done = stop
        if sc.min_errors is not None and errors >= sc.min_errors:
            break
    return BerPoint(swept_value=swept_value, bits=bits, errors=errors, dropped_rounds=dropped, rounds=done)


def _with_axis(sc: Scenario, axis: str, value) -> Scenario:
    if axis == "L":
        return replace(sc, L=int(value))
    if axis == "cee_db":
        return replace(sc, cee_db=None if value is None else float(value))
    return replace(sc, p_max_dbm=float(value))


def _run_indexed(args):
    sc, index, value = args
    return run_point(sc, index, value)


def sweep(template: Scenario, axis: str, values, workers: int = 1) -> list:
    """One :class:`BerPoint` per value; point ``i`` uses stream index ``i``."""
    if axis not in SWEEP_AXES:
        raise ValueError(f"sweep axis must be one of {SWEEP_AXES}, got {axis!r}")
    values = list(values)
    if not values:
        raise ValueError("sweep needs at least one value")
    jobs = [(_with_axis(template, axis, v), i, v) for i, v in enumerate(values)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_indexed, jobs))
    return [_run_indexed(j) for j in jobs]


def ber_at(sc: Scenario, draws: list, p_max_dbm: float) -> float:
    res = evaluate(replace(sc, p_max_dbm=p_max_dbm), draws)
    return res.total_errors / res.total_bits


def power_for_ber(
    sc: Scenario,
    target_ber: float,
    lo_dbm: float = -60.0,
    hi_dbm: float = 120.0,
    tol_db: float = 0.05,
    point_index: int = 0,
) -> float:
    """Smallest ``p_max_dbm`` whose BER drops to ``target_ber``.

    Uses ``sc.rounds`` fixed rounds re-evaluated at every trial power, so
    BER is non-increasing in power and bisection is well posed. The crossing
    is refined by log-BER interpolation between the final bracket ends.
    """
    draws = draw_rounds(sc, point_index, 0, sc.rounds)
    f_lo, f_hi = ber_at(sc, draws, lo_dbm), ber_at(sc, draws, hi_dbm)
    if f_lo <= target_ber:
        return lo_dbm
    if f_hi > target_ber:
        raise ValueError(f"target BER {target_ber} not reached at {hi_dbm} dBm (BER {f_hi})")
    while hi_dbm - lo_dbm > tol_db:
        mid = 0.5 * (lo_dbm + hi_dbm)
        f_mid = ber_at(sc, draws, mid)
        if f_mid > target_ber:
            lo_dbm, f_lo = mid, f_mid
        else:
            hi_dbm, f_hi = mid, f_mid
    if f_hi <= 0:
        return hi_dbm
    t = (math.log(f_lo) - math.log(target_ber)) / (math.log(f_lo) - math.log(f_hi))
    return lo_dbm + t * (hi_dbm - lo_dbm)
