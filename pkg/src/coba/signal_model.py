"""Per-beam received-signal model and the derived radio measurements.

All powers are linear milliwatts unless a name says dBm/dB. The channel is
flat across reference resource elements (REs): one complex coefficient per
(radio unit, beam) per tick, applied to unit-power QPSK symbols plus complex
white Gaussian receiver noise.

Large-scale model: free-space path loss + log-normal shadowing + Rician
fading (Rayleigh when the RU-UAV ray crosses a blocker box). Beam patterns
are parabolic mainlobes in azimuth; EIRP is the boresight value, so the
pattern enters as ``gain(theta) - gain_max`` relative to it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import segment_intersects_box
from .scene import SceneConfig, UavState

__all__ = [
    "SignalModelError",
    "fspl_db",
    "beam_gain_db",
    "azimuth_deg",
    "received_signal",
    "rsrp",
    "rssi",
    "sinr",
    "rsrq",
    "serving_beam_select",
    "TickState",
    "draw_tick_state",
    "measure_tick",
]

SPEED_OF_LIGHT = 299792458.0
BEAM_GAIN_MAX_DB = 24.0
BEAM_GAIN_MIN_DB = -10.0


class SignalModelError(ValueError):
    """Non-physical value produced by the signal model."""


def fspl_db(distance_m: float, freq_hz: float) -> float:
    """Free-space path loss, 20*log10(4*pi*d*f/c) dB."""
    if distance_m <= 0:
        raise SignalModelError("distance must be positive")
    return 20.0 * np.log10(4.0 * np.pi * distance_m * freq_hz / SPEED_OF_LIGHT)


def beam_gain_db(offset_deg, beam_width_deg: float):
    """Parabolic mainlobe: gain_max - 12*(offset/width)^2, floored at the sidelobe level."""
    offset = np.abs(np.asarray(offset_deg, dtype=float))
    offset = np.minimum(offset, 360.0 - offset)  # wrap to [0, 180]
    gain = BEAM_GAIN_MAX_DB - 12.0 * (offset / beam_width_deg) ** 2
    return np.maximum(gain, BEAM_GAIN_MIN_DB)


def azimuth_deg(from_xy, to_xy) -> float:
    """Azimuth of the to-point seen from the from-point, degrees clockwise from north."""
    dx = float(to_xy[0]) - float(from_xy[0])
    dy = float(to_xy[1]) - float(from_xy[1])
    return float(np.degrees(np.arctan2(dx, dy)) % 360.0)


def received_signal(power_lin: float, h_coeff, symbols, noise_var: float, rng=None):
    """Per-RE received samples sqrt(P)*h*s + n.

    ``h_coeff`` may be a scalar (flat channel) or a per-RE array; ``noise_var``
    is the complex noise power (linear). With ``noise_var == 0`` no RNG is
    consumed.
    """
    s = np.asarray(symbols, dtype=complex)
    if s.size == 0:
        raise SignalModelError("need at least one reference resource element")
    if power_lin < 0 or noise_var < 0:
        raise SignalModelError("powers must be non-negative")
    y = np.sqrt(power_lin) * np.asarray(h_coeff, dtype=complex) * s
    if noise_var > 0:
        if rng is None:
            raise SignalModelError("rng required when noise_var > 0")
        n = np.sqrt(noise_var / 2.0) * (rng.standard_normal(s.shape) + 1j * rng.standard_normal(s.shape))
        y = y + n
    return y


def rsrp(samples) -> float:
    """Mean per-RE power of the reference samples."""
    y = np.asarray(samples)
    if y.size == 0:
        raise SignalModelError("RSRP of an empty sample array")
    return float(np.mean(np.abs(y) ** 2))


def rssi(rsrp_lin: float, interference_lin: float) -> float:
    """Total received power on the measured REs: serving power plus interference."""
    if rsrp_lin < 0:
        raise SignalModelError("negative RSRP")
    total = rsrp_lin + interference_lin
    if total <= 0:
        raise SignalModelError("non-physical RSSI (broken channel draw)")
    return total


def sinr(rsrp_lin: float, interference_lin: float, noise_var: float) -> float:
    denom = interference_lin + noise_var
    if denom <= 0:
        raise SignalModelError("SINR denominator must be positive")
    return rsrp_lin / denom


def rsrq(n_rb: int, rsrp_lin: float, rssi_lin: float) -> float:
    if rssi_lin <= 0:
        raise SignalModelError("RSRQ needs positive RSSI")
    return n_rb * rsrp_lin / rssi_lin


def serving_beam_select(per_beam_rsrp: dict):
    """Argmax-RSRP beam; ties break to the lowest (ru id, beam index) pair."""
    if not per_beam_rsrp:
        raise SignalModelError("no candidate beams")
    best = None
    best_val = -np.inf
    for key in sorted(per_beam_rsrp):
        val = per_beam_rsrp[key]
        if val > best_val:
            best, best_val = key, val
    return best


@dataclass
class TickState:
    """Raw channel realization for one sample tick.

    Arrays are indexed [ru, beam(, re)]; beams a unit does not transmit are
    masked inactive. Kept around so tests can recompute every measurement
    from first principles.
    """

    power_lin: np.ndarray        # (R,) transmit power, linear mW
    h: np.ndarray                # (R, B_max) complex channel coefficients
    symbols: np.ndarray          # (R, B_max, N_RS) unit-power QPSK
    noise: np.ndarray            # (N_RS,) receiver noise samples
    noise_var: float
    active: np.ndarray           # (R, B_max) bool, beam transmitted or not
    n_rb: int
    ru_ids: np.ndarray           # (R,) cell identity per row, ascending
    carrier_hz: np.ndarray       # (R,) carrier frequency per row

    def received(self, ru_index: int, beam: int) -> np.ndarray:
        """Serving-path samples for one beam (interference excluded)."""
        if not (0 <= beam < self.active.shape[1]) or not self.active[ru_index, beam]:
            raise SignalModelError("beam out of range")
        return (
            np.sqrt(self.power_lin[ru_index]) * self.h[ru_index, beam] * self.symbols[ru_index, beam]
            + self.noise
        )


def _fading_coefficient(scene: SceneConfig, blocked: bool, los_phase: float, rng) -> complex:
    """Unit-mean-power small-scale coefficient. RNG is always consumed so the
    stream layout does not depend on blockage."""
    scatter = (rng.standard_normal() + 1j * rng.standard_normal()) / np.sqrt(2.0)
    if not scene.fading:
        return 1.0 + 0.0j
    if blocked:
        return scatter  # Rayleigh
    k_lin = 10.0 ** (scene.rician_k_db / 10.0)
    los = np.sqrt(k_lin / (k_lin + 1.0)) * np.exp(1j * los_phase)
    return los + np.sqrt(1.0 / (k_lin + 1.0)) * scatter


def draw_tick_state(scene: SceneConfig, uav: UavState, rng) -> TickState:
    """Draw one tick's channel realization for every (RU, beam).

    RNG consumption order is fixed (per-RU draws in id order, then symbols,
    then noise) so a seeded generator reproduces the stream exactly.
    """
    rus = scene.radio_units
    n_ru = len(rus)
    b_max = max(ru.n_beams for ru in rus)
    n_rs = scene.n_rs

    power_lin = np.zeros(n_ru)
    h = np.zeros((n_ru, b_max), dtype=complex)
    active = np.zeros((n_ru, b_max), dtype=bool)

    pos = uav.position
    for idx, ru in enumerate(sorted(rus, key=lambda r: r.id)):
        vec = pos - ru.position
        dist = float(np.linalg.norm(vec))
        dist = max(dist, 1.0)  # clamp inside the near field
        az = azimuth_deg(ru.position[:2], pos[:2])

        shadow_db = rng.normal(0.0, scene.shadowing_sigma) if scene.shadowing_sigma > 0 else 0.0
        blocked = any(
            segment_intersects_box(ru.position, pos, lo, hi) for lo, hi in scene.blockers
        )
        los_phase = float((-2.0 * np.pi * dist * ru.carrier_freq / SPEED_OF_LIGHT) % (2.0 * np.pi))
        fad = _fading_coefficient(scene, blocked, los_phase, rng)

        path_db = fspl_db(dist, ru.carrier_freq) + shadow_db
        offsets = np.minimum(
            np.abs(az - ru.beam_boresights()),
            360.0 - np.abs(az - ru.beam_boresights()),
        )
        gains = beam_gain_db(offsets, ru.beam_width)
        # Loss relative to boresight EIRP; the pattern only ever subtracts.
        loss_db = path_db - (gains - BEAM_GAIN_MAX_DB)

        power_lin[idx] = 10.0 ** (ru.eirp / 10.0)
        h[idx, : ru.n_beams] = 10.0 ** (-loss_db[: ru.n_beams] / 20.0) * fad
        active[idx, : ru.n_beams] = True

    phases = rng.integers(0, 4, size=(n_ru, b_max, n_rs))
    symbols = np.exp(1j * (np.pi / 4.0 + phases * np.pi / 2.0))
    symbols[~active] = 0.0

    if scene.noise_var > 0:
        noise = np.sqrt(scene.noise_var / 2.0) * (
            rng.standard_normal(n_rs) + 1j * rng.standard_normal(n_rs)
        )
    else:
        noise = np.zeros(n_rs, dtype=complex)

    rus_sorted = sorted(rus, key=lambda r: r.id)
    return TickState(
        power_lin=power_lin,
        h=h,
        symbols=symbols,
        noise=noise,
        noise_var=scene.noise_var,
        active=active,
        n_rb=scene.n_rb,
        ru_ids=np.array([ru.id for ru in rus_sorted]),
        carrier_hz=np.array([ru.carrier_freq for ru in rus_sorted]),
    )


def interference_terms(state: TickState, serving_ru: int, beam: int):
    """In-band interference on one beam from all non-serving units.

    Only co-carrier units contribute (interference is in-band). Returns
    (power_term, cross_term): the mean power of the summed non-serving
    signals, plus twice the real serving/non-serving cross correlation.
    Their sum is the exact interference contribution to the measured total
    power on the beam; only the cross term can go negative, and it is
    zero-mean over symbol draws.
    """
    y = state.received(serving_ru, beam)
    amps = np.sqrt(state.power_lin)[:, None]
    contrib = amps * state.h[:, beam, None] * state.symbols[:, beam, :]
    in_band = state.active[:, beam] & (state.carrier_hz == state.carrier_hz[serving_ru])
    contrib[~in_band] = 0.0
    v = contrib.sum(axis=0) - contrib[serving_ru]
    power_term = float(np.mean(np.abs(v) ** 2))
    cross_term = 2.0 * float(np.mean(np.real(np.conj(y) * v)))
    return power_term, cross_term


def measure_tick(state: TickState) -> dict:
    """All scanner features for one tick.

    Serving beam is the global RSRP argmax. SSB-RSSI is the serving beam's
    total power (serving + full interference including the cross term);
    wideband RSSI sums the per-beam totals across the serving unit's beams,
    and RSRQ is defined against that wideband value.

    SINR uses only the non-negative interference power term: the zero-mean
    cross term is part of the instantaneous total-power decomposition, not of
    an interference power estimate, and keeping it would let a finite-sample
    denominator go negative.
    """
    n_ru, b_max = state.active.shape
    per_beam = {}
    for r in range(n_ru):
        for b in range(b_max):
            if state.active[r, b]:
                per_beam[(r, b)] = rsrp(state.received(r, b))
    serving_ru, serving_beam = serving_beam_select(per_beam)

    rho = per_beam[(serving_ru, serving_beam)]
    i_power, i_cross = interference_terms(state, serving_ru, serving_beam)
    ssb_rssi_lin = rssi(rho, i_power + i_cross)

    wideband = 0.0
    for b in range(b_max):
        if not state.active[serving_ru, b]:
            continue
        if b == serving_beam:
            wideband += ssb_rssi_lin
        else:
            p_b, c_b = interference_terms(state, serving_ru, b)
            wideband += rssi(per_beam[(serving_ru, b)], p_b + c_b)

    return {
        "pci": int(state.ru_ids[serving_ru]),
        "ssb_idx": serving_beam,
        "rsrp_lin": rho,
        "ssb_rssi_lin": ssb_rssi_lin,
        "rssi_lin": wideband,
        "interference_lin": i_power,
        "interference_cross_lin": i_cross,
        "sinr": sinr(rho, i_power, state.noise_var),
        "rsrq": rsrq(state.n_rb, rho, wideband),
    }
