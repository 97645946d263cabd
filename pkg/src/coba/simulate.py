"""Flight simulation: sample a path through the scene and emit scanner rows.

Each tick draws a fresh channel realization, measures every beam, picks the
serving one, and labels the position against the restricted zone. One scene
config + seed always yields a byte-identical CSV.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .scene import FlightPlan, SceneConfig, UavState
from .signal_model import draw_tick_state, measure_tick

__all__ = ["MeasurementSample", "simulate_flight", "simulate_scene", "write_csv", "CSV_COLUMNS"]

CSV_COLUMNS = [
    "timestamp", "x", "y", "h",
    "pci", "ssb_idx", "rssi", "ssb_rssi", "ss_rsrp", "ss_sinr", "ss_rsrq", "class",
]

# Gap inserted between consecutive flights so downstream interpolation treats
# them as separate segments.
FLIGHT_GAP_S = 60.0


@dataclass
class MeasurementSample:
    """One scanner record: serving identity, power/quality features, label."""

    timestamp: float
    position: np.ndarray
    pci: int
    ssb_idx: int
    rssi: float       # dBm
    ssb_rssi: float   # dBm
    ss_rsrp: float    # dBm
    ss_sinr: float    # dB
    ss_rsrq: float    # dB
    label: int


def _db(x: float) -> float:
    return 10.0 * float(np.log10(x))


def _path_positions(plan: FlightPlan):
    """Constant-speed positions along the waypoint polyline, one per tick."""
    wp = plan.waypoints
    seg = np.diff(wp, axis=0)
    seg_len = np.linalg.norm(seg, axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    total_len = float(cum[-1])
    total_time = total_len / plan.speed
    n_ticks = int(np.floor(total_time * plan.sample_rate_hz + 1e-9)) + 1
    times = np.arange(n_ticks) / plan.sample_rate_hz
    dist = times * plan.speed
    positions = np.empty((n_ticks, 3))
    for k in range(3):
        positions[:, k] = np.interp(dist, cum, wp[:, k])
    return times, positions


def simulate_flight(scene: SceneConfig, plan: FlightPlan, seed, t_offset: float = 0.0):
    """Simulate one flight; returns a list of MeasurementSample.

    Deterministic for a given (scene, plan, seed): RNG draws happen in strict
    tick order on a single generator.
    """
    rng = np.random.default_rng(seed)
    times, positions = _path_positions(plan)
    samples = []
    for t, pos in zip(times, positions):
        uav = UavState(position=pos, timestamp=float(t) + t_offset, speed=plan.speed)
        state = draw_tick_state(scene, uav, rng)
        feats = measure_tick(state)
        samples.append(
            MeasurementSample(
                timestamp=float(t) + t_offset,
                position=pos,
                pci=feats["pci"],
                ssb_idx=feats["ssb_idx"],
                rssi=_db(feats["rssi_lin"]),
                ssb_rssi=_db(feats["ssb_rssi_lin"]),
                ss_rsrp=_db(feats["rsrp_lin"]),
                ss_sinr=_db(feats["sinr"]),
                ss_rsrq=_db(feats["rsrq"]),
                label=scene.restricted_zone.label(pos),
            )
        )
    return samples


def simulate_scene(scene: SceneConfig):
    """Simulate every flight in the scene, concatenated on a common clock."""
    if not scene.flights:
        raise ValueError("scene config defines no flights")
    all_samples = []
    t_offset = 0.0
    for idx, plan in enumerate(scene.flights):
        flight = simulate_flight(scene, plan, seed=[scene.seed, idx], t_offset=t_offset)
        all_samples.extend(flight)
        t_offset = flight[-1].timestamp + FLIGHT_GAP_S
    return all_samples


def write_csv(samples, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for s in samples:
            writer.writerow(
                [
                    repr(float(s.timestamp)),
                    repr(float(s.position[0])),
                    repr(float(s.position[1])),
                    repr(float(s.position[2])),
                    s.pci,
                    s.ssb_idx,
                    repr(float(s.rssi)),
                    repr(float(s.ssb_rssi)),
                    repr(float(s.ss_rsrp)),
                    repr(float(s.ss_sinr)),
                    repr(float(s.ss_rsrq)),
                    s.label,
                ]
            )
