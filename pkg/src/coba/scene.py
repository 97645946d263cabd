"""Scene description: radio units, UAV state, flight plans, channel constants.

A scene is fully described by a JSON config file (see ``SceneConfig.to_json``
for the schema); identical config + seed always reproduces the same
measurement stream.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .geometry import RestrictedZone

__all__ = ["RadioUnit", "UavState", "FlightPlan", "SceneConfig", "load_scene", "SceneError"]

MAX_EIRP_DBM = 62.0
FR2_BAND_HZ = (24.25e9, 29.5e9)
LOW_ALTITUDE_LIMIT_M = 50.0


class SceneError(ValueError):
    """Invalid scene configuration."""


@dataclass
class RadioUnit:
    """One base-station radio head serving a fan of SSB beams.

    ``position`` is (east, north, up) in meters; ``bearing`` is the boresight
    azimuth of the beam fan, degrees clockwise from north. EIRP is the
    boresight value; per-beam gains are applied relative to it.
    """

    id: int
    position: np.ndarray
    bearing: float
    eirp: float = MAX_EIRP_DBM
    carrier_freq: float = 24.42288e9
    n_beams: int = 8
    beam_width: float = 15.0

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)
        if self.position.shape != (3,):
            raise SceneError(f"RU {self.id}: position must be [x, y, z]")
        if self.position[2] <= 0:
            raise SceneError(f"RU {self.id}: height above ground must be positive")
        if self.eirp > MAX_EIRP_DBM:
            raise SceneError(f"RU {self.id}: EIRP {self.eirp} dBm exceeds the {MAX_EIRP_DBM} dBm cap")
        if not (1 <= self.n_beams <= 64):
            raise SceneError(f"RU {self.id}: n_beams must be in [1, 64]")
        if not (FR2_BAND_HZ[0] <= self.carrier_freq <= FR2_BAND_HZ[1]):
            raise SceneError(f"RU {self.id}: carrier {self.carrier_freq} Hz outside FR2 range")
        if self.beam_width <= 0:
            raise SceneError(f"RU {self.id}: beam_width must be positive")

    @property
    def height_agl(self) -> float:
        return float(self.position[2])

    @property
    def pci(self) -> int:
        # One cell per radio unit.
        return self.id

    def beam_boresights(self) -> np.ndarray:
        """Azimuths (deg) of each beam: bearing plus offsets spanning +/-60."""
        if self.n_beams == 1:
            offsets = np.array([0.0])
        else:
            offsets = np.linspace(-60.0, 60.0, self.n_beams)
        return (self.bearing + offsets) % 360.0


@dataclass
class UavState:
    """UAV kinematic state at one sample tick."""

    position: np.ndarray
    timestamp: float
    speed: float

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float)


@dataclass
class FlightPlan:
    """Piecewise-linear path flown at constant speed, sampled at a fixed rate."""

    waypoints: np.ndarray
    speed: float = 1.5
    sample_rate_hz: float = 5.0
    allow_high_altitude: bool = False

    def __post_init__(self):
        self.waypoints = np.asarray(self.waypoints, dtype=float)
        if self.waypoints.ndim != 2 or self.waypoints.shape[0] < 2 or self.waypoints.shape[1] != 3:
            raise SceneError("a flight plan needs at least 2 [x, y, h] waypoints")
        if self.speed <= 0:
            raise SceneError("flight speed must be positive")
        if self.sample_rate_hz <= 0:
            raise SceneError("sample rate must be positive")
        if not self.allow_high_altitude and float(self.waypoints[:, 2].max()) > LOW_ALTITUDE_LIMIT_M:
            raise SceneError(
                f"waypoint altitude exceeds low-altitude regime ({LOW_ALTITUDE_LIMIT_M} m); "
                "set allow_high_altitude to override"
            )


@dataclass
class SceneConfig:
    """Everything needed to generate a measurement log deterministically."""

    radio_units: list
    restricted_zone: RestrictedZone
    flights: list = field(default_factory=list)
    shadowing_sigma: float = 4.0
    rician_k_db: float = 10.0
    fading: bool = True
    noise_dbm: float = -95.0
    n_rs: int = 127
    n_rb: int = 20
    blockers: list = field(default_factory=list)
    seed: int = 0

    def __post_init__(self):
        if len(self.radio_units) < 1:
            raise SceneError("scene needs at least one radio unit")
        ids = [ru.id for ru in self.radio_units]
        if len(set(ids)) != len(ids):
            raise SceneError("radio unit ids must be unique")
        if self.n_rs < 1 or self.n_rb < 1:
            raise SceneError("n_rs and n_rb must be >= 1")
        if self.shadowing_sigma < 0:
            raise SceneError("shadowing sigma must be >= 0")

    @property
    def noise_var(self) -> float:
        """Receiver noise power in linear milliwatts."""
        return 10.0 ** (self.noise_dbm / 10.0)

    def to_json(self) -> str:
        doc = {
            "seed": self.seed,
            "noise_dbm": self.noise_dbm,
            "n_rs": self.n_rs,
            "n_rb": self.n_rb,
            "shadowing_sigma_db": self.shadowing_sigma,
            "rician_k_db": self.rician_k_db,
            "fading": self.fading,
            "radio_units": [
                {
                    "id": ru.id,
                    "position": list(ru.position),
                    "bearing_deg": ru.bearing,
                    "eirp_dbm": ru.eirp,
                    "carrier_freq_hz": ru.carrier_freq,
                    "n_beams": ru.n_beams,
                    "beam_width_deg": ru.beam_width,
                }
                for ru in self.radio_units
            ],
            "restricted_zone": {
                "polygon": self.restricted_zone.polygon.tolist(),
                "height_max_m": self.restricted_zone.height_max,
            },
            "blockers": [
                {"min": list(lo), "max": list(hi)} for lo, hi in self.blockers
            ],
            "flights": [
                {
                    "waypoints": fp.waypoints.tolist(),
                    "speed_mps": fp.speed,
                    "sample_rate_hz": fp.sample_rate_hz,
                    "allow_high_altitude": fp.allow_high_altitude,
                }
                for fp in self.flights
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict) -> "SceneConfig":
        try:
            rus = [
                RadioUnit(
                    id=int(r["id"]),
                    position=r["position"],
                    bearing=float(r["bearing_deg"]),
                    eirp=float(r.get("eirp_dbm", MAX_EIRP_DBM)),
                    carrier_freq=float(r.get("carrier_freq_hz", 24.42288e9)),
                    n_beams=int(r.get("n_beams", 8)),
                    beam_width=float(r.get("beam_width_deg", 15.0)),
                )
                for r in doc["radio_units"]
            ]
            zone = RestrictedZone(
                polygon=doc["restricted_zone"]["polygon"],
                height_max=float(doc["restricted_zone"].get("height_max_m", LOW_ALTITUDE_LIMIT_M)),
            )
            flights = [
                FlightPlan(
                    waypoints=f["waypoints"],
                    speed=float(f.get("speed_mps", 1.5)),
                    sample_rate_hz=float(f.get("sample_rate_hz", 5.0)),
                    allow_high_altitude=bool(f.get("allow_high_altitude", False)),
                )
                for f in doc.get("flights", [])
            ]
            blockers = [
                (np.asarray(b["min"], dtype=float), np.asarray(b["max"], dtype=float))
                for b in doc.get("blockers", [])
            ]
            return cls(
                radio_units=rus,
                restricted_zone=zone,
                flights=flights,
                shadowing_sigma=float(doc.get("shadowing_sigma_db", 4.0)),
                rician_k_db=float(doc.get("rician_k_db", 10.0)),
                fading=bool(doc.get("fading", True)),
                noise_dbm=float(doc.get("noise_dbm", -95.0)),
                n_rs=int(doc.get("n_rs", 127)),
                n_rb=int(doc.get("n_rb", 20)),
                blockers=blockers,
                seed=int(doc.get("seed", 0)),
            )
        except (KeyError, TypeError) as exc:
            raise SceneError(f"invalid scene config: {exc}") from exc


def load_scene(path) -> SceneConfig:
    with open(path) as fh:
        doc = json.load(fh)
    return SceneConfig.from_dict(doc)
