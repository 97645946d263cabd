"""Ready-made scenes for demos and end-to-end verification.

The campus scene deploys three radio units whose beam fans each point at a
different flight region: the restricted polygon sits in front of unit 0 while
the two authorized corridors sit in front of units 1 and 2, at matched
distance bands. Serving cell identity therefore separates the classes almost
deterministically, while the power-feature distributions of the two classes
overlap by construction.
"""

from __future__ import annotations

import numpy as np

from .geometry import RestrictedZone
from .scene import FlightPlan, RadioUnit, SceneConfig

__all__ = ["lawnmower", "campus_scene"]


def _heading(bearing_deg: float) -> np.ndarray:
    rad = np.radians(bearing_deg)
    return np.array([np.sin(rad), np.cos(rad)])


def lawnmower(origin, along, across, length, width, n_passes, altitude):
    """Back-and-forth survey waypoints covering a rotated rectangle."""
    along = np.asarray(along, dtype=float)
    across = np.asarray(across, dtype=float)
    waypoints = []
    for i in range(n_passes):
        offset = origin + across * (width * i / max(n_passes - 1, 1))
        leg = [offset, offset + along * length]
        if i % 2 == 1:
            leg.reverse()
        waypoints.extend(leg)
    return np.array([[p[0], p[1], altitude] for p in waypoints])


def campus_scene(seed: int = 0, sample_rate_hz: float = 5.0, n_restricted_flights: int = 6,
                 n_authorized_flights: int = 6, shadowing_sigma: float = 4.0) -> SceneConfig:
    """Three-unit deployment with one restricted polygon and two authorized
    corridors, each region 35..95 m in front of its own unit's beam fan.

    The units sit ~300 m apart, so the serving-cell margin over the
    non-serving units is ~11 dB everywhere in the flown regions while the
    serving-distance band (and hence the power-feature distributions) is the
    same for both classes.
    """
    # One shared carrier: interference structure stays comparable across the
    # three regions (the deployment's second frequency would silence cross-
    # unit interference entirely for the unit using it).
    rus = [
        RadioUnit(id=0, position=[0.0, 0.0, 20.73], bearing=26.0, carrier_freq=24.42288e9),
        RadioUnit(id=1, position=[320.0, 40.0, 20.55], bearing=292.0, carrier_freq=24.42288e9),
        RadioUnit(id=2, position=[-160.0, 280.0, 20.24], bearing=116.0, carrier_freq=24.42288e9),
    ]

    u0, u1, u2 = (_heading(ru.bearing) for ru in rus)
    v0 = np.array([u0[1], -u0[0]])  # across-track unit vectors
    v1 = np.array([u1[1], -u1[0]])
    v2 = np.array([u2[1], -u2[0]])
    p0, p1, p2 = (ru.position[:2] for ru in rus)

    # Restricted polygon: 35..95 m in front of unit 0, 64 m wide.
    zone_poly = [
        p0 + 35 * u0 + 32 * v0,
        p0 + 95 * u0 + 32 * v0,
        p0 + 95 * u0 - 32 * v0,
        p0 + 35 * u0 - 32 * v0,
    ]
    zone = RestrictedZone(polygon=np.array(zone_poly), height_max=50.0)

    flights = []
    altitudes = [22.0, 28.0, 34.0, 25.0, 31.0]
    for i in range(n_restricted_flights):
        flights.append(
            FlightPlan(
                waypoints=lawnmower(p0 + 38 * u0 - 30 * v0, u0, v0, length=54.0,
                                    width=60.0, n_passes=9, altitude=altitudes[i % len(altitudes)]),
                speed=1.5,
                sample_rate_hz=sample_rate_hz,
            )
        )
    corridor_specs = [(p1, u1, v1), (p2, u2, v2)]
    for i in range(n_authorized_flights):
        base, u, v = corridor_specs[i % len(corridor_specs)]
        flights.append(
            FlightPlan(
                waypoints=lawnmower(base + 38 * u - 30 * v, u, v, length=54.0,
                                    width=60.0, n_passes=9, altitude=altitudes[(i + 2) % len(altitudes)]),
                speed=1.5,
                sample_rate_hz=sample_rate_hz,
            )
        )

    return SceneConfig(
        radio_units=rus,
        restricted_zone=zone,
        flights=flights,
        shadowing_sigma=shadowing_sigma,
        rician_k_db=10.0,
        fading=True,
        noise_dbm=-95.0,
        seed=seed,
    )
