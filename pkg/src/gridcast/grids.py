"""Latitude/longitude grid geometry, latitude weighting, region masks, spherical distance.

All functions here are pure and operate on immutable inputs, so they are safe
to call concurrently.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidGridError

EARTH_RADIUS_KM = 6371.0
KM_PER_DEGREE = np.pi * EARTH_RADIUS_KM / 180.0


class Region(enum.Enum):
    GLOBAL = "global"
    NHET = "nhet"        # northern hemisphere extratropics, lat in [20, 90]
    SHET = "shet"        # southern hemisphere extratropics, lat in [-90, -20]
    TROPICS = "tropics"  # lat in (-20, 20)


# Band edges are inclusive on the poleward side: the +/-20 deg rows belong to
# the extratropics, so NHET/SHET/Tropics partition every grid.
TROPICS_EDGE_DEG = 20.0


@dataclass(frozen=True)
class LatLonGrid:
    """A rectangular lat/lon grid.

    latitudes: degrees in [-90, 90], strictly monotonic (either direction).
    longitudes: degrees in [0, 360), strictly monotonic with uniform spacing.
    """

    latitudes: np.ndarray
    longitudes: np.ndarray

    def __post_init__(self):
        lat = np.asarray(self.latitudes, dtype=np.float64)
        lon = np.asarray(self.longitudes, dtype=np.float64)
        object.__setattr__(self, "latitudes", lat)
        object.__setattr__(self, "longitudes", lon)
        if lat.ndim != 1 or lon.ndim != 1:
            raise InvalidGridError("latitudes/longitudes must be 1-D")
        if lat.size < 2 or lon.size < 2:
            raise InvalidGridError("need at least 2 latitudes and 2 longitudes")
        if np.any(np.abs(lat) > 90.0):
            raise InvalidGridError("latitudes must lie in [-90, 90]")
        dlat = np.diff(lat)
        if not (np.all(dlat > 0) or np.all(dlat < 0)):
            raise InvalidGridError("latitudes must be strictly monotonic")
        dlon = np.diff(lon)
        if not (np.all(dlon > 0) or np.all(dlon < 0)):
            raise InvalidGridError("longitudes must be strictly monotonic")
        if not np.allclose(dlon, dlon[0], rtol=0, atol=1e-9):
            raise InvalidGridError("longitudes must be uniformly spaced")
        if np.any(lon < 0) or np.any(lon >= 360.0):
            raise InvalidGridError("longitudes must lie in [0, 360)")

    @property
    def n_lat(self) -> int:
        return self.latitudes.size

    @property
    def n_lon(self) -> int:
        return self.longitudes.size

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_lat, self.n_lon)

    @classmethod
    def uniform(cls, n_lat: int, n_lon: int, include_poles: bool = True,
                descending: bool = False) -> "LatLonGrid":
        """Equiangular grid. With include_poles=False latitudes are cell-centered
        (no zero-weight pole rows), which is what the toy datasets use."""
        if include_poles:
            lat = np.linspace(-90.0, 90.0, n_lat)
        else:
            step = 180.0 / n_lat
            lat = -90.0 + step / 2.0 + step * np.arange(n_lat)
        if descending:
            lat = lat[::-1].copy()
        lon = (360.0 / n_lon) * np.arange(n_lon)
        return cls(latitudes=lat, longitudes=lon)

    def to_dict(self) -> dict:
        return {
            "latitudes": [float(v) for v in self.latitudes],
            "longitudes": [float(v) for v in self.longitudes],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LatLonGrid":
        return cls(latitudes=np.array(d["latitudes"], dtype=np.float64),
                   longitudes=np.array(d["longitudes"], dtype=np.float64))


@dataclass(frozen=True)
class RegionMask:
    region: Region
    mask: np.ndarray = field(repr=False)  # bool, [n_lat, n_lon]


def latitude_weights(grid: LatLonGrid) -> np.ndarray:
    """Per-row area weights, cos(lat) normalized so the mean weight is 1."""
    cos_lat = np.cos(np.deg2rad(grid.latitudes))
    # cos(+/-90 deg) evaluates to ~6e-17 in floating point; clamp to exactly 0
    cos_lat = np.where(np.abs(grid.latitudes) == 90.0, 0.0, cos_lat)
    return cos_lat / cos_lat.mean()


def region_mask(grid: LatLonGrid, region: Region) -> RegionMask:
    lat = grid.latitudes
    if region is Region.GLOBAL:
        rows = np.ones(lat.size, dtype=bool)
    elif region is Region.NHET:
        rows = lat >= TROPICS_EDGE_DEG
    elif region is Region.SHET:
        rows = lat <= -TROPICS_EDGE_DEG
    elif region is Region.TROPICS:
        rows = np.abs(lat) < TROPICS_EDGE_DEG
    else:  # pragma: no cover - enum is closed
        raise ValueError(f"unknown region {region}")
    mask = np.repeat(rows[:, None], grid.n_lon, axis=1)
    return RegionMask(region=region, mask=mask)


def great_circle_km(a: tuple[float, float], b: tuple[float, float]) -> float:
    """Haversine distance in km between two (lat, lon) points in degrees,
    on a sphere of radius 6371 km."""
    lat1, lon1 = np.deg2rad(a[0]), np.deg2rad(a[1])
    lat2, lon2 = np.deg2rad(b[0]), np.deg2rad(b[1])
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    h = np.sin(dlat / 2.0) ** 2 + np.cos(lat1) * np.cos(lat2) * np.sin(dlon / 2.0) ** 2
    return float(2.0 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.minimum(h, 1.0))))
