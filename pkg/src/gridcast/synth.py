"""Synthetic toy atmosphere: smooth spectral random fields advected by a fixed
solid-body rotation with mild diffusion.

The step map is deterministic, so x(t + 6h) is an exactly learnable function
of x(t): persistence is beatable and a small model can fit the dynamics.
Fields are periodic in longitude; latitude uses a clamped boundary for the
diffusion stencil. The 5-point averaging operator is symmetric and
row-stochastic (hence doubly stochastic), so diffusion never increases
spatial variance.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .catalog import VariableCatalog, toy_catalog
from .dataset import STEP_HOURS, StateTensor
from .errors import UsageError
from .grids import LatLonGrid

# Rough physical scales per variable short name: (offset, amplitude).
FIELD_SCALES = {
    "U": (0.0, 12.0),
    "V": (0.0, 10.0),
    "T": (255.0, 20.0),
    "Q": (5e-3, 2e-3),
    "Z": (5.0e4, 2.5e3),
    "T2m": (288.0, 15.0),
    "MSLP": (1.013e5, 1.2e3),
    "SP": (9.8e4, 2.0e3),
    "U10": (0.0, 8.0),
    "V10": (0.0, 7.0),
}


@dataclass(frozen=True)
class SynthConfig:
    n_lat: int = 16
    n_lon: int = 32
    n_channels: int = 8
    n_steps: int = 400
    seed: int = 0
    rotation_cells: float = 1.0   # eastward cells per 6h step
    diffusion: float = 0.02       # 5-point stencil weight, in [0, 0.25]
    n_modes: int = 3              # max wavenumber of the initial fields
    catalog: VariableCatalog | None = field(default=None)

    def resolved_catalog(self) -> VariableCatalog:
        return self.catalog if self.catalog is not None else toy_catalog(self.n_channels)


def _initial_fields(cfg: SynthConfig, catalog: VariableCatalog,
                    rng: np.random.Generator) -> np.ndarray:
    """Band-limited random fields, one per channel, with per-variable scales."""
    h, w = cfg.n_lat, cfg.n_lon
    iy = np.arange(h)[:, None] / h
    ix = np.arange(w)[None, :] / w
    fields = np.zeros((catalog.n_channels, h, w))
    for c, info in enumerate(catalog.channels):
        base = np.zeros((h, w))
        for ky in range(cfg.n_modes + 1):
            for kx in range(1, cfg.n_modes + 1):
                amp = 1.0 / (1.0 + ky * ky + kx * kx)
                phase_y, phase_x = rng.uniform(0, 2 * np.pi, size=2)
                a, b = rng.standard_normal(2)
                base += amp * (a * np.cos(2 * np.pi * (ky * iy + kx * ix) + phase_x)
                               + b * np.sin(2 * np.pi * (ky * iy - kx * ix) + phase_y))
        base /= max(base.std(), 1e-12)
        offset, amplitude = FIELD_SCALES.get(info.short_name, (0.0, 1.0))
        # ~10% amplitude spread across levels keeps channels distinguishable
        level_factor = 1.0 + 0.1 * (c % 4)
        fields[c] = offset + amplitude * level_factor * base
    return fields


def advect_lon(fields: np.ndarray, cells: float) -> np.ndarray:
    """Shift every field eastward by a (possibly fractional) number of
    longitude cells; fractional parts use linear interpolation."""
    n = int(np.floor(cells))
    frac = cells - n
    shifted = np.roll(fields, n, axis=-1)
    if frac > 0:
        shifted = (1.0 - frac) * shifted + frac * np.roll(fields, n + 1, axis=-1)
    return shifted


def diffuse(fields: np.ndarray, alpha: float) -> np.ndarray:
    """One step of 5-point averaging: periodic in longitude, clamped in
    latitude. alpha in [0, 0.25] keeps all stencil weights non-negative."""
    if not 0.0 <= alpha <= 0.25:
        raise UsageError(f"diffusion weight {alpha} outside [0, 0.25]")
    if alpha == 0.0:
        return fields
    north = np.concatenate([fields[..., :1, :], fields[..., :-1, :]], axis=-2)
    south = np.concatenate([fields[..., 1:, :], fields[..., -1:, :]], axis=-2)
    east = np.roll(fields, -1, axis=-1)
    west = np.roll(fields, 1, axis=-1)
    return (1.0 - 4.0 * alpha) * fields + alpha * (north + south + east + west)


def step_fields(fields: np.ndarray, cfg: SynthConfig) -> np.ndarray:
    return diffuse(advect_lon(fields, cfg.rotation_cells), cfg.diffusion)


def synth_atmosphere(cfg: SynthConfig) -> tuple[list[StateTensor], LatLonGrid, VariableCatalog]:
    """Generate a deterministic 6-hourly series of physical-unit states."""
    catalog = cfg.resolved_catalog()
    grid = LatLonGrid.uniform(cfg.n_lat, cfg.n_lon, include_poles=False)
    rng = np.random.default_rng(cfg.seed)
    fields = _initial_fields(cfg, catalog, rng)
    series = []
    for t in range(cfg.n_steps):
        series.append(StateTensor(values=fields.astype(np.float32),
                                  valid_time=t * STEP_HOURS, normalized=False))
        fields = step_fields(fields, cfg)
    return series, grid, catalog


def make_vortex_series(grid: LatLonGrid, catalog: VariableCatalog,
                       centers: list[tuple[float, float]],
                       depth_pa: float = 3.0e3, sigma_deg: float = 6.0,
                       background_pa: float = 1.013e5) -> list[StateTensor]:
    """Series whose MSLP channel carries a Gaussian depression moving along
    the prescribed centers; all other channels are flat backgrounds. Used to
    exercise the cyclone tracker with a known ground-truth track."""
    mslp_idx = catalog.channel_index("MSLP")
    lat2d = grid.latitudes[:, None]
    lon2d = grid.longitudes[None, :]
    series = []
    for t, (clat, clon) in enumerate(centers):
        values = np.zeros((catalog.n_channels, grid.n_lat, grid.n_lon), dtype=np.float64)
        for c, info in enumerate(catalog.channels):
            offset, _ = FIELD_SCALES.get(info.short_name, (0.0, 1.0))
            values[c] = offset
        dlon = (lon2d - clon + 180.0) % 360.0 - 180.0
        dist2 = (lat2d - clat) ** 2 + (np.cos(np.deg2rad(clat)) * dlon) ** 2
        values[mslp_idx] = background_pa - depth_pa * np.exp(-dist2 / (2.0 * sigma_deg ** 2))
        series.append(StateTensor(values=values, valid_time=t * STEP_HOURS, normalized=False))
    return series
