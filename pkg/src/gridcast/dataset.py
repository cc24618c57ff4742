"""Atmospheric snapshots, per-channel standardization, and training-pair
sampling with a randomized lead time.

Training targets are state differences delta = x(t0 + dt) - x(t0), computed
in normalized space with statistics from the training split, for dt drawn
uniformly from {6, 12, 24} hours.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .catalog import VariableCatalog
from .errors import DegenerateChannelError, NonFiniteError, ShapeMismatchError, UsageError
from .grids import LatLonGrid

STEP_HOURS = 6
DELTA_T_SUPPORT = (6, 12, 24)


@dataclass(frozen=True)
class StateTensor:
    """One atmospheric snapshot: values[v, i, j] for channel v at grid cell (i, j).

    valid_time is in hours since the start of the series and must be 6-hour
    aligned. normalized says whether values are standardized or physical.
    """

    values: np.ndarray
    valid_time: int
    normalized: bool = False

    def __post_init__(self):
        if self.values.ndim != 3:
            raise ShapeMismatchError(f"state must be [V, H, W], got {self.values.shape}")
        if self.valid_time % STEP_HOURS != 0:
            raise UsageError(f"valid_time {self.valid_time} is not {STEP_HOURS}-hour aligned")
        if not np.all(np.isfinite(self.values)):
            raise NonFiniteError("state contains non-finite values")

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.values.shape


def check_state_layout(state: StateTensor, catalog: VariableCatalog, grid: LatLonGrid):
    expected = (catalog.n_channels, grid.n_lat, grid.n_lon)
    if state.shape != expected:
        raise ShapeMismatchError(f"state shape {state.shape} != catalog/grid shape {expected}")


@dataclass(frozen=True)
class NormStats:
    """Per-channel mean/std in physical units."""

    mean: np.ndarray  # [V]
    std: np.ndarray   # [V]

    def __post_init__(self):
        if self.mean.shape != self.std.shape or self.mean.ndim != 1:
            raise ShapeMismatchError("mean/std must be 1-D and congruent")
        if np.any(self.std <= 0):
            raise DegenerateChannelError("std must be positive for every channel")

    def normalize(self, state: StateTensor) -> StateTensor:
        if state.normalized:
            raise UsageError("state is already normalized")
        values = (state.values - self.mean[:, None, None]) / self.std[:, None, None]
        return replace(state, values=values, normalized=True)

    def denormalize(self, state: StateTensor) -> StateTensor:
        if not state.normalized:
            raise UsageError("state is not normalized")
        values = state.values * self.std[:, None, None] + self.mean[:, None, None]
        return replace(state, values=values, normalized=False)

    def to_dict(self) -> dict:
        return {"mean": [float(v) for v in self.mean], "std": [float(v) for v in self.std]}

    @classmethod
    def from_dict(cls, d: dict) -> "NormStats":
        return cls(mean=np.array(d["mean"], dtype=np.float64),
                   std=np.array(d["std"], dtype=np.float64))


def compute_norm_stats(series: Sequence[StateTensor]) -> NormStats:
    """Per-channel mean and population std over all time steps and grid cells.

    Raises DegenerateChannelError if any channel is (numerically) constant.
    """
    if len(series) < 2:
        raise UsageError("need at least 2 snapshots to compute statistics")
    stacked = np.stack([s.values for s in series]).astype(np.float64)  # [T, V, H, W]
    if not np.all(np.isfinite(stacked)):
        raise NonFiniteError("series contains non-finite values")
    mean = stacked.mean(axis=(0, 2, 3))
    std = stacked.std(axis=(0, 2, 3))
    # exact zeros happen for integer-valued constants; rounding noise on other
    # constants leaves a std many orders below any real signal
    degenerate = std <= 1e-12 * np.maximum(1.0, np.abs(mean))
    if np.any(degenerate):
        bad = np.flatnonzero(degenerate).tolist()
        raise DegenerateChannelError(f"zero-variance channels: {bad}")
    return NormStats(mean=mean, std=std)


def normalize_series(series: Sequence[StateTensor], stats: NormStats) -> list[StateTensor]:
    return [stats.normalize(s) for s in series]


def delta_target(x0: StateTensor, xt: StateTensor) -> np.ndarray:
    """Element-wise difference xt - x0. Both states must share shape and
    normalization."""
    if x0.shape != xt.shape:
        raise ShapeMismatchError(f"state shapes differ: {x0.shape} vs {xt.shape}")
    if x0.normalized != xt.normalized:
        raise UsageError("states are in different normalization spaces")
    return xt.values - x0.values


@dataclass(frozen=True)
class TrainingPair:
    x0: StateTensor
    delta_hours: int
    target: np.ndarray  # [V, H, W], xt - x0 in the same space as x0


def sample_delta_t(rng: np.random.Generator, support: Sequence[int] = DELTA_T_SUPPORT) -> int:
    """Draw a lead time uniformly from the support (default {6, 12, 24} hours)."""
    return int(support[rng.integers(len(support))])


def make_training_pair(series: Sequence[StateTensor], t_index: int,
                       rng: np.random.Generator,
                       support: Sequence[int] = DELTA_T_SUPPORT,
                       on_overflow: str = "error") -> TrainingPair:
    """Build one (x0, dt, delta) pair from a 6-hourly series.

    on_overflow controls what happens when t_index + dt runs past the series:
    "error" raises, "resample" redraws dt from the feasible part of the support.
    """
    if not 0 <= t_index < len(series):
        raise UsageError(f"t_index {t_index} outside series of length {len(series)}")
    delta_hours = sample_delta_t(rng, support)
    steps = delta_hours // STEP_HOURS
    if t_index + steps >= len(series):
        if on_overflow == "resample":
            feasible = [dt for dt in support if t_index + dt // STEP_HOURS < len(series)]
            if not feasible:
                raise UsageError(f"no feasible lead time at t_index {t_index}")
            delta_hours = sample_delta_t(rng, feasible)
            steps = delta_hours // STEP_HOURS
        else:
            raise UsageError(
                f"t_index {t_index} + {delta_hours}h exceeds series length {len(series)}")
    x0 = series[t_index]
    xt = series[t_index + steps]
    return TrainingPair(x0=x0, delta_hours=delta_hours, target=delta_target(x0, xt))
