"""Channel catalog: which variables live at which pressure levels, and the
dynamics/thermodynamics channel split.

Channel order is variable-major: for each upper-air variable all levels in
descending pressure (1000 hPa first), then the surface variables. The full
catalog has 5 x 13 + 5 = 70 channels.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import UsageError

# (long name, short name, unit)
UPPER_AIR_VARS = (
    ("zonal_wind", "U", "m/s"),
    ("meridional_wind", "V", "m/s"),
    ("temperature", "T", "K"),
    ("specific_humidity", "Q", "kg/kg"),
    ("geopotential", "Z", "m^2/s^2"),
)
SURFACE_VARS = (
    ("2m_temperature", "T2m", "K"),
    ("mean_sea_level_pressure", "MSLP", "Pa"),
    ("surface_pressure", "SP", "Pa"),
    ("10m_zonal_wind", "U10", "m/s"),
    ("10m_meridional_wind", "V10", "m/s"),
)
# Descending pressure, i.e. from the surface upward.
LEVELS_HPA = (1000, 925, 850, 700, 600, 500, 400, 300, 250, 200, 150, 100, 50)

# Kinematic drivers (winds, geopotential, pressure) vs. state variables
# (temperature, moisture). Surface variables are assigned by analogy.
DYNAMICS_SHORT_NAMES = frozenset({"U", "V", "Z", "U10", "V10", "MSLP", "SP"})
THERMO_SHORT_NAMES = frozenset({"T", "Q", "T2m"})


@dataclass(frozen=True)
class ChannelInfo:
    name: str
    short_name: str
    unit: str
    level_hpa: float | None  # None for surface channels

    @property
    def label(self) -> str:
        if self.level_hpa is None:
            return self.short_name
        return f"{self.short_name}{int(self.level_hpa)}"


@dataclass(frozen=True)
class GroupSplit:
    """Disjoint channel index sets covering the whole catalog."""

    dynamics: tuple[int, ...]
    thermo: tuple[int, ...]

    def __post_init__(self):
        if set(self.dynamics) & set(self.thermo):
            raise UsageError("dynamics and thermo channel sets overlap")


class VariableCatalog:
    """Deterministic channel layout for a set of variables and levels."""

    def __init__(self, upper_air=UPPER_AIR_VARS, levels_hpa=LEVELS_HPA,
                 surface=SURFACE_VARS):
        self.upper_air = tuple(tuple(v) for v in upper_air)
        self.levels_hpa = tuple(float(p) for p in levels_hpa)
        self.surface = tuple(tuple(v) for v in surface)
        if len(self.levels_hpa) != len(set(self.levels_hpa)):
            raise UsageError("duplicate pressure levels")
        channels = []
        for name, short, unit in self.upper_air:
            for level in self.levels_hpa:
                channels.append(ChannelInfo(name, short, unit, level))
        for name, short, unit in self.surface:
            channels.append(ChannelInfo(name, short, unit, None))
        self.channels = tuple(channels)
        self._index = {(c.short_name, c.level_hpa): i for i, c in enumerate(channels)}
        if len(self._index) != len(channels):
            raise UsageError("channel layout is not a bijection")

    @property
    def n_channels(self) -> int:
        return len(self.channels)

    def channel_index(self, short_name: str, level_hpa: float | None = None) -> int:
        key = (short_name, float(level_hpa) if level_hpa is not None else None)
        if key not in self._index:
            raise UsageError(f"no channel {short_name!r} at level {level_hpa!r}")
        return self._index[key]

    def channel_info(self, index: int) -> ChannelInfo:
        return self.channels[index]

    def group_split(self) -> GroupSplit:
        dyn, thermo = [], []
        for i, c in enumerate(self.channels):
            if c.short_name in DYNAMICS_SHORT_NAMES:
                dyn.append(i)
            elif c.short_name in THERMO_SHORT_NAMES:
                thermo.append(i)
            else:
                raise UsageError(f"channel {c.short_name!r} has no group assignment")
        return GroupSplit(dynamics=tuple(dyn), thermo=tuple(thermo))

    def to_dict(self) -> dict:
        return {
            "upper_air": [list(v) for v in self.upper_air],
            "levels_hpa": list(self.levels_hpa),
            "surface": [list(v) for v in self.surface],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VariableCatalog":
        return cls(upper_air=[tuple(v) for v in d["upper_air"]],
                   levels_hpa=d["levels_hpa"],
                   surface=[tuple(v) for v in d["surface"]])

    def __eq__(self, other):
        return isinstance(other, VariableCatalog) and self.to_dict() == other.to_dict()

    def __repr__(self):
        return (f"VariableCatalog({len(self.upper_air)} upper-air vars x "
                f"{len(self.levels_hpa)} levels + {len(self.surface)} surface)")


def era5_catalog() -> VariableCatalog:
    """The full 70-channel catalog."""
    return VariableCatalog()


def toy_catalog(n_channels: int = 8) -> VariableCatalog:
    """Small catalog for desk-scale runs: U and T on (n_channels - 2) / 2
    levels, plus MSLP and T2m at the surface. MSLP is kept so toy data can
    feed the cyclone tracker. n_channels must be even and >= 4."""
    if n_channels < 4 or n_channels % 2 != 0:
        raise UsageError("toy catalog needs an even channel count >= 4")
    n_levels = (n_channels - 2) // 2
    if n_levels > len(LEVELS_HPA):
        raise UsageError(f"toy catalog supports at most {2 * len(LEVELS_HPA) + 2} channels")
    return VariableCatalog(
        upper_air=(UPPER_AIR_VARS[0], UPPER_AIR_VARS[2]),  # U, T
        levels_hpa=LEVELS_HPA[:n_levels],
        surface=(SURFACE_VARS[1], SURFACE_VARS[0]),        # MSLP, T2m
    )
