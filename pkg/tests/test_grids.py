import numpy as np
import pytest

from gridcast.errors import InvalidGridError
from gridcast.grids import (
    EARTH_RADIUS_KM,
    LatLonGrid,
    Region,
    great_circle_km,
    latitude_weights,
    region_mask,
)


def grid_from_lats(lats):
    return LatLonGrid(latitudes=np.asarray(lats, dtype=float),
                      longitudes=np.array([0.0, 90.0, 180.0, 270.0]))


class TestLatLonGrid:
    def test_rejects_out_of_range_latitude(self):
        with pytest.raises(InvalidGridError):
            grid_from_lats([0.0, 95.0])

    def test_rejects_non_monotonic_latitudes(self):
        with pytest.raises(InvalidGridError):
            grid_from_lats([0.0, 10.0, 5.0])

    def test_rejects_too_small(self):
        with pytest.raises(InvalidGridError):
            LatLonGrid(latitudes=np.array([0.0]), longitudes=np.array([0.0, 180.0]))

    def test_rejects_nonuniform_longitudes(self):
        with pytest.raises(InvalidGridError):
            LatLonGrid(latitudes=np.array([0.0, 10.0]),
                       longitudes=np.array([0.0, 10.0, 30.0]))

    def test_uniform_constructors(self):
        g = LatLonGrid.uniform(121, 240)
        assert g.shape == (121, 240)
        assert g.latitudes[0] == -90.0 and g.latitudes[-1] == 90.0
        gc = LatLonGrid.uniform(8, 16, include_poles=False)
        assert np.all(np.abs(gc.latitudes) < 90.0)
        gd = LatLonGrid.uniform(5, 8, descending=True)
        assert gd.latitudes[0] == 90.0

    def test_dict_roundtrip(self):
        g = LatLonGrid.uniform(7, 12, include_poles=False)
        g2 = LatLonGrid.from_dict(g.to_dict())
        assert np.array_equal(g.latitudes, g2.latitudes)
        assert np.array_equal(g.longitudes, g2.longitudes)


class TestLatitudeWeights:
    def test_equator_only_rows_weigh_one(self):
        w = latitude_weights(grid_from_lats([0.0, 0.0 + 1e-12]))
        assert np.allclose(w, 1.0, atol=1e-9)

    def test_two_row_hand_case(self):
        # cos = {1, 0.5}, mean 0.75 -> weights {4/3, 2/3}
        w = latitude_weights(grid_from_lats([0.0, 60.0]))
        assert np.allclose(w, [4.0 / 3.0, 2.0 / 3.0], atol=1e-12)

    def test_full_grid_sums_to_row_count(self):
        g = LatLonGrid.uniform(121, 240)  # -90..90 step 1.5
        w = latitude_weights(g)
        assert abs(w.sum() - 121.0) < 1e-9

    def test_mean_is_one_on_random_grids(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            n = int(rng.integers(2, 80))
            lats = np.sort(rng.uniform(-90, 90, size=n))
            lats += np.arange(n) * 1e-9  # ensure strict monotonicity
            w = latitude_weights(grid_from_lats(np.clip(lats, -90, 90)))
            assert abs(w.mean() - 1.0) < 1e-12


class TestRegionMasks:
    def test_band_membership(self):
        g = grid_from_lats([-90.0, -20.0, 0.0, 20.0, 90.0])
        nhet = region_mask(g, Region.NHET).mask
        shet = region_mask(g, Region.SHET).mask
        tropics = region_mask(g, Region.TROPICS).mask
        assert tropics[2].all() and not nhet[2].any()
        # the +/-20 rows go poleward
        assert nhet[3].all() and not tropics[3].any()
        assert shet[1].all() and not tropics[1].any()

    def test_partition_of_sphere(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            n = int(rng.integers(2, 60))
            lats = np.unique(rng.uniform(-90, 90, size=n))
            if lats.size < 2:
                continue
            g = grid_from_lats(lats)
            nhet = region_mask(g, Region.NHET).mask
            shet = region_mask(g, Region.SHET).mask
            tropics = region_mask(g, Region.TROPICS).mask
            total = nhet.astype(int) + shet.astype(int) + tropics.astype(int)
            assert np.all(total == 1)
            assert region_mask(g, Region.GLOBAL).mask.all()


class TestGreatCircle:
    def test_identity(self):
        assert great_circle_km((12.0, 34.0), (12.0, 34.0)) == 0.0

    def test_pole_to_equator(self):
        # quarter circumference = (pi/2) * 6371
        d = great_circle_km((0.0, 0.0), (90.0, 0.0))
        assert abs(d - np.pi / 2 * EARTH_RADIUS_KM) < 1e-9
        assert abs(d - 10007.543) < 0.01

    def test_antipodal(self):
        d = great_circle_km((0.0, 0.0), (0.0, 180.0))
        assert abs(d - np.pi * EARTH_RADIUS_KM) < 1e-9
        assert abs(d - 20015.087) < 0.01

    def test_symmetry_and_wraparound(self):
        a, b = (40.0, 10.0), (-30.0, 250.0)
        assert great_circle_km(a, b) == pytest.approx(great_circle_km(b, a), abs=1e-12)
        assert great_circle_km((10.0, 0.0), (10.0, 360.0)) < 1e-9

    def test_triangle_inequality_random_triples(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            pts = [(float(rng.uniform(-90, 90)), float(rng.uniform(0, 360)))
                   for _ in range(3)]
            ab = great_circle_km(pts[0], pts[1])
            bc = great_circle_km(pts[1], pts[2])
            ac = great_circle_km(pts[0], pts[2])
            assert ac <= ab + bc + 1e-6
