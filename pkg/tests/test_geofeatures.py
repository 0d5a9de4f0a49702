import itertools
import math

import numpy as np
import pytest

from errors import NoSamples
from geofeatures import (
    EARTH_RADIUS_M, METERS_PER_DEGREE, POI_CATEGORIES, EmotionTally, GeoPoint, GeoSettings, GridIndex, PoiCategory,
    PoiRecord, PoiTable, TrafficSample, TrafficWindow, amenity_features, derive_dataset, emotion_features,
    haversine_m, haversine_many, read_emotions, read_pois, read_traffic, scan, traffic_feature, traffic_near,
)
from dataset import ingest_property_csv
from synth import synthetic_sources, write_sources

HOME = GeoPoint(39.9, 116.4)


def _north_of(home: GeoPoint, meters: float) -> GeoPoint:
    return GeoPoint(home.lat + meters / METERS_PER_DEGREE, home.lng)


def _cosine_law(a: GeoPoint, b: GeoPoint) -> float:
    phi1, phi2 = math.radians(a.lat), math.radians(b.lat)
    delta = math.radians(b.lng - a.lng)
    cos_c = math.sin(phi1) * math.sin(phi2) + math.cos(phi1) * math.cos(phi2) * math.cos(delta)
    return EARTH_RADIUS_M * math.acos(min(1.0, max(-1.0, cos_c)))


class TestHaversine:
    def test_identity(self):
        assert haversine_m(HOME, HOME) == 0.0

    def test_one_degree_of_latitude(self):
        d = haversine_m(GeoPoint(39.0, 116.0), GeoPoint(40.0, 116.0))
        assert d == pytest.approx(EARTH_RADIUS_M * math.pi / 180, rel=1e-12)
        assert d == pytest.approx(111_195, abs=1)
        assert d == pytest.approx(_cosine_law(GeoPoint(39.0, 116.0), GeoPoint(40.0, 116.0)), rel=1e-9)

    def test_symmetry(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            a = GeoPoint(rng.uniform(-80, 80), rng.uniform(-179, 179))
            b = GeoPoint(rng.uniform(-80, 80), rng.uniform(-179, 179))
            assert haversine_m(a, b) == haversine_m(b, a)

    def test_triangle_inequality(self):
        rng = np.random.default_rng(1)
        for _ in range(2000):
            a, b, c = (GeoPoint(rng.uniform(-80, 80), rng.uniform(-179, 179)) for _ in range(3))
            assert haversine_m(a, c) <= haversine_m(a, b) + haversine_m(b, c) + 1e-3


class TestAmenity:
    def test_three_restaurants(self):
        pois = [PoiRecord(_north_of(HOME, d), PoiCategory.RESTAURANT) for d in (100.0, 200.0, 300.0)]
        values = amenity_features(HOME, pois)
        assert values[8] == 3
        assert values[9] == pytest.approx(200.0, abs=1e-6)
        for code in range(6):
            if code != 4:
                assert values[2 * code] == 0
                assert values[2 * code + 1] == 1000.0

    def test_empty_field_uses_sentinel(self):
        values = amenity_features(HOME, [])
        assert values == [0.0, 1000.0] * 6

    def test_radius_is_inclusive(self):
        far = PoiRecord(_north_of(HOME, 1500.0), PoiCategory.RETAIL)
        assert amenity_features(HOME, [far])[10] == 0
        edge = _north_of(HOME, 999.0)
        radius = float(haversine_many(HOME, np.array([edge.lat]), np.array([edge.lng]))[0])
        assert amenity_features(HOME, [PoiRecord(edge, PoiCategory.RETAIL)], radius_m=radius)[10] == 1

    def test_matches_brute_force(self):
        rng = np.random.default_rng(4)
        pois = [
            PoiRecord(GeoPoint(39.9 + rng.uniform(-0.02, 0.02), 116.4 + rng.uniform(-0.025, 0.025)),
                      POI_CATEGORIES[int(rng.integers(0, 6))])
            for _ in range(600)
        ]
        values = amenity_features(HOME, pois)
        for code, category in enumerate(POI_CATEGORIES):
            distances = [haversine_m(HOME, p.location) for p in pois if p.category is category]
            inside = [d for d in distances if d <= 1000.0]
            assert values[2 * code] == len(inside)
            expected = sum(inside) / len(inside) if inside else 1000.0
            assert values[2 * code + 1] == pytest.approx(expected, rel=1e-9)

    def test_poi_order_does_not_matter(self):
        rng = np.random.default_rng(7)
        pois = [
            PoiRecord(GeoPoint(39.9 + rng.uniform(-0.015, 0.015), 116.4 + rng.uniform(-0.02, 0.02)),
                      POI_CATEGORIES[int(rng.integers(0, 6))])
            for _ in range(300)
        ]
        values = amenity_features(HOME, pois)
        shuffled = [pois[i] for i in rng.permutation(len(pois))]
        again = amenity_features(HOME, shuffled)
        assert again[0::2] == values[0::2]
        assert again[1::2] == pytest.approx(values[1::2], rel=1e-12)

    def test_grid_index_equals_scan(self):
        rng = np.random.default_rng(5)
        lats = 39.9 + rng.uniform(-0.05, 0.05, 3000)
        lngs = 116.4 + rng.uniform(-0.06, 0.06, 3000)
        codes = rng.integers(0, 6, 3000)
        table = PoiTable(lats, lngs, codes)
        for _ in range(30):
            home = GeoPoint(39.9 + rng.uniform(-0.04, 0.04), 116.4 + rng.uniform(-0.05, 0.05))
            assert amenity_features(home, table, use_index=True) == amenity_features(home, table, use_index=False)

    def test_grid_index_near_antimeridian_falls_back_to_scan(self):
        lats = np.array([10.0, 10.001, 10.0])
        lngs = np.array([179.999, -179.999, 0.0])
        index = GridIndex(lats, lngs)
        home = GeoPoint(10.0, 180.0)
        idx, _ = index.query(home, 1000.0)
        expected, _ = scan(home, lats, lngs, 1000.0)
        assert idx.tolist() == expected.tolist() == [0, 1]


class TestTraffic:
    @staticmethod
    def _samples(speeds, minutes=None):
        minutes = minutes or [600 + i for i in range(len(speeds))]
        return [TrafficSample(HOME, m, s) for m, s in zip(minutes, speeds)]

    def test_mean(self):
        assert traffic_feature(self._samples([30, 40, 50])) == 40

    def test_single(self):
        assert traffic_feature(self._samples([55])) == 55

    def test_five_minute_series(self):
        rng = np.random.default_rng(6)
        speeds = rng.uniform(5, 80, 216).tolist()
        minutes = [360 + 5 * i for i in range(216)]
        assert traffic_feature(self._samples(speeds, minutes)) == pytest.approx(sum(speeds) / 216, rel=1e-12)

    def test_window_is_half_open(self):
        samples = self._samples([10, 20, 90], [359, 360, 1440 - 1])
        assert traffic_feature(samples) == pytest.approx(55.0)
        assert traffic_feature(samples, TrafficWindow(0, 360)) == 10

    def test_no_samples(self):
        with pytest.raises(NoSamples):
            traffic_feature(self._samples([10], [100]))
        with pytest.raises(NoSamples):
            traffic_feature([])

    def test_bad_window(self):
        with pytest.raises(ValueError):
            TrafficWindow(600, 600)

    def test_only_nearby_samples_attach(self):
        near = TrafficSample(_north_of(HOME, 400.0), 600, 30.0)
        far = TrafficSample(_north_of(HOME, 2500.0), 600, 90.0)
        attached = traffic_near(HOME, [near, far, near])
        assert [s.speed for s in attached] == [30.0, 30.0]
        assert traffic_feature(attached) == 30.0


class TestEmotion:
    @pytest.mark.parametrize("counts, expected", [
        ((1, 1, 2, 0, 0), [25, 25, 50, 0, 0]),
        ((0, 0, 0, 0, 0), [0, 0, 0, 0, 0]),
        ((3, 1, 4, 1, 1), [30, 10, 40, 10, 10]),
    ])
    def test_percentages(self, counts, expected):
        assert emotion_features(EmotionTally(counts)) == pytest.approx(expected, abs=1e-12)

    def test_percentages_sum_to_exactly_100(self):
        for counts in itertools.product(range(8), repeat=5):
            values = emotion_features(EmotionTally(counts))
            total = sum(counts)
            if total == 0:
                assert values == [0.0] * 5
                continue
            assert sum(values) == math.fsum(values) == float(np.sum(values)) == 100.0, counts
            assert all(0.0 <= v <= 100.0 for v in values)
            assert values == pytest.approx([100.0 * c / total for c in counts], abs=1e-12)

    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError):
            EmotionTally((1, -1, 0, 0, 0))


class TestDerive:
    def test_end_to_end_from_raw_files(self, tmp_path, logger):
        paths = write_sources(synthetic_sources(n_homes=25, seed=2, pois_per_category=40), tmp_path)
        properties = ingest_property_csv(paths["properties"], logger=logger)
        pois = read_pois(paths["pois"])
        traffic = read_traffic(paths["traffic"])
        emotions = read_emotions(paths["emotions"])

        serial = derive_dataset(properties, pois, traffic, emotions, GeoSettings(jobs=1), logger=logger)
        threaded = derive_dataset(properties, pois, traffic, emotions, GeoSettings(jobs=4), logger=logger)
        flat = derive_dataset(properties, pois, traffic, emotions, GeoSettings(grid_index=False), logger=logger)

        assert len(serial) == 25
        assert serial.equals(threaded)
        assert serial.equals(flat)
        assert np.array_equal(serial.features[:, :8], properties[:, :8])
        for row in range(25):
            if row not in emotions:
                assert serial.features[row, 21:].tolist() == [0.0] * 5
