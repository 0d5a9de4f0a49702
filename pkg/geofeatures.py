"""
从原始辅助数据派生 Amenity / Traffic / Emotions 三组特征

输入是预先准备好的原始文件 (pois.csv, traffic.csv, emotions.csv)，
本模块不访问任何在线地图或微博服务。
"""
import enum
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import attr
import numpy as np
import pandas as pd
from sortedcontainers import SortedKeyList

from dataset import Dataset, read_numeric_table, validate
from errors import EmptyDataset, MissingColumn, NoSamples, ParseError
from Property import FEATURE_COUNT
from utils.logutil import get_logger

EARTH_RADIUS_M = 6_371_000.0
DEFAULT_RADIUS_M = 1000.0
METERS_PER_DEGREE = EARTH_RADIUS_M * math.pi / 180.0
MINUTES_PER_DAY = 1440
_PERCENT_BITS = 44

POI_HEADER = ("lat", "lng", "category")
TRAFFIC_HEADER = ("lat", "lng", "minute", "speed")
EMOTION_HEADER = ("property_row", "anger", "detest", "happiness", "sadness", "fear")

PathLike = Union[str, os.PathLike]


class PoiCategory(str, enum.Enum):
    # 顺序即 Table 1 中 8-19 列的顺序
    TRANSPORTATION = "Transportation"
    ATTRACTION = "Attraction"
    EDUCATION = "Education"
    HEALTHCARE = "Healthcare"
    RESTAURANT = "Restaurant"
    RETAIL = "Retail"


POI_CATEGORIES: Tuple[PoiCategory, ...] = tuple(PoiCategory)
_CATEGORY_CODE: Dict[PoiCategory, int] = {c: i for i, c in enumerate(POI_CATEGORIES)}


def _check_lat(instance, attribute, value):
    if not -90.0 <= value <= 90.0:
        raise ValueError(f"纬度越界: {value}")


def _check_lng(instance, attribute, value):
    if not -180.0 <= value <= 180.0:
        raise ValueError(f"经度越界: {value}")


def _check_non_negative(instance, attribute, value):
    if value < 0:
        raise ValueError(f"{attribute.name} 不能为负: {value}")


@attr.s(frozen=True, slots=True)
class GeoPoint:
    lat: float = attr.ib(converter=float, validator=_check_lat)
    lng: float = attr.ib(converter=float, validator=_check_lng)


@attr.s(frozen=True, slots=True)
class PoiRecord:
    location: GeoPoint = attr.ib()
    category: PoiCategory = attr.ib(converter=PoiCategory)


@attr.s(frozen=True, slots=True)
class TrafficSample:
    location: GeoPoint = attr.ib()
    timestamp: int = attr.ib(converter=int)
    speed: float = attr.ib(converter=float, validator=_check_non_negative)


@attr.s(frozen=True, slots=True)
class EmotionTally:
    """按 (anger, detest, happiness, sadness, fear) 排列的微博情绪计数"""
    counts: Tuple[int, ...] = attr.ib(converter=lambda values: tuple(int(v) for v in values))

    @counts.validator
    def _check_counts(self, attribute, value):
        if len(value) != 5:
            raise ValueError(f"情绪计数需要 5 个值，实际 {len(value)}")
        if any(v < 0 for v in value):
            raise ValueError(f"情绪计数不能为负: {value}")


@attr.s(frozen=True, slots=True)
class TrafficWindow:
    """一天内的统计窗口，单位为午夜起的分钟数，左闭右开"""
    start: int = attr.ib(default=360, converter=int)
    end: int = attr.ib(default=MINUTES_PER_DAY, converter=int)

    @end.validator
    def _check_bounds(self, attribute, value):
        if not 0 <= self.start < value <= MINUTES_PER_DAY:
            raise ValueError(f"交通时间窗口非法: [{self.start}, {value})")

    def contains(self, minute: int) -> bool:
        return self.start <= minute < self.end


@attr.s(frozen=True, slots=True)
class GeoSettings:
    radius_m: float = attr.ib(default=DEFAULT_RADIUS_M, converter=float)
    grid_index: bool = attr.ib(default=True)
    window: TrafficWindow = attr.ib(factory=TrafficWindow)
    jobs: int = attr.ib(default=1, converter=int)


def haversine_m(a: GeoPoint, b: GeoPoint) -> float:
    """
    球面大圆距离 (米)，地球半径取 6,371,000 m

    :param a: 起点
    :param b: 终点
    :return: 距离，对称，且仅当 a == b 时为 0
    """
    phi1, phi2 = math.radians(a.lat), math.radians(b.lat)
    delta_phi = math.radians(b.lat - a.lat)
    delta_lambda = math.radians(b.lng - a.lng)
    h = math.sin(delta_phi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(delta_lambda / 2) ** 2
    return EARTH_RADIUS_M * 2 * math.atan2(math.sqrt(h), math.sqrt(max(0.0, 1 - h)))


def haversine_many(home: GeoPoint, lats: np.ndarray, lngs: np.ndarray) -> np.ndarray:
    """haversine_m 的向量版本，home 到每个点的距离"""
    phi1 = math.radians(home.lat)
    phi2 = np.radians(lats)
    delta_phi = np.radians(lats - home.lat)
    delta_lambda = np.radians(lngs - home.lng)
    h = np.sin(delta_phi / 2) ** 2 + math.cos(phi1) * np.cos(phi2) * np.sin(delta_lambda / 2) ** 2
    return EARTH_RADIUS_M * 2 * np.arctan2(np.sqrt(h), np.sqrt(np.clip(1 - h, 0.0, None)))


class GridIndex:
    """
    经纬度均匀网格索引

    query 先按半径的外接经纬度框取候选格子，再做精确距离过滤，
    结果与全量扫描逐位一致；靠近极点或跨越 ±180° 经线时直接退化为全量扫描。
    """

    def __init__(self, lats: np.ndarray, lngs: np.ndarray, cell_deg: Optional[float] = None):
        self.lats = np.asarray(lats, dtype=np.float64)
        self.lngs = np.asarray(lngs, dtype=np.float64)
        self.cell_deg = cell_deg or DEFAULT_RADIUS_M / METERS_PER_DEGREE
        self.cells: Dict[Tuple[int, int], np.ndarray] = {}

        rows = np.floor(self.lats / self.cell_deg).astype(np.int64)
        cols = np.floor(self.lngs / self.cell_deg).astype(np.int64)
        buckets: Dict[Tuple[int, int], List[int]] = {}
        for i, key in enumerate(zip(rows.tolist(), cols.tolist())):
            buckets.setdefault(key, []).append(i)
        self.cells = {key: np.asarray(members, dtype=np.int64) for key, members in buckets.items()}

    def __len__(self) -> int:
        return int(self.lats.shape[0])

    def _bounding_box(self, home: GeoPoint, radius_m: float) -> Optional[Tuple[float, float, float, float]]:
        angular = radius_m / EARTH_RADIUS_M
        if angular >= math.pi / 2:
            return None
        margin = 1e-9
        min_lat = home.lat - math.degrees(angular) - margin
        max_lat = home.lat + math.degrees(angular) + margin
        if min_lat <= -90.0 or max_lat >= 90.0:
            return None
        delta_lng = math.degrees(math.asin(min(1.0, math.sin(angular) / math.cos(math.radians(home.lat)))))
        min_lng = home.lng - delta_lng - margin
        max_lng = home.lng + delta_lng + margin
        if min_lng < -180.0 or max_lng > 180.0:
            return None
        return min_lat, max_lat, min_lng, max_lng

    def candidates(self, home: GeoPoint, radius_m: float) -> np.ndarray:
        box = self._bounding_box(home, radius_m)
        if box is None:
            return np.arange(len(self), dtype=np.int64)
        min_lat, max_lat, min_lng, max_lng = box
        row_range = range(math.floor(min_lat / self.cell_deg), math.floor(max_lat / self.cell_deg) + 1)
        col_range = range(math.floor(min_lng / self.cell_deg), math.floor(max_lng / self.cell_deg) + 1)
        found = [self.cells[(r, c)] for r in row_range for c in col_range if (r, c) in self.cells]
        if not found:
            return np.empty(0, dtype=np.int64)
        return np.sort(np.concatenate(found))

    def query(self, home: GeoPoint, radius_m: float) -> Tuple[np.ndarray, np.ndarray]:
        """返回半径内 (含边界) 点的下标 (升序) 及其距离"""
        idx = self.candidates(home, radius_m)
        distances = haversine_many(home, self.lats[idx], self.lngs[idx])
        keep = distances <= radius_m
        return idx[keep], distances[keep]


def scan(home: GeoPoint, lats: np.ndarray, lngs: np.ndarray, radius_m: float) -> Tuple[np.ndarray, np.ndarray]:
    distances = haversine_many(home, lats, lngs)
    keep = distances <= radius_m
    return np.flatnonzero(keep), distances[keep]


class PoiTable:
    """列式存储的 POI 集合，按需建立网格索引"""

    def __init__(self, lats: Sequence[float], lngs: Sequence[float], codes: Sequence[int]):
        self.lats = np.asarray(lats, dtype=np.float64)
        self.lngs = np.asarray(lngs, dtype=np.float64)
        self.codes = np.asarray(codes, dtype=np.int64)
        self._index: Optional[GridIndex] = None

    def __len__(self) -> int:
        return int(self.codes.shape[0])

    @property
    def index(self) -> GridIndex:
        if self._index is None:
            self._index = GridIndex(self.lats, self.lngs)
        return self._index

    @classmethod
    def from_records(cls, pois: Iterable[PoiRecord]) -> "PoiTable":
        pois = list(pois)
        return cls(
            [p.location.lat for p in pois],
            [p.location.lng for p in pois],
            [_CATEGORY_CODE[p.category] for p in pois],
        )

    def within(self, home: GeoPoint, radius_m: float, use_index: bool) -> Tuple[np.ndarray, np.ndarray]:
        if use_index:
            return self.index.query(home, radius_m)
        return scan(home, self.lats, self.lngs, radius_m)


def amenity_features(
        home: GeoPoint,
        pois: Union[Sequence[PoiRecord], PoiTable],
        radius_m: float = DEFAULT_RADIUS_M,
        use_index: bool = False,
) -> List[float]:
    """
    周边设施的数量与平均距离

    :param home: 房产坐标
    :param pois: POI 列表或 PoiTable
    :param radius_m: 搜索半径，含边界
    :param use_index: 是否使用网格索引 (结果与全量扫描一致)
    :return: 12 个值，依次为六类设施的 (数量, 平均距离)；某类为空时距离取半径
    """
    table = pois if isinstance(pois, PoiTable) else PoiTable.from_records(pois)
    idx, distances = table.within(home, radius_m, use_index)
    codes = table.codes[idx]
    values: List[float] = []
    for code in range(len(POI_CATEGORIES)):
        hits = distances[codes == code]
        count = int(hits.shape[0])
        # fsum 与求和顺序无关，索引与全量扫描得到同样的均值
        mean = math.fsum(hits.tolist()) / count if count else radius_m
        values.extend([float(count), min(mean, radius_m)])
    return values


def traffic_feature(samples: Iterable[TrafficSample], window: Optional[TrafficWindow] = None) -> float:
    """
    时间窗口内交通速度的算术平均 (km/h)，即 TrfV

    :param samples: 已关联到某处房产的速度样本
    :param window: 统计窗口，默认 06:00-24:00
    """
    window = window or TrafficWindow()
    ordered = SortedKeyList(samples, key=lambda s: s.timestamp)
    in_window = list(ordered.irange_key(window.start, window.end, inclusive=(True, False)))
    if not in_window:
        raise NoSamples(f"窗口 [{window.start}, {window.end})")
    return math.fsum(s.speed for s in in_window) / len(in_window)


def emotion_features(tally: EmotionTally) -> List[float]:
    """
    各类情绪在全部情绪中的百分比；总数为 0 时全部为 0

    各项量化到 2^-44 的整数倍，任意顺序相加都没有舍入误差；
    最后一个非零类别取 100 减去其余各项，五项之和恰为 100
    """
    total = sum(tally.counts)
    if total == 0:
        return [0.0] * 5
    last = max(i for i, count in enumerate(tally.counts) if count > 0)
    percentages = [0.0] * 5
    for i in range(last):
        percentages[i] = math.ldexp(round(math.ldexp(100.0 * tally.counts[i] / total, _PERCENT_BITS)), -_PERCENT_BITS)
    percentages[last] = 100.0 - sum(percentages)
    return percentages


class TrafficTable:
    def __init__(self, lats: Sequence[float], lngs: Sequence[float], minutes: Sequence[int], speeds: Sequence[float]):
        self.lats = np.asarray(lats, dtype=np.float64)
        self.lngs = np.asarray(lngs, dtype=np.float64)
        self.minutes = np.asarray(minutes, dtype=np.int64)
        self.speeds = np.asarray(speeds, dtype=np.float64)
        self._index: Optional[GridIndex] = None

    def __len__(self) -> int:
        return int(self.speeds.shape[0])

    @property
    def index(self) -> GridIndex:
        if self._index is None:
            self._index = GridIndex(self.lats, self.lngs)
        return self._index

    @classmethod
    def from_samples(cls, samples: Iterable[TrafficSample]) -> "TrafficTable":
        samples = list(samples)
        return cls(
            [s.location.lat for s in samples],
            [s.location.lng for s in samples],
            [s.timestamp for s in samples],
            [s.speed for s in samples],
        )

    def samples(self, indices: Iterable[int]) -> List[TrafficSample]:
        return [
            TrafficSample(GeoPoint(self.lats[i], self.lngs[i]), int(self.minutes[i]), float(self.speeds[i]))
            for i in indices
        ]


def traffic_near(
        home: GeoPoint,
        traffic: Union[Sequence[TrafficSample], TrafficTable],
        radius_m: float = DEFAULT_RADIUS_M,
        use_index: bool = False,
) -> List[TrafficSample]:
    """把半径内的速度样本关联到房产"""
    table = traffic if isinstance(traffic, TrafficTable) else TrafficTable.from_samples(traffic)
    if use_index:
        idx, _ = table.index.query(home, radius_m)
    else:
        idx, _ = scan(home, table.lats, table.lngs, radius_m)
    return table.samples(idx.tolist())


def read_pois(path: PathLike) -> PoiTable:
    source = str(path)
    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False, na_filter=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        raise MissingColumn(POI_HEADER, []) from None
    if list(raw.columns) != list(POI_HEADER):
        raise MissingColumn(POI_HEADER, list(raw.columns))
    if raw.empty:
        raise EmptyDataset(source)

    lats, lngs, codes = [], [], []
    for row, (lat, lng, category) in enumerate(raw.itertuples(index=False, name=None), start=1):
        try:
            point = GeoPoint(float(lat), float(lng))
        except ValueError:
            raise ParseError(row, "lat/lng", f"{lat},{lng}", source) from None
        try:
            code = _CATEGORY_CODE[PoiCategory(category)]
        except ValueError:
            raise ParseError(row, "category", category, source) from None
        lats.append(point.lat)
        lngs.append(point.lng)
        codes.append(code)
    return PoiTable(lats, lngs, codes)


def read_traffic(path: PathLike) -> TrafficTable:
    table = read_numeric_table(path, TRAFFIC_HEADER)
    for row, (lat, lng, minute, speed) in enumerate(table, start=1):
        if not (-90 <= lat <= 90 and -180 <= lng <= 180):
            raise ParseError(row, "lat/lng", f"{lat},{lng}", str(path))
        if minute != math.floor(minute) or not 0 <= minute < MINUTES_PER_DAY:
            raise ParseError(row, "minute", repr(minute), str(path))
        if speed < 0:
            raise ParseError(row, "speed", repr(speed), str(path))
    return TrafficTable(table[:, 0], table[:, 1], table[:, 2].astype(np.int64), table[:, 3])


def read_emotions(path: PathLike) -> Dict[int, EmotionTally]:
    """emotions.csv 的 property_row 为房产表中 0 起始的行号"""
    table = read_numeric_table(path, EMOTION_HEADER)
    tallies: Dict[int, EmotionTally] = {}
    for row, values in enumerate(table, start=1):
        if any(v < 0 or v != math.floor(v) for v in values):
            raise ParseError(row, "counts", ",".join(repr(v) for v in values), str(path))
        tallies[int(values[0])] = EmotionTally(values[1:])
    return tallies


def derive_row(
        home: GeoPoint,
        pois: PoiTable,
        traffic: TrafficTable,
        tally: Optional[EmotionTally],
        settings: GeoSettings,
) -> List[float]:
    """单处房产的 18 个派生特征 (12 设施 + 1 交通 + 5 情绪)"""
    amenity = amenity_features(home, pois, settings.radius_m, settings.grid_index)
    nearby = traffic_near(home, traffic, settings.radius_m, settings.grid_index)
    try:
        speed = traffic_feature(nearby, settings.window)
    except NoSamples:
        raise NoSamples(f"({home.lat}, {home.lng}) 半径 {settings.radius_m:g} 米内") from None
    emotions = emotion_features(tally or EmotionTally((0, 0, 0, 0, 0)))
    return amenity + [speed] + emotions


def derive_dataset(
        properties: np.ndarray,
        pois: PoiTable,
        traffic: TrafficTable,
        emotions: Dict[int, EmotionTally],
        settings: Optional[GeoSettings] = None,
        provenance: str = "<derived>",
        logger: Optional[logging.Logger] = None,
) -> Dataset:
    """
    由房产基础表与三类原始数据拼出完整 26 特征数据集

    :param properties: n × 9 矩阵 (Year..Lng, Price)
    :param settings: 半径、时间窗口、是否用索引、并行度
    :return: 行序与 properties 一致的 Dataset
    """
    logger = logger or get_logger()
    settings = settings or GeoSettings()
    properties = np.asarray(properties, dtype=np.float64)
    if properties.shape[0] == 0:
        raise EmptyDataset(provenance)

    def work(row: int) -> List[float]:
        home = GeoPoint(properties[row, 6], properties[row, 7])
        return derive_row(home, pois, traffic, emotions.get(row), settings)

    if settings.grid_index:
        # 先在主线程建好索引，工作线程只读
        _ = pois.index, traffic.index
    rows = range(properties.shape[0])
    if settings.jobs > 1:
        with ThreadPoolExecutor(max_workers=settings.jobs) as pool:
            derived = list(pool.map(work, rows))
    else:
        derived = [work(row) for row in rows]

    features = np.column_stack([properties[:, :8], np.asarray(derived, dtype=np.float64)])
    assert features.shape[1] == FEATURE_COUNT
    data = Dataset(features, properties[:, 8], provenance)
    validate(data)
    logger.info(f"已派生 {len(data)} 处房产的设施/交通/情绪特征 (POI {len(pois)}, 交通样本 {len(traffic)})")
    return data
