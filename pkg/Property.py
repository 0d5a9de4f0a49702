import enum
import math
from typing import Dict, List, Sequence, Tuple, Union

import attr


class Category(str, enum.Enum):
    PROPERTY = "Property"
    AMENITY = "Amenity"
    TRAFFIC = "Traffic"
    EMOTIONS = "Emotions"


@attr.s(frozen=True, slots=True, repr=False)
class FeatureId:
    """
    单个自变量的标识

    参数:
        index: 0-25 的列序号
        name: 列名 (如 'Year', 'TspDst')
        category: 所属数据源类别
        description: 英文说明
    """
    index: int = attr.ib()
    name: str = attr.ib()
    category: Category = attr.ib()
    description: str = attr.ib(default="", eq=False)

    def __repr__(self) -> str:
        return f"FeatureId({self.index}, {self.name!r}, {self.category.value})"


_SCHEMA: Tuple[Tuple[str, Category, str], ...] = (
    ("Year", Category.PROPERTY, "the building year"),
    ("Elvt", Category.PROPERTY, "whether there is an elevator in the building"),
    ("RmNum", Category.PROPERTY, "the number of bedrooms"),
    ("HllNum", Category.PROPERTY, "the number of living and dining rooms"),
    ("KchNum", Category.PROPERTY, "the number of kitchens"),
    ("BthNum", Category.PROPERTY, "the number of bathrooms"),
    ("Lat", Category.PROPERTY, "the latitude of the house"),
    ("Lng", Category.PROPERTY, "the longitude of the house"),
    ("TspNum", Category.AMENITY, "the number of surrounding transportation infrastructure"),
    ("TspDst", Category.AMENITY, "the average distance of surrounding transportation infrastructure"),
    ("AtrNum", Category.AMENITY, "the number of surrounding tourist attractions"),
    ("AtrDst", Category.AMENITY, "the average distance of surrounding tourist attractions"),
    ("EdcNum", Category.AMENITY, "the number of surrounding education and training institutions"),
    ("EdcDst", Category.AMENITY, "the average distance of education and training institutions"),
    ("HthNum", Category.AMENITY, "the number of surrounding healthcare infrastructure"),
    ("HthDst", Category.AMENITY, "the average distance of surrounding healthcare infrastructure"),
    ("RstNum", Category.AMENITY, "the number of surrounding restaurants"),
    ("RstDst", Category.AMENITY, "the average distance of surrounding restaurants"),
    ("RtlNum", Category.AMENITY, "the number of surrounding retail goods and services"),
    ("RtlDst", Category.AMENITY, "the average distance of surrounding retail goods and services"),
    ("TrfV", Category.TRAFFIC, "the average value of daily traffic speeds"),
    ("AgrPct", Category.EMOTIONS, "the percentage of anger in all emotions"),
    ("DstPct", Category.EMOTIONS, "the percentage of detestation in all emotions"),
    ("HppPct", Category.EMOTIONS, "the percentage of happiness in all emotions"),
    ("SadPct", Category.EMOTIONS, "the percentage of sadness in all emotions"),
    ("FeaPct", Category.EMOTIONS, "the percentage of fear in all emotions"),
)

FEATURES: Tuple[FeatureId, ...] = tuple(
    FeatureId(index, name, category, description)
    for index, (name, category, description) in enumerate(_SCHEMA)
)
FEATURE_COUNT = len(FEATURES)
PRICE_COLUMN = "Price"
FEATURE_NAMES: Tuple[str, ...] = tuple(f.name for f in FEATURES)
HEADER: Tuple[str, ...] = FEATURE_NAMES + (PRICE_COLUMN,)
PROPERTY_HEADER: Tuple[str, ...] = FEATURE_NAMES[:8] + (PRICE_COLUMN,)

_BY_NAME: Dict[str, FeatureId] = {f.name: f for f in FEATURES}

ELEVATOR = 1
ROOM_COUNTS = range(2, 6)
AMENITY_COUNTS = range(8, 20, 2)
AMENITY_DISTANCES = range(9, 20, 2)
EMOTION_PERCENTAGES = range(21, 26)
MAX_AMENITY_DISTANCE = 1000.0


def feature_by_name(name: str) -> FeatureId:
    try:
        return _BY_NAME[name]
    except KeyError:
        raise KeyError(f"未知特征名: {name}") from None


def resolve_feature(key: Union[int, str, FeatureId]) -> FeatureId:
    """接受序号、名称或 FeatureId，统一返回 FeatureId"""
    if isinstance(key, FeatureId):
        return key
    if isinstance(key, str):
        return feature_by_name(key)
    if 0 <= int(key) < FEATURE_COUNT:
        return FEATURES[int(key)]
    raise KeyError(f"特征序号越界: {key}")


def category_indices(category: Category) -> List[int]:
    return [f.index for f in FEATURES if f.category is category]


def check_values(features: Sequence[float], price: float) -> List[Tuple[str, str]]:
    """
    检查一行取值是否满足记录约束

    :param features: 26 个自变量
    :param price: 每平方米价格
    :return: (字段名, 原因) 列表，空列表表示合法
    """
    problems: List[Tuple[str, str]] = []
    if len(features) != FEATURE_COUNT:
        problems.append(("features", f"需要 {FEATURE_COUNT} 个特征，实际 {len(features)}"))
        return problems

    for f, value in zip(FEATURES, features):
        if not math.isfinite(value):
            problems.append((f.name, f"非有限数值 {value}"))
    if not math.isfinite(price) or price <= 0:
        problems.append((PRICE_COLUMN, f"价格必须为正数，实际 {price}"))
    if problems:
        return problems

    if features[ELEVATOR] not in (0.0, 1.0):
        problems.append(("Elvt", f"只能取 0 或 1，实际 {features[ELEVATOR]}"))
    for i in ROOM_COUNTS:
        value = features[i]
        if value < 0 or value != math.floor(value):
            problems.append((FEATURES[i].name, f"房间数必须为非负整数，实际 {value}"))
    for i in AMENITY_COUNTS:
        if features[i] < 0:
            problems.append((FEATURES[i].name, f"设施数量不能为负，实际 {features[i]}"))
    for i in AMENITY_DISTANCES:
        if not 0.0 <= features[i] <= MAX_AMENITY_DISTANCE:
            problems.append((FEATURES[i].name, f"平均距离须在 [0, 1000] 米内，实际 {features[i]}"))
    for i in EMOTION_PERCENTAGES:
        if not 0.0 <= features[i] <= 100.0:
            problems.append((FEATURES[i].name, f"情绪占比须在 [0, 100] 内，实际 {features[i]}"))
    return problems


@attr.s(frozen=True, slots=True)
class PropertyRecord:
    """一笔房产交易：26 个自变量 + 每平方米价格 (人民币)"""
    features: Tuple[float, ...] = attr.ib(converter=lambda values: tuple(float(v) for v in values))
    price: float = attr.ib(converter=float)

    def __str__(self) -> str:
        """按类别分组的可读输出"""
        lines = [f"<PropertyRecord Price={self.price:g}>"]
        for category in Category:
            items = [f"{FEATURES[i].name}={self.features[i]:g}" for i in category_indices(category)]
            lines.append(f"  {category.value}: " + ", ".join(items))
        return '\n'.join(lines)

    def violations(self) -> List[Tuple[str, str]]:
        return check_values(self.features, self.price)

    def feature(self, key: Union[int, str, FeatureId]) -> float:
        """按序号、名称或 FeatureId 取特征值"""
        return self.features[resolve_feature(key).index]

    def to_dict(self) -> Dict[str, float]:
        result = {name: value for name, value in zip(FEATURE_NAMES, self.features)}
        result[PRICE_COLUMN] = self.price
        return result

    @classmethod
    def from_row(cls, values: Sequence[float]) -> 'PropertyRecord':
        """
        从 27 个数值 (26 特征 + Price) 创建实例

        参数:
            values: 按表头顺序排列的一行数值
        """
        if len(values) != len(HEADER):
            raise ValueError(f"一行需要 {len(HEADER)} 个数值，实际 {len(values)}")
        return cls(features=values[:FEATURE_COUNT], price=values[FEATURE_COUNT])
