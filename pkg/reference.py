"""
已发表结果的参考数值，用于和本地复现结果逐格比较
"""
from typing import Dict, List, Tuple

TRAINING = "Training set"
TESTING = "Testing set"
METRIC_COLUMNS = ("R2", "AdjR2", "MAE", "MSE", "RMSE")

# (数据集, 方法) -> (R2, AdjR2, MAE, MSE, RMSE)
TABLE3: Dict[Tuple[str, str], Tuple[float, float, float, float, float]] = {
    (TRAINING, "Linear regression w/ only P"): (0.1674, 0.1671, 18284, 551713399, 23489),
    (TRAINING, "Linear regression w/o A"): (0.2520, 0.2515, 16947, 495668829, 22264),
    (TRAINING, "Linear regression w/o T"): (0.3730, 0.3722, 15499, 415469247, 20383),
    (TRAINING, "Linear regression w/o S"): (0.3636, 0.3629, 15582, 421702012, 20535),
    (TRAINING, "Linear regression w/ PATS"): (0.3797, 0.3789, 15391, 411032381, 20274),
    (TRAINING, "XGBoost regression w/ only P"): (0.9095, 0.9095, 5206, 59965069, 7744),
    (TRAINING, "XGBoost regression w/o A"): (0.9184, 0.9183, 4941, 54069367, 7353),
    (TRAINING, "XGBoost regression w/o T"): (0.9331, 0.9330, 4416, 44350499, 6660),
    (TRAINING, "XGBoost regression w/o S"): (0.9319, 0.9318, 4477, 45145802, 6719),
    (TRAINING, "XGBoost regression w/ PATS"): (0.9343, 0.9342, 4387, 43549356, 6599),
    (TESTING, "Linear regression w/ only P"): (0.1626, 0.1618, 17905, 530648157, 23036),
    (TESTING, "Linear regression w/o A"): (0.2437, 0.2424, 16696, 479250332, 21892),
    (TESTING, "Linear regression w/o T"): (0.3591, 0.3572, 15324, 406118449, 20152),
    (TESTING, "Linear regression w/o S"): (0.3510, 0.3494, 15358, 411213070, 20278),
    (TESTING, "Linear regression w/ PATS"): (0.3651, 0.3632, 15235, 402302484, 20057),
    (TESTING, "XGBoost regression w/ only P"): (0.8560, 0.8558, 6244, 91267181, 9553),
    (TESTING, "XGBoost regression w/o A"): (0.8646, 0.8644, 6080, 85802314, 9263),
    (TESTING, "XGBoost regression w/o T"): (0.8751, 0.8747, 5773, 79153827, 8897),
    (TESTING, "XGBoost regression w/o S"): (0.8740, 0.8737, 5814, 79830419, 8935),
    (TESTING, "XGBoost regression w/ PATS"): (0.8770, 0.8766, 5721, 77956264, 8829),
}

LINEAR_INTERCEPT = 548013.5557669624
LINEAR_INTERCEPT_TOLERANCE = 0.01

LINEAR_COEFFICIENTS: Dict[str, float] = {
    "Year": -225.754, "Elvt": 8321.2, "RmNum": -2341.1, "HllNum": -1195.1,
    "KchNum": 16563.6, "BthNum": 4251.97, "Lat": 10408, "Lng": -4548.27,
    "TspNum": 28.063, "TspDst": 25.2256, "AtrNum": 307.328, "AtrDst": 3.91726,
    "EdcNum": 316.915, "EdcDst": -10.4586, "HthNum": 150.618, "HthDst": 6.581,
    "RstNum": 109.195, "RstDst": 15.6027, "RtlNum": -236.629, "RtlDst": 4.77269,
    "TrfV": 157.894, "AgrPct": 194.2, "DstPct": 860.433, "HppPct": 33.1033,
    "SadPct": 35.2334, "FeaPct": 212.4,
}

# 特征重要性的序数事实：首位与末位
TOP_FEATURE = "Year"
BOTTOM_FEATURE = "KchNum"
TOP_THREE_INCLUDES = ("Lat", "Lng")

# 相关分析中提到的几组系数 (一位小数)
CORRELATIONS: Dict[Tuple[str, str], float] = {
    ("RmNum", "BthNum"): 0.6,
    ("EdcNum", "HthNum"): 0.7,
    ("EdcNum", "RstNum"): 0.8,
    ("RstNum", "RtlNum"): 0.7,
}


def compare_table3(rows: List[Dict[str, object]]) -> List[Dict[str, object]]:
    """
    把 table3 的行与参考值逐指标对比

    :param rows: 含 Data / Method 及五个指标列的字典
    :return: (Data, Method, Metric, Published, Reproduced, Delta) 行
    """
    compared = []
    for row in rows:
        published = TABLE3.get((row["Data"], row["Method"]))
        if published is None:
            continue
        for metric, expected in zip(METRIC_COLUMNS, published):
            value = row.get(metric)
            delta = None if value is None else float(value) - expected
            compared.append({
                "Data": row["Data"],
                "Method": row["Method"],
                "Metric": metric,
                "Published": expected,
                "Reproduced": value,
                "Delta": delta,
            })
    return compared
