"""大规模的端到端检查：合成数据上的消融排序、公开数据集上的复现、整套输出的可重复性"""
import pytest

import reference
from dataset import SplitSpec, write_csv
from experiment import ModelKind, cli, run_ablation
from gbt import BoostParams
from synth import synthetic_dataset


def _test_r2(results):
    return {(r.model_kind, r.config.name): r.test_metrics.r2 for r in results}


@pytest.mark.slow
def test_amenity_block_matters_most_on_synthetic_data(logger):
    results = run_ablation(synthetic_dataset(5000, seed=7), SplitSpec(0.7, 42), BoostParams(), logger=logger)
    r2 = _test_r2(results)
    for kind in ModelKind:
        assert r2[(kind, "w/ PATS")] > r2[(kind, "w/ only P")]
        drops = {name: r2[(kind, "w/ PATS")] - r2[(kind, name)] for name in ("w/o A", "w/o T", "w/o S")}
        assert max(drops, key=drops.get) == "w/o A"


@pytest.mark.slow
def test_two_ablate_runs_are_byte_identical(tmp_path):
    data = write_csv(synthetic_dataset(1000, seed=8), tmp_path / "h.csv")
    outputs = []
    for name in ("first", "second"):
        out = tmp_path / name
        assert cli(["ablate", "--data", str(data), "--seed", "42", "--out", str(out), "--trees", "30"]) == 0
        outputs.append(out)
    files = sorted(p.name for p in outputs[0].iterdir())
    assert "table3.csv" in files and sum(name.endswith(".svg") for name in files) == 6
    for name in files:
        assert (outputs[0] / name).read_bytes() == (outputs[1] / name).read_bytes(), name


@pytest.mark.slow
@pytest.mark.public_data
def test_published_table_is_reproduced(public_dataset, logger):
    results = run_ablation(public_dataset, SplitSpec(0.7, 42), BoostParams(), jobs=2, logger=logger)
    assert all(r.ok for r in results)
    r2 = _test_r2(results)
    published = {method: values[0] for (data, method), values in reference.TABLE3.items()
                 if data == reference.TESTING}

    assert r2[(ModelKind.BOOSTED, "w/ PATS")] == pytest.approx(
        published["XGBoost regression w/ PATS"], abs=0.05)
    assert r2[(ModelKind.LINEAR, "w/ PATS")] == pytest.approx(
        published["Linear regression w/ PATS"], abs=0.03)
    assert max(r2, key=r2.get) == (ModelKind.BOOSTED, "w/ PATS")
    for kind in ModelKind:
        cells = {name: value for (k, name), value in r2.items() if k is kind}
        assert max(cells, key=cells.get) == "w/ PATS"
        assert min(cells, key=cells.get) == "w/ only P"
