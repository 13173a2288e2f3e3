import csv
import json
import math

import numpy as np
import pytest

from envyfree import harness
from envyfree.core import write_table_csv


def cfg(**kw):
    return harness.ExperimentConfig(**kw)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_example1_row(tmp_path):
    m = harness.run(cfg(experiment="example1", params={"gammas": [4]}), out=tmp_path)
    rows = read_rows(tmp_path / "results.csv")
    assert rows[0][:4] == ["gamma", "randomized_loss", "deterministic_loss", "ratio"]
    g, rnd, det, ratio = map(float, rows[1][:4])
    assert (g, det) == (4.0, 1.0)
    assert rnd == pytest.approx(0.25, abs=1e-9) and ratio == pytest.approx(4.0, abs=1e-6)
    assert m.config_digest == json.loads((tmp_path / "manifest.json").read_text())["config_digest"]


def test_lowerbound_smallest_world(tmp_path):
    m = harness.run(cfg(experiment="lowerbound", params={"q": 1, "seeds": 2}), out=tmp_path)
    assert m.summary["m"] == 4
    assert len(m.rows) == 2
    assert (tmp_path / "alpha_vs_seed.svg").exists()


def test_unknown_experiment_rejected():
    with pytest.raises(harness.ConfigError):
        cfg(experiment="bogus")


@pytest.mark.parametrize("field,value", [("delta", 0.0), ("gamma", 1.0), ("sizes", [10, 10]),
                                         ("sizes", [20, 10]), ("seed", -1), ("workers", 0)])
def test_invalid_fields(field, value):
    with pytest.raises(harness.ConfigError):
        cfg(experiment="mixture-gen", **{field: value})


def test_unknown_keys_rejected():
    with pytest.raises(harness.ConfigError):
        harness.ExperimentConfig.from_dict({"experiment": "example1", "colour": "red"})
    with pytest.raises(harness.ConfigError):
        cfg(experiment="example1", params={"q": 3})


def test_digest_ignores_key_order_and_output_location(tmp_path):
    a = harness.ExperimentConfig.from_dict({"experiment": "natarajan", "seed": 3, "gamma": 0.2})
    b = harness.ExperimentConfig.from_dict({"gamma": 0.2, "seed": 3, "experiment": "natarajan",
                                            "out": str(tmp_path), "workers": 4})
    assert a.digest() == b.digest()
    assert a.digest() != harness.ExperimentConfig.from_dict({"experiment": "natarajan", "seed": 4}).digest()


def test_config_from_json(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"experiment": "example1", "params": {"gammas": [2]}}))
    assert harness.ExperimentConfig.from_json(path).params["gammas"] == [2]
    path.write_text("{not json")
    with pytest.raises(harness.ConfigError):
        harness.ExperimentConfig.from_json(path)


def test_erm_experiment_from_csv(tmp_path):
    write_table_csv(tmp_path / "u.csv", [0, 1], [[0.0, 1.0, 0.25], [0.0, 0.0, 1.0]])
    write_table_csv(tmp_path / "l.csv", [0, 1], [[0.0, 1.0, 1.0], [1.0, 1.0, 0.0]])
    c = cfg(experiment="erm", utility=str(tmp_path / "u.csv"), loss=str(tmp_path / "l.csv"))
    m = harness.run(c, out=tmp_path / "out")
    rows = read_rows(tmp_path / "out" / "results.csv")
    assert rows[0] == ["method", "id", "y0", "y1", "y2"]
    rnd = [list(map(float, r[2:])) for r in rows[1:] if r[0] == "randomized"]
    assert np.allclose(rnd, [[0.75, 0.25, 0.0], [0.0, 0.0, 1.0]], atol=1e-9)
    assert m.summary["deterministic"]["total_loss"] == 1.0


def test_erm_mismatched_tables(tmp_path):
    write_table_csv(tmp_path / "u.csv", [0, 1], [[0.5, 0.5], [0.5, 0.5]])
    write_table_csv(tmp_path / "l.csv", [0, 2], [[0.5, 0.5], [0.5, 0.5]])
    c = cfg(experiment="erm", utility=str(tmp_path / "u.csv"), loss=str(tmp_path / "l.csv"))
    with pytest.raises(harness.DataError):
        harness.run(c, out=tmp_path / "out")


def test_erm_budget_skips_deterministic(tmp_path):
    ids = list(range(12))
    table = np.random.default_rng(0).random((12, 3))
    write_table_csv(tmp_path / "u.csv", ids, table)
    write_table_csv(tmp_path / "l.csv", ids, table)
    c = cfg(experiment="erm", utility=str(tmp_path / "u.csv"), loss=str(tmp_path / "l.csv"),
            params={"budget": 100})
    m = harness.run(c, out=tmp_path / "out")
    assert m.summary["deterministic"]["status"] == "skipped"


def test_empty_result_set_gives_header_only(tmp_path):
    manifest = harness.RunManifest("natarajan", "x", 0, ["a", "b"], [])
    harness.emit_report(manifest, tmp_path)
    assert (tmp_path / "results.csv").read_text() == '"a","b"\n'


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(harness.DataError):
        harness.run(cfg(experiment="example1"), out=blocker / "sub")


def test_strings_are_quoted_numbers_are_not(tmp_path):
    manifest = harness.RunManifest("erm", "x", 0, ["method", "v"], [["randomized", 0.5]])
    harness.emit_report(manifest, tmp_path)
    assert (tmp_path / "results.csv").read_text().splitlines()[1] == '"randomized",0.5'


def test_sweep_identical_components_have_no_envy():
    pool_cfg = cfg(experiment="mixture-gen", sizes=[20, 40], params={"trials": 1, "holdout": 2000,
                                                                       "pool_size": 1, "m": 3})
    rows = harness.generalization_sweep(pool_cfg)
    # every component is the same rule; a rule that is EF on the training
    # pairs or the favorite fallback -- either way train envy is zero
    assert all(r[2] == 0.0 for r in rows)


def test_sweep_constant_pool_never_envied(tmp_path):
    pool = {"feature_map": "onehot", "k": 3, "q": 2, "weights": [[0, 0, 1, 0, 0, 0, 0, 0, 0]]}
    path = tmp_path / "pool.json"
    path.write_text(json.dumps(pool))
    c = cfg(experiment="mixture-gen", sizes=[20, 40], pool=str(path),
            params={"trials": 2, "holdout": 2000})
    rows = harness.generalization_sweep(c)
    assert all(r[2] == 0.0 and r[3] == 0.0 for r in rows)


def test_bad_pool_file(tmp_path):
    path = tmp_path / "pool.json"
    path.write_text(json.dumps({"k": 3, "q": 2, "weights": [[1, 2]]}))
    with pytest.raises(harness.DataError):
        harness.load_pool(path)


def test_sweep_independent_of_workers(tmp_path):
    base = dict(experiment="mixture-gen", sizes=[30, 60], params={"trials": 3, "holdout": 3000})
    harness.run(cfg(**base, workers=1), out=tmp_path / "a")
    harness.run(cfg(**base, workers=3), out=tmp_path / "b")
    assert (tmp_path / "a" / "results.csv").read_bytes() == (tmp_path / "b" / "results.csv").read_bytes()


def test_finite_class_sample_size():
    assert harness.finite_class_sample_size(20, 0.1, 0.05) == 300


def test_sample_size_helper_frozen_values():
    # computed independently with mpmath at 50 digits
    assert harness.sample_size_helper(3, 2, 3, 0.1, 0.05) == (51830, 630)
    assert harness.sample_size_helper(3, 2, 3, 0.1, 0.05, tail="delta") == (51900, 630)


@pytest.mark.parametrize("gamma", [0.2, 0.1, 0.05])
def test_sample_size_quadratic_in_gamma(gamma):
    a = harness._mixture_size(3, 2, 3, gamma, 0.05)
    b = harness._mixture_size(3, 2, 3, gamma / 2, 0.05)
    assert b >= 4 * a
    assert harness._single_size(3, 3, gamma / 2, 0.05) == pytest.approx(4 * harness._single_size(3, 3, gamma, 0.05))


def test_sample_size_single_component():
    mix, single = harness.sample_size_helper(3, 1, 3, 0.1, 0.05)
    assert mix < harness.sample_size_helper(3, 2, 3, 0.1, 0.05)[0]
    assert single == math.ceil((3 * math.log(3) + math.log(20)) / 0.01)


def test_sample_size_rejects_nonpositive():
    with pytest.raises(Exception):
        harness.sample_size_helper(0, 2, 3, 0.1, 0.05)


def test_natarajan_experiment_rows(tmp_path):
    m = harness.run(cfg(experiment="natarajan", params={"families": 4, "max_domain": 5}), out=tmp_path)
    assert all(r[6] == 1 and r[8] == 1 for r in m.rows)


def test_extension_check_rows(tmp_path):
    m = harness.run(cfg(experiment="extension-check", params={"trials": 2, "n": 10, "holdout": 500}),
                    out=tmp_path)
    assert all(r[-1] == 1 for r in m.rows)
