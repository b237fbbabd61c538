import csv
import io
import json
import math
import warnings

import numpy as np
import pytest

from maxlag2d.bench import (CompatibilityWarning, ConfigError, ExperimentConfig, Perturbation,
                            PipelineError, convergence_rates, least_squares_slope,
                            reference_spectrum, run_convergence, run_spectrum)

PI2 = math.pi ** 2


def brute_reference(count, r=40):
    return sorted(PI2 * (a * a + b * b) for a in range(r) for b in range(r) if a + b)[:count]


def test_reference_unit_square():
    ref = reference_spectrum("unit-square", 10)
    np.testing.assert_allclose(ref.values, PI2 * np.array([1, 1, 2, 4, 4, 5, 5, 8, 9, 9]))
    assert ref.values[0] == pytest.approx(9.8696044010893586, abs=1e-15)
    np.testing.assert_allclose(reference_spectrum("unit-square", 300).values, brute_reference(300))
    assert np.all(np.diff(ref.values) >= 0) and ref.values.min() > 0


def test_reference_lshape():
    ref = reference_spectrum("L-shape", 4)
    assert ref.at(0) == 0.149511749824251
    assert ref.at(1) is None and ref.requested == 4
    with pytest.raises(ValueError):
        reference_spectrum("unit-square", 0)
    with pytest.raises(ValueError):
        reference_spectrum("disk", 1)


def cc6(**kw):
    return ExperimentConfig(family="criss-cross", split="none", degree=4, levels=[6], nev=10, **kw)


def test_crisscross_spectrum():
    t = run_spectrum(cc6())
    e = t.errors
    assert e[0] < 1e-9 and e[0] == pytest.approx(2.2e-10, rel=0.05)
    assert e[9] == pytest.approx(1.26e-5, rel=0.01)


def test_perturbed_crisscross_spectra():
    bad = run_spectrum(cc6(perturbation=Perturbation("singular-vertices", 0.01, 0)))
    assert 1 < bad.eigenvalues[0] < 2
    assert bad.errors.max() > 1
    good = run_spectrum(cc6(perturbation=Perturbation("singular-vertices", 0.1, 0)))
    assert good.errors[0] <= 1e-8
    assert good.errors[9] <= 2e-5


def test_csv_self_consistent_and_deterministic(tmp_path):
    cfg = ExperimentConfig(split="ps", degree=1, levels=[4], nev=6, csv_path=str(tmp_path / "a.csv"),
                           json_path=str(tmp_path / "a.json"))
    run_spectrum(cfg)
    first = (tmp_path / "a.csv").read_bytes()
    run_spectrum(cfg)
    assert (tmp_path / "a.csv").read_bytes() == first
    rows = list(csv.DictReader(io.StringIO(first.decode())))
    assert list(rows[0]) == ["index", "lambda", "error_vs_reference", "residual"]
    ref = reference_spectrum("unit-square", 6).values
    for r in rows:
        assert float(r["error_vs_reference"]) == abs(ref[int(r["index"]) - 1] - float(r["lambda"]))
    data = json.loads((tmp_path / "a.json").read_text())
    assert len(data["rows"]) == 6 and data["n_dofs"] > 0


def test_lshape_higher_modes_blank():
    t = run_spectrum(ExperimentConfig(domain="L-shape", levels=[8], nev=3))
    rows = list(csv.DictReader(io.StringIO(t.to_csv())))
    assert rows[0]["error_vs_reference"] != ""
    assert rows[1]["error_vs_reference"] == "" and rows[2]["error_vs_reference"] == ""


def test_convergence_rates_helpers():
    assert convergence_rates([0.5, 0.25], [4.0, 1.0]) == [pytest.approx(2.0)]
    assert convergence_rates([0.5, 0.25], [1.0, 0.0]) == [math.inf]
    assert least_squares_slope([0.5, 0.25, 0.125, 0.0625], [4.0, 1.0, 0.0, 1 / 16]) == \
        pytest.approx(2.0)
    assert math.isnan(least_squares_slope([1, 0.5], [1.0, 0.0]))


def test_convergence_table(tmp_path):
    cfg = ExperimentConfig(split="ps", degree=1, levels=[2, 4, 8], nev=1,
                           csv_path=str(tmp_path / "c.csv"))
    t = run_convergence(cfg)
    assert t.rows[0]["rate"] is None
    assert all(1.5 < r < 2.5 for r in t.rates)
    assert 1.5 < t.slope < 2.5
    rows = list(csv.DictReader(io.StringIO((tmp_path / "c.csv").read_text())))
    assert [int(r["n"]) for r in rows] == [2, 4, 8]
    for r in rows:
        assert float(r["error"]) == abs(PI2 - float(r["lambda"]))


def test_convergence_infinite_rate_in_csv():
    from maxlag2d.bench import ConvergenceTable
    t = ConvergenceTable([{"n": 1, "h": 1.0, "n_dofs": 1, "lambda": 1.0, "error": 1.0, "rate": None},
                          {"n": 2, "h": 0.5, "n_dofs": 1, "lambda": 1.0, "error": 0.0,
                           "rate": math.inf}], math.nan, 1)
    assert t.to_csv().splitlines()[2].endswith(",∞")


@pytest.mark.parametrize("bad", [dict(domain="disk"), dict(family="delaunay"), dict(split="wf"),
                                 dict(degree=0), dict(levels=[]), dict(levels=[2.5]),
                                 dict(nev=0), dict(zero_tol=0), dict(jitter=0.3),
                                 dict(target=5, nev=2), dict(family="imported"),
                                 dict(perturbation={"selector": "all", "alpha": 0.1})])
def test_config_errors(bad):
    with pytest.raises(ConfigError):
        ExperimentConfig(**bad)


def test_convergence_config_errors():
    with pytest.raises(ConfigError, match="three levels"):
        run_convergence(ExperimentConfig(levels=[2, 4]))
    with pytest.raises(ConfigError, match="decreasing"):
        run_convergence(ExperimentConfig(levels=[4, 2, 8]))
    with pytest.raises(ConfigError, match="no reference"):
        run_convergence(ExperimentConfig(domain="L-shape", levels=[2, 4, 8], nev=2, target=2))


def test_compatibility_warnings():
    with pytest.warns(CompatibilityWarning, match="spurious"):
        ExperimentConfig(split="none", degree=3)
    with pytest.warns(CompatibilityWarning):
        ExperimentConfig(split="ct", degree=1)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        ExperimentConfig(split="ps", degree=1)
        ExperimentConfig(split="ct", degree=2)
        ExperimentConfig(split="none", degree=4)


def test_json_config(tmp_path):
    f = tmp_path / "cfg.json"
    f.write_text(json.dumps({"split": "ct", "degree": 2, "levels": [4],
                             "perturbation": {"selector": "singular-vertices", "alpha": 0.1}}))
    cfg = ExperimentConfig.from_json(f)
    assert cfg.perturbation.alpha == 0.1 and cfg.levels == [4]
    f.write_text(json.dumps({"splitt": "ct"}))
    with pytest.raises(ConfigError, match="unknown config keys"):
        ExperimentConfig.from_json(f)
    f.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json(f)


def test_stage_named_on_failure(tmp_path):
    cfg = ExperimentConfig(family="imported", mesh_path=str(tmp_path / "missing.tri"), split="ps")
    with pytest.raises(PipelineError) as info:
        run_spectrum(cfg)
    assert info.value.stage == "mesh"


def test_default_shift():
    assert ExperimentConfig().resolved_shift() == pytest.approx(PI2 / 2)
    assert ExperimentConfig(domain="L-shape", levels=[4]).resolved_shift() == \
        pytest.approx(0.149511749824251 / 2)
