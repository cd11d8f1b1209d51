from __future__ import annotations

import csv
import io
import json
import math
import subprocess
import sys

import pytest

from boundary_lab.errors import DegenerateFit
from boundary_lab.lab import CRITERIA, VERDICTS, ExperimentConfig, criterion_for, fit_linear, fit_rate, list_criteria, run
from boundary_lab.lab.cli import main
from boundary_lab.lab.experiments import ConfigError

ALL_VERDICTS = {
    "gmv_exact", "cocycle_exact", "change_of_var_exact", "xi_regimes", "lp_isometry", "duality",
    "growth_band", "llogl_lower", "logsob_heldout", "logsob_const_stable", "theta_linear",
    "energy_values", "mixing_decay", "weakmix_l1", "embedding_decay", "Nn_diverges",
    "regularity_lemmas", "orlicz_basics", "lr_exponential",
}


class TestFitting:
    def test_line(self):
        slope, intercept, resid = fit_linear([(x, 2 * x + 1) for x in range(5)])
        assert slope == pytest.approx(2) and intercept == pytest.approx(1) and resid < 1e-12

    def test_rate(self):
        rate, resid = fit_rate([(x, 3 ** (x / 2)) for x in range(1, 8)])
        assert rate == pytest.approx(math.log(3) / 2) and resid < 1e-10

    def test_constant(self):
        assert fit_linear([(x, 5.0) for x in range(4)])[0] == pytest.approx(0, abs=1e-12)

    def test_degenerate(self):
        with pytest.raises(DegenerateFit):
            fit_linear([(1, 2), (1, 3), (1, 4)])
        with pytest.raises(DegenerateFit):
            fit_linear([(1, 2), (2, 3)])
        with pytest.raises(DegenerateFit):
            fit_rate([(1, 1), (2, 0), (3, 1)])


class TestRegistry:
    def test_twelve_criteria_cover_every_verdict(self):
        assert [c.number for c in CRITERIA] == list(range(1, 13))
        assert set(VERDICTS) == ALL_VERDICTS
        assert criterion_for("duality").number == 3
        with pytest.raises(KeyError):
            criterion_for("nope")

    def test_listing(self):
        lines = list_criteria()
        assert len(lines) == 12 and "lr_exponential" in lines[-1]


class TestConfig:
    @pytest.mark.parametrize(
        "kw",
        [dict(experiment="nope"), dict(k=1), dict(p=0.5), dict(backend="sphere"), dict(depth=9),
         dict(experiment="logsob", samples=50), dict(p=2, s=0.9), dict(experiment="verify", backend="circle")],
    )
    def test_rejected(self, kw):
        with pytest.raises(ConfigError):
            ExperimentConfig(**kw).validate()


class TestCli:
    def test_list_criteria(self, capsys):
        assert main(["--list-criteria"]) == 0
        assert "gmv_exact" in capsys.readouterr().out

    def test_usage_errors(self, capsys):
        assert main([]) == 2
        assert main(["bogus"]) == 2
        assert main(["xi", "--p", "0.5"]) == 2
        assert main(["xi", "--k", "x"]) == 2

    def test_verify_passes(self, capsys):
        assert main(["verify"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert set(report) == {"config", "rows", "fitted", "verdicts", "timestamp"}
        assert all(report["verdicts"].values())
        assert set(report["verdicts"]) <= ALL_VERDICTS

    def test_corrupted_derivative_fails(self, capsys):
        assert main(["verify", "--corrupt-derivative"]) == 1
        verdicts = json.loads(capsys.readouterr().out)["verdicts"]
        assert not verdicts["gmv_exact"] and not verdicts["cocycle_exact"]

    def test_config_file_and_override(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"gmax": 6, "k": 3}))
        out = tmp_path / "r.json"
        assert main(["mixing", "--config", str(cfg), "--k", "2", "--out", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["config"]["gmax"] == 6 and report["config"]["k"] == 2
        assert max(r["n"] for r in report["rows"]) == 6

    def test_config_unknown_field(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"colour": "red"}))
        assert main(["xi", "--config", str(cfg)]) == 2

    def test_csv(self, capsys):
        assert main(["multipliers", "--format", "csv", "--gmax", "4"]) == 0
        rows = list(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert rows and "theta_sup" in rows[-1]

    def test_deterministic(self, capsys):
        outs = []
        for _ in range(2):
            assert main(["regularity", "--samples", "20", "--seed", "3"]) == 0
            report = json.loads(capsys.readouterr().out)
            report.pop("timestamp")
            outs.append(json.dumps(report, sort_keys=True))
        assert outs[0] == outs[1]

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "boundary_lab", "--list-criteria"], capture_output=True, text=True)
        assert proc.returncode == 0 and "theta_linear" in proc.stdout


@pytest.mark.parametrize("experiment", ["xi", "mixing", "multipliers", "embedding"])
def test_experiments_pass_on_f3(experiment):
    report = run(ExperimentConfig(experiment=experiment, k=3, gmax=8 if experiment != "embedding" else None,
                                  depth=4 if experiment == "embedding" else None))
    assert report.passed, report.verdicts


def test_growth_single_setting():
    report = run(ExperimentConfig(experiment="growth", p=1, t=0.0, gmax=10))
    assert report.passed
    assert report.fitted["growth_band[p=1,t=0.0]"] < 4


def test_logsob_heldout_three_seeds():
    for seed in (0, 1, 2):
        report = run(ExperimentConfig(experiment="logsob", seed=seed, samples=200, depth=3))
        assert report.verdicts["logsob_heldout"]
