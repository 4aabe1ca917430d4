"""Command-line behavior: exit codes, printed output, artifact files."""

from __future__ import annotations

import json

import pytest

from calerr import sample_overconfident_logits, softmax
from calerr.cli import main
from calerr.io import write_prediction_file


@pytest.fixture
def probs_csv(tmp_path):
    p = softmax(sample_overconfident_logits(60, 3, 0))
    path = tmp_path / "probs.csv"
    write_prediction_file(path, p)
    return str(path)


@pytest.fixture
def logits_csv(tmp_path):
    lg = sample_overconfident_logits(80, 3, 1)
    path = tmp_path / "logits.csv"
    write_prediction_file(path, lg)
    return str(path)


class TestExitCodes:
    def test_missing_subcommand_is_usage_error(self):
        assert main([]) == 2

    def test_unknown_flag_is_usage_error(self, probs_csv):
        assert main(["measure", probs_csv, "--frobnicate"]) == 2

    def test_missing_file_is_data_error(self, capsys):
        assert main(["measure", "/nonexistent/preds.csv"]) == 1
        assert "error:" in capsys.readouterr().err

    def test_malformed_file_is_data_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("0.5,oops,0\n")
        assert main(["measure", str(bad)]) == 1

    def test_scaling_method_without_logits_is_usage_error(
        self, probs_csv, tmp_path, capsys
    ):
        code = main([
            "recalibrate", probs_csv, "--method", "temperature",
            "--output-prefix", str(tmp_path / "out"),
        ])
        assert code == 2
        assert "requires logits" in capsys.readouterr().err

    def test_success_is_zero(self, probs_csv):
        assert main(["measure", probs_csv]) == 0


class TestMeasure:
    def test_prints_metric_and_score(self, probs_csv, capsys):
        assert main(["measure", probs_csv, "--named", "ECE"]) == 0
        out = capsys.readouterr().out
        assert "metric: index=4 ('even', True, False, 0.0, 'l1') bins=15" in out
        assert "score: " in out

    def test_axis_flags_override_default(self, probs_csv, capsys):
        assert main([
            "measure", probs_csv, "--binning", "adaptive", "--no-max-probs",
            "--norm", "l2", "--bins", "10",
        ]) == 0
        out = capsys.readouterr().out
        assert "('adaptive', False, False, 0.0, 'l2') bins=10" in out

    def test_off_grid_threshold_prints_without_index(self, probs_csv, capsys):
        assert main([
            "measure", probs_csv, "--no-max-probs", "--threshold", "0.2",
        ]) == 0
        out = capsys.readouterr().out
        assert "metric: ('even'" in out

    def test_all_32_prints_every_variant(self, probs_csv, capsys):
        assert main(["measure", probs_csv, "--all-32", "--bins", "5"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 32
        assert lines[0].startswith("0,even,True,True,")

    def test_json_report(self, probs_csv, tmp_path):
        out = tmp_path / "report.json"
        assert main([
            "measure", probs_csv, "--named", "SCE", "--output", str(out),
        ]) == 0
        doc = json.loads(out.read_text())
        assert doc["config"]["binning"] == "even"
        assert doc["config"]["class_conditional"] is True
        assert "score" in doc and "bin_stats" in doc

    def test_csv_report(self, probs_csv, tmp_path):
        out = tmp_path / "report.csv"
        assert main(["measure", probs_csv, "--output", str(out)]) == 0
        header = out.read_text().splitlines()[0]
        assert header == "class_index,lower,upper,count,accuracy,confidence"

    def test_config_file_with_flag_override(self, probs_csv, tmp_path, capsys):
        cfg = tmp_path / "run.json"
        cfg.write_text('{"binning": "adaptive", "bins": 20}')
        assert main([
            "measure", probs_csv, "--config", str(cfg), "--bins", "10",
        ]) == 0
        out = capsys.readouterr().out
        assert "('adaptive', True, False, 0.0, 'l1') bins=10" in out

    def test_bad_config_key_is_data_error(self, probs_csv, tmp_path):
        cfg = tmp_path / "run.json"
        cfg.write_text('{"bin_count": 10}')
        assert main(["measure", probs_csv, "--config", str(cfg)]) == 1

    def test_logits_flag_applies_softmax(self, logits_csv, capsys):
        assert main(["measure", logits_csv, "--logits"]) == 0
        assert "score: " in capsys.readouterr().out


class TestRecalibrate:
    def expect_artifacts(self, prefix):
        for suffix in (".recalibrated.csv", ".model.json", ".report.json"):
            assert (prefix.parent / (prefix.name + suffix)).exists()

    @pytest.mark.parametrize(
        "method", ["histogram", "cc-histogram", "isotonic"]
    )
    def test_probability_methods(self, probs_csv, tmp_path, method, capsys):
        prefix = tmp_path / method
        assert main([
            "recalibrate", probs_csv, "--method", method,
            "--histogram-bins", "5", "--output-prefix", str(prefix),
        ]) == 0
        out = capsys.readouterr().out
        assert "before: " in out and "after: " in out
        self.expect_artifacts(prefix)

    def test_bootstrap_histogram(self, probs_csv, tmp_path):
        prefix = tmp_path / "boot"
        assert main([
            "recalibrate", probs_csv, "--method", "bootstrap-histogram",
            "--histogram-bins", "5", "--bootstrap", "10",
            "--output-prefix", str(prefix),
        ]) == 0
        doc = json.loads((tmp_path / "boot.model.json").read_text())
        assert doc["method"] == "histogram-binning"

    def test_temperature_prints_fit(self, logits_csv, tmp_path, capsys):
        prefix = tmp_path / "temp"
        assert main([
            "recalibrate", logits_csv, "--logits", "--method", "temperature",
            "--output-prefix", str(prefix),
        ]) == 0
        out = capsys.readouterr().out
        assert "temperature: " in out and "converged: " in out
        doc = json.loads((tmp_path / "temp.model.json").read_text())
        assert doc["method"] == "temperature"
        report = json.loads((tmp_path / "temp.report.json").read_text())
        assert report["metric"]["index"] == 4
        assert report["fit_points"] == 40 and report["eval_points"] == 40

    def test_recalibrated_file_is_readable(self, probs_csv, tmp_path):
        from calerr import read_prediction_file

        prefix = tmp_path / "hist"
        main([
            "recalibrate", probs_csv, "--method", "histogram",
            "--histogram-bins", "5", "--output-prefix", str(prefix),
        ])
        back = read_prediction_file(tmp_path / "hist.recalibrated.csv")
        assert back.n_points == 30


class TestSweepAndRank:
    @pytest.fixture
    def method_files(self, tmp_path):
        from calerr import (
            apply_histogram_binning,
            apply_isotonic_multiclass,
            apply_temperature,
            fit_histogram_binning,
            fit_isotonic_multiclass,
            fit_temperature,
            split_validation,
        )

        logits = sample_overconfident_logits(120, 3, 2)
        fit, ev = split_validation(logits)
        fit_p, ev_p = softmax(fit), softmax(ev)
        outputs = {
            "histogram": apply_histogram_binning(
                fit_histogram_binning(fit_p, 5), ev_p
            ),
            "isotonic": apply_isotonic_multiclass(
                fit_isotonic_multiclass(fit_p), ev_p
            ),
            "temperature": apply_temperature(fit_temperature(fit), ev),
        }
        pairs = []
        for name, preds in outputs.items():
            path = tmp_path / f"{name}.csv"
            write_prediction_file(path, preds)
            pairs.append(f"{name}={path}")
        return pairs

    def test_sweep_bins_artifacts(self, method_files, tmp_path, capsys):
        prefix = tmp_path / "sweep"
        assert main([
            "sweep-bins", "--inputs", *method_files,
            "--bins", "5", "10", "--output-prefix", str(prefix),
        ]) == 0
        out = capsys.readouterr().out
        assert "binning: " in out
        cells = (tmp_path / "sweep.cells.csv").read_text().splitlines()
        assert cells[0] == (
            "index,binning,max_probs,class_conditional,threshold,norm,"
            "bin_count,method,score"
        )
        assert len(cells) == 1 + 32 * 2 * 3
        summary = json.loads((tmp_path / "sweep.summary.json").read_text())
        assert set(summary["group_correlation"]["binning"]) == {
            "even", "adaptive",
        }

    def test_sweep_bins_needs_two_inputs(self, method_files, tmp_path):
        assert main([
            "sweep-bins", "--inputs", method_files[0],
            "--output-prefix", str(tmp_path / "x"),
        ]) == 2

    def test_duplicate_input_names_rejected(self, method_files, tmp_path):
        assert main([
            "sweep-bins", "--inputs", method_files[0], method_files[0],
            "--output-prefix", str(tmp_path / "x"),
        ]) == 2

    def test_malformed_input_pair_rejected(self, tmp_path):
        assert main([
            "sweep-bins", "--inputs", "just-a-path.csv",
            "--output-prefix", str(tmp_path / "x"),
        ]) == 2

    def test_rank_methods_artifacts(self, method_files, tmp_path, capsys):
        prefix = tmp_path / "rank"
        assert main([
            "rank-methods", "--inputs", *method_files,
            "--bins", "5", "--output-prefix", str(prefix),
        ]) == 0
        table = (tmp_path / "rank.table.csv").read_text().splitlines()
        assert table[0] == "rank," + ",".join(str(i) for i in range(32))
        assert len(table) == 4  # header + one row per rank position
        meta = json.loads((tmp_path / "rank.meta.json").read_text())
        assert meta["methods"] == ["histogram", "isotonic", "temperature"]
        scores = (tmp_path / "rank.scores.csv").read_text().splitlines()
        assert scores[0] == "method,metric_index,score"
        assert len(scores) == 1 + 3 * 32


class TestLabelNoise:
    def test_small_run(self, tmp_path, capsys):
        out = tmp_path / "noise.csv"
        assert main([
            "label-noise", "--levels", "3", "--max-noise", "0.04",
            "--n-train", "200", "--n-test", "100",
            "--train-iterations", "20", "--output", str(out),
        ]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == (
            "noise,accuracy,mean_max_confidence,ece,sce,ace,omitted_fraction"
        )
        assert len(lines) == 4
        printed = capsys.readouterr().out
        assert "levels: 3 (noise 0 .. 0.04" in printed


class TestReliability:
    def test_bin_table(self, probs_csv, tmp_path, capsys):
        out = tmp_path / "rel.csv"
        assert main([
            "reliability", probs_csv, "--named", "ECE", "--bins", "10",
            "--output", str(out),
        ]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "class_index,lower,upper,count,accuracy,confidence"
        assert len(lines) == 11
        assert "occupied:" in capsys.readouterr().out


class TestPathology:
    def test_default_fixture(self, tmp_path, capsys):
        out = tmp_path / "path.csv"
        assert main(["pathology", "--output", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 1000
        assert "wrote 1000 predictions" in capsys.readouterr().out

    def test_header_flag(self, tmp_path):
        out = tmp_path / "path.csv"
        assert main(["pathology", "--header", "--output", str(out)]) == 0
        assert out.read_text().startswith("p0,p1,label\n")

    def test_reliability_on_pathology_has_one_occupied_bin(
        self, tmp_path, capsys
    ):
        fixture = tmp_path / "path.csv"
        main(["pathology", "--output", str(fixture)])
        out = tmp_path / "rel.csv"
        assert main([
            "reliability", str(fixture), "--named", "ECE", "--bins", "10",
            "--output", str(out),
        ]) == 0
        assert "occupied: 1" in capsys.readouterr().out

    def test_bad_parameter_is_data_error(self, tmp_path):
        assert main([
            "pathology", "--p-wrong", "0.4", "--output", str(tmp_path / "x.csv"),
        ]) == 1
