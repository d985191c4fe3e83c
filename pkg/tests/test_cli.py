import csv
import json

import pytest

from numbergame.cli import EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, main
from numbergame.readouts import PREDICTION, read_records
from numbergame.stimuli import expand_prefixes, tenenbaum99_sets


def run(*argv):
    return main(list(argv))


@pytest.fixture
def reference_path(tmp_path):
    out = tmp_path / "reference.jsonl"
    assert run("reference", "--task", "tenenbaum99", "--d", "100",
               "--out", str(out)) == EXIT_OK
    return out


class TestSpace:
    def test_build_and_save(self, tmp_path, capsys):
        out = tmp_path / "space.json"
        assert run("space", "--task", "tenenbaum99", "--d", "100",
                   "--out", str(out)) == EXIT_OK
        assert "rules=31 intervals=230 total=261" in capsys.readouterr().out
        assert out.exists()
        assert (tmp_path / "space.run-manifest.json").exists()

    def test_all_configured_cells(self, tmp_path):
        for task, d in [("tenenbaum99", 100), ("tenenbaum99", 200),
                        ("bigelow16", 100)]:
            out = tmp_path / f"{task}-{d}.json"
            assert run("space", "--task", task, "--d", str(d),
                       "--out", str(out)) == EXIT_OK

    def test_unconfigured_cell_is_usage_error(self, tmp_path):
        assert run("space", "--task", "bigelow16", "--d", "200",
                   "--out", str(tmp_path / "x.json")) == EXIT_USAGE

    def test_unknown_task_rejected_by_parser(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            run("space", "--task", "nonesuch", "--d", "100",
                "--out", str(tmp_path / "x.json"))
        assert exc.value.code == 2


class TestReference:
    def test_emits_26_records(self, reference_path):
        records = read_records(reference_path)
        assert len(records) == 26
        assert all(r.key.measurement == PREDICTION for r in records)

    def test_byte_identical_reruns(self, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        run("reference", "--task", "tenenbaum99", "--d", "100", "--out", str(a))
        run("reference", "--task", "tenenbaum99", "--d", "100", "--out", str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_bigelow16_requires_stimulus_file(self, tmp_path):
        assert run("reference", "--task", "bigelow16", "--d", "100",
                   "--out", str(tmp_path / "x.jsonl")) == EXIT_USAGE


class TestIngestValidate:
    def manifest_for(self, tmp_path):
        cells = [{"task": "tenenbaum99", "d": 100, "stimulus_id": p.stimulus_id,
                  "n": p.n, "measurement": PREDICTION}
                 for p in expand_prefixes(tenenbaum99_sets())]
        path = tmp_path / "manifest.json"
        path.write_text(json.dumps({"cells": cells}))
        return path

    def test_complete_run_passes(self, tmp_path, reference_path):
        manifest = self.manifest_for(tmp_path)
        out = tmp_path / "coverage.json"
        assert run("ingest-validate", "--readouts", str(reference_path),
                   "--manifest", str(manifest), "--out", str(out)) == EXIT_OK
        assert json.loads(out.read_text())["ok"] is True

    def test_missing_cells_fail(self, tmp_path, reference_path):
        manifest = self.manifest_for(tmp_path)
        truncated = tmp_path / "partial.jsonl"
        lines = reference_path.read_text().splitlines()
        truncated.write_text("\n".join(lines[:20]) + "\n")
        out = tmp_path / "coverage.json"
        assert run("ingest-validate", "--readouts", str(truncated),
                   "--manifest", str(manifest),
                   "--out", str(out)) == EXIT_VALIDATION
        report = json.loads(out.read_text())
        assert report["ok"] is False and len(report["missing"]) == 6

    def test_missing_file_is_usage_error(self, tmp_path):
        assert run("ingest-validate", "--readouts", str(tmp_path / "no.jsonl"),
                   "--manifest", str(tmp_path / "no.json"),
                   "--out", str(tmp_path / "o.json")) == EXIT_USAGE


class TestFit:
    def agent_file(self, tmp_path, alpha, beta, name="agent.jsonl"):
        out = tmp_path / name
        assert run("agent", "--task", "tenenbaum99", "--d", "100",
                   "--alpha", str(alpha), "--beta", str(beta),
                   "--out", str(out)) == EXIT_OK
        return out

    def read_rows(self, path):
        with open(path) as f:
            return list(csv.DictReader(f))

    def test_self_fit_recovers_reference(self, tmp_path, reference_path):
        out = tmp_path / "fit.csv"
        assert run("fit", "--task", "tenenbaum99", "--d", "100",
                   "--readouts", str(reference_path),
                   "--out", str(out)) == EXIT_OK
        row = self.read_rows(out)[0]
        assert float(row["alpha"]) == pytest.approx(1.0, abs=0.02)
        assert float(row["beta"]) == pytest.approx(1.0, abs=0.02)

    def test_trajectory_scope(self, tmp_path):
        readouts = self.agent_file(tmp_path, 1.5, 0.5)
        out = tmp_path / "trajectory.csv"
        assert run("fit", "--task", "tenenbaum99", "--d", "100",
                   "--readouts", str(readouts), "--scope", "trajectory",
                   "--out", str(out)) == EXIT_OK
        rows = self.read_rows(out)
        assert [r["scope"] for r in rows] == \
            ["prefix-1", "prefix-2", "prefix-3", "prefix-4"]
        for row in rows:
            assert float(row["alpha"]) == pytest.approx(1.5, rel=0.05)

    def test_byte_identical_csv(self, tmp_path):
        readouts = self.agent_file(tmp_path, 0.7, 1.3)
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (a, b):
            assert run("fit", "--task", "tenenbaum99", "--d", "100",
                       "--readouts", str(readouts), "--out", str(out)) == EXIT_OK
        assert a.read_bytes() == b.read_bytes()

    def test_missing_readout_file(self, tmp_path):
        assert run("fit", "--task", "tenenbaum99", "--d", "100",
                   "--readouts", str(tmp_path / "no.jsonl"),
                   "--out", str(tmp_path / "f.csv")) == EXIT_USAGE


class TestMetrics:
    def test_self_comparison_is_zero(self, tmp_path, reference_path):
        out = tmp_path / "metrics.csv"
        assert run("metrics", "--task", "tenenbaum99", "--d", "100",
                   "--readouts", str(reference_path),
                   "--reference", str(reference_path),
                   "--out", str(out)) == EXIT_OK
        with open(out) as f:
            rows = list(csv.DictReader(f))
        assert len(rows) == 26
        for row in rows:
            assert float(row["jsd"]) == pytest.approx(0.0, abs=1e-7)
            assert float(row["kl"]) == pytest.approx(0.0, abs=1e-7)
            assert float(row["entropy"]) > 0.0

    def test_run_manifest_written(self, tmp_path, reference_path):
        out = tmp_path / "metrics.csv"
        run("metrics", "--task", "tenenbaum99", "--d", "100",
            "--readouts", str(reference_path),
            "--reference", str(reference_path), "--out", str(out))
        manifest = json.loads(
            (tmp_path / "metrics.run-manifest.json").read_text())
        assert manifest["command"] == "metrics"
        assert manifest["skipped"] == []
        assert "kl_eps" in manifest["config"]

    def test_extension_columns_for_enlarged_domain(self, tmp_path):
        r100 = tmp_path / "r100.jsonl"
        r200 = tmp_path / "r200.jsonl"
        run("reference", "--task", "tenenbaum99", "--d", "100", "--out", str(r100))
        run("reference", "--task", "tenenbaum99", "--d", "200", "--out", str(r200))
        merged = tmp_path / "merged.jsonl"
        merged.write_text(r100.read_text() + r200.read_text())
        out = tmp_path / "metrics.csv"
        assert run("metrics", "--task", "tenenbaum99", "--d", "200",
                   "--readouts", str(merged), "--reference", str(r200),
                   "--out", str(out)) == EXIT_OK
        with open(out) as f:
            rows = [r for r in csv.DictReader(f) if r["d"] == "200"]
        assert len(rows) == 26
        for row in rows:
            m_ext = float(row["m_ext"])
            assert 0.0 <= m_ext <= 1.0


class TestAgent:
    def test_generation_records(self, tmp_path):
        out = tmp_path / "labels.jsonl"
        assert run("agent", "--task", "tenenbaum99", "--d", "100",
                   "--measurement", "generation", "--k", "5",
                   "--out", str(out)) == EXIT_OK
        records = read_records(out)
        assert len(records) == 26
        assert all(r.key.measurement == "generation" for r in records)
        assert all(len(r.payload["entries"]) <= 5 for r in records)

    def test_invalid_noise_is_usage_error(self, tmp_path):
        assert run("agent", "--task", "tenenbaum99", "--d", "100",
                   "--noise", "0.9", "--out", str(tmp_path / "x.jsonl")) \
            == EXIT_USAGE


class TestConfig:
    def test_config_file_overrides(self, tmp_path, reference_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"kl_eps": 1e-6}))
        out = tmp_path / "metrics.csv"
        assert run("metrics", "--task", "tenenbaum99", "--d", "100",
                   "--config", str(cfg),
                   "--readouts", str(reference_path),
                   "--reference", str(reference_path),
                   "--out", str(out)) == EXIT_OK
        manifest = json.loads(
            (tmp_path / "metrics.run-manifest.json").read_text())
        assert manifest["config"]["kl_eps"] == 1e-6

    def test_unknown_config_key(self, tmp_path, reference_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"mystery_knob": 1}))
        assert run("metrics", "--task", "tenenbaum99", "--d", "100",
                   "--config", str(cfg),
                   "--readouts", str(reference_path),
                   "--reference", str(reference_path),
                   "--out", str(tmp_path / "m.csv")) == EXIT_USAGE

    def test_out_dir_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("NUMBERGAME_OUT", str(tmp_path / "outputs"))
        assert run("reference", "--task", "tenenbaum99", "--d", "100",
                   "--out", "ref.jsonl") == EXIT_OK
        assert (tmp_path / "outputs" / "ref.jsonl").exists()
