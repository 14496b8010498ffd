import json
import os
from pathlib import Path

import pytest

from semrank.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main


@pytest.fixture
def corpus(tmp_path):
    out = tmp_path / "corpus"
    code = main([
        "synth", "--out", str(out), "--users", "30", "--items", "48",
        "--groups", "8", "--dim", "24", "--seed", "7", "--regime", "strong",
    ])
    assert code == EXIT_OK
    return out


def read_lines(path):
    return Path(path).read_text().splitlines()


class TestSynthCommand:
    def test_writes_three_files_and_manifest(self, corpus):
        for name in ("catalog.jsonl", "interactions.jsonl", "requests.jsonl", "manifest.json"):
            assert (corpus / name).exists()
        manifest = json.loads((corpus / "manifest.json").read_text())
        assert manifest["spec"]["seed"] == 7
        assert manifest["regime"] == "strong"

    def test_rerun_byte_identical(self, corpus, tmp_path):
        out2 = tmp_path / "corpus2"
        main([
            "synth", "--out", str(out2), "--users", "30", "--items", "48",
            "--groups", "8", "--dim", "24", "--seed", "7", "--regime", "strong",
        ])
        for name in ("catalog.jsonl", "interactions.jsonl", "requests.jsonl"):
            assert (corpus / name).read_bytes() == (out2 / name).read_bytes()


class TestDecodeCommand:
    def test_record_count(self, corpus, tmp_path):
        out = tmp_path / "decoded"
        code = main([
            "decode", "--input", str(corpus / "requests.jsonl"),
            "--output", str(out), "--seed", "1",
        ])
        assert code == EXIT_OK
        records = read_lines(out / "rankings.jsonl")
        assert len(records) == 30
        first = json.loads(records[0])
        assert set(first) == {
            "request_id", "effective_temperature", "entropy", "clusters", "ranking",
        }
        assert (out / "manifest.json").exists()

    def test_corrupt_line_cites_line_number(self, corpus, tmp_path, capsys):
        bad = tmp_path / "bad.jsonl"
        lines = read_lines(corpus / "requests.jsonl")
        lines[6] = "{not json"
        bad.write_text("\n".join(lines) + "\n")
        code = main([
            "decode", "--input", str(bad), "--output", str(tmp_path / "o"),
        ])
        assert code == EXIT_DATA
        assert ":7:" in capsys.readouterr().err

    def test_determinism_and_jobs_invariance(self, corpus, tmp_path):
        outputs = []
        for jobs in ("1", "1", "8"):
            out = tmp_path / f"out{len(outputs)}"
            main([
                "decode", "--input", str(corpus / "requests.jsonl"),
                "--output", str(out), "--seed", "5", "--jobs", jobs,
            ])
            outputs.append((out / "rankings.jsonl").read_bytes())
        assert outputs[0] == outputs[1] == outputs[2]

    def test_dump_similarity_flag(self, corpus, tmp_path):
        out = tmp_path / "sim"
        main([
            "decode", "--input", str(corpus / "requests.jsonl"),
            "--output", str(out), "--dump-similarity",
        ])
        first = json.loads(read_lines(out / "rankings.jsonl")[0])
        matrix = first["similarity"]
        assert len(matrix) == len(matrix[0])

    def test_baseline_strategy(self, corpus, tmp_path):
        out = tmp_path / "greedy"
        code = main([
            "decode", "--input", str(corpus / "requests.jsonl"),
            "--output", str(out), "--strategy", "greedy",
        ])
        assert code == EXIT_OK
        first = json.loads(read_lines(out / "rankings.jsonl")[0])
        assert "ranking" in first


class TestEvalCommand:
    def test_reports_written(self, corpus, tmp_path):
        out = tmp_path / "eval"
        code = main([
            "eval", "--input", str(corpus / "requests.jsonl"),
            "--output", str(out), "--strategy", "greedy", "--k", "3,5",
        ])
        assert code == EXIT_OK
        report = json.loads((out / "report.json").read_text())
        assert set(report["per_k"]) == {"3", "5"}
        assert (out / "report.txt").exists()

    def test_missing_ground_truth(self, corpus, tmp_path, capsys):
        stripped = tmp_path / "nogt.jsonl"
        lines = []
        for line in read_lines(corpus / "requests.jsonl"):
            obj = json.loads(line)
            obj.pop("ground_truth", None)
            lines.append(json.dumps(obj))
        stripped.write_text("\n".join(lines) + "\n")
        code = main([
            "eval", "--input", str(stripped), "--output", str(tmp_path / "o"),
            "--strategy", "greedy",
        ])
        assert code == EXIT_DATA
        assert "ground_truth" in capsys.readouterr().err


class TestCompareCommand:
    def test_usd_beats_greedy_on_strong_corpus(self, corpus, tmp_path):
        out = tmp_path / "cmp"
        cfg = tmp_path / "cfg.txt"
        cfg.write_text("alpha = 1.0\nbeta = 0.0\nseed = 42\n")
        code = main([
            "compare", "--input", str(corpus / "requests.jsonl"),
            "--output", str(out), "--strategies", "usd,greedy",
            "--config", str(cfg), "--k", "1,3",
        ])
        assert code == EXIT_OK
        reports = {
            r["strategy"]: r for r in json.loads((out / "compare.json").read_text())
        }
        assert reports["usd"]["per_k"]["1"]["hr"] > reports["greedy"]["per_k"]["1"]["hr"]

    def test_duplicate_strategies_deduplicated(self, corpus, tmp_path, capsys):
        out = tmp_path / "cmp2"
        code = main([
            "compare", "--input", str(corpus / "requests.jsonl"),
            "--output", str(out), "--strategies", "greedy,greedy",
        ])
        assert code == EXIT_OK
        assert "duplicate" in capsys.readouterr().err
        assert len(json.loads((out / "compare.json").read_text())) == 1

    def test_unknown_strategy(self, corpus, tmp_path):
        code = main([
            "compare", "--input", str(corpus / "requests.jsonl"),
            "--output", str(tmp_path / "o"), "--strategies", "oracle",
        ])
        assert code == EXIT_DATA


class TestSweepCommand:
    def test_alpha_sweep_csv(self, corpus, tmp_path):
        out = tmp_path / "sweep"
        code = main([
            "sweep", "--input", str(corpus / "requests.jsonl"),
            "--output", str(out), "--param", "alpha",
            "--values", "0,0.25,0.5,0.75,1.0", "--k", "1,3",
        ])
        assert code == EXIT_OK
        rows = (out / "sweep.csv").read_text().strip().splitlines()
        assert rows[0].split(",")[:2] == ["param", "value"]
        assert len(rows) == 6

    def test_out_of_range_value_rejected_before_running(self, corpus, tmp_path, capsys):
        out = tmp_path / "sweep2"
        code = main([
            "sweep", "--input", str(corpus / "requests.jsonl"),
            "--output", str(out), "--param", "alpha", "--values", "0.5,1.5",
        ])
        assert code == EXIT_DATA
        assert "alpha" in capsys.readouterr().err
        assert not out.exists()

    def test_single_value(self, corpus, tmp_path):
        out = tmp_path / "sweep3"
        code = main([
            "sweep", "--input", str(corpus / "requests.jsonl"),
            "--output", str(out), "--param", "gamma", "--values", "0.5",
        ])
        assert code == EXIT_OK
        assert len((out / "sweep.csv").read_text().strip().splitlines()) == 2


class TestConfigAndSeeds:
    def test_config_file_round_trip(self, tmp_path):
        from semrank.jsonlio import format_config, parse_config_file
        from semrank.model import validate_config

        cfg = validate_config({"alpha": 0.25, "enable_clustering": False, "seed": 9})
        path = tmp_path / "cfg.txt"
        path.write_text(format_config(cfg.to_dict()))
        assert validate_config(parse_config_file(path)) == cfg

    def test_env_seed_override(self, corpus, tmp_path, monkeypatch):
        monkeypatch.setenv("SEMRANK_SEED", "77")
        out = tmp_path / "env"
        main([
            "decode", "--input", str(corpus / "requests.jsonl"),
            "--output", str(out),
        ])
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["seed"] == 77

    def test_usage_error_exit_code(self):
        assert main(["decode"]) == EXIT_USAGE

    def test_missing_input_file(self, tmp_path):
        code = main([
            "decode", "--input", str(tmp_path / "nope.jsonl"),
            "--output", str(tmp_path / "o"),
        ])
        assert code == EXIT_USAGE
