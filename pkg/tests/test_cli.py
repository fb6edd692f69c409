import csv
import json

import pytest

from dynreg.cli import (
    EXIT_BUDGET,
    EXIT_CONFIG,
    EXIT_OK,
    ConfigError,
    RunConfig,
    main,
    parse_eps_grid,
)


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return path


HAND_TRACE = {
    "problem": {"name": "quadratic", "diag": [1.0], "x0": [1.0]},
    "orders": {"p": 1, "q": 1, "beta": 1.0},
    "oracle": {"kind": "exact"},
    "algo": {"eps": 1e-3},
    "seed": 0,
}


class TestConfig:
    def test_round_trip(self):
        cfg = RunConfig.from_dict(HAND_TRACE)
        again = RunConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
        assert again == cfg

    @pytest.mark.parametrize(
        "payload",
        [
            {"unknown": 1},
            {"problem": {"name": "quadratic", "bogus": 1}},
            {"problem": {"name": "nope"}},
            {"oracle": {"kind": "exact", "bogus": 1}},
            {"oracle": {"kind": "psychic"}},
            {"algo": {"bogus": 1}},
            {"orders": {"p": 1, "bogus": 2}},
        ],
    )
    def test_unknown_keys_rejected(self, payload):
        with pytest.raises(ConfigError):
            RunConfig.from_dict(payload)

    def test_eps_grid_parsing(self):
        grid = parse_eps_grid("1e-1:1e-3:3")
        assert grid == pytest.approx([1e-1, 1e-2, 1e-3])
        with pytest.raises(ConfigError):
            parse_eps_grid("1e-1:1e-3")


class TestSolve:
    def test_hand_trace_summary(self, tmp_path):
        cfg = write_config(tmp_path, HAND_TRACE)
        out = tmp_path / "out"
        assert main(["solve", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
        summary = json.loads((out / "summary.json").read_text())
        assert summary["totals"]["successful"] == 1
        assert summary["totals"]["iterations"] == 1
        assert summary["status"] == "negligible_increment"
        assert summary["bounds_ok"] is True
        lines = (out / "trace.jsonl").read_text().splitlines()
        assert len(lines) == 2
        first = json.loads(lines[0])
        assert first["schema_version"] == 1
        assert first["rho"] == 0.5

    def test_trace_schema_fields(self, tmp_path):
        cfg = write_config(tmp_path, HAND_TRACE)
        out = tmp_path / "out"
        main(["solve", "--config", str(cfg), "--out", str(out)])
        record = json.loads((out / "trace.jsonl").read_text().splitlines()[0])
        assert set(record) == {
            "schema_version",
            "k",
            "sigma",
            "omega",
            "rho",
            "step_norm",
            "success",
            "delta_k",
            "eps_ladder",
            "shrinks",
            "flags",
            "fun_evals",
            "deriv_evals",
            "component_evals",
            "extras",
            "x_inf",
        }

    def test_byte_identical_reruns(self, tmp_path):
        cfg_payload = {
            "problem": {"name": "quadratic", "diag": [1.0, 2.0]},
            "oracle": {"kind": "noisy", "noise_fraction": 0.9},
            "algo": {"eps": 1e-3},
            "seed": 42,
        }
        cfg = write_config(tmp_path, cfg_payload)
        outs = []
        for sub in ("a", "b"):
            out = tmp_path / sub
            assert main(["solve", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
            outs.append(out)
        assert (outs[0] / "trace.jsonl").read_bytes() == (outs[1] / "trace.jsonl").read_bytes()
        assert (outs[0] / "summary.json").read_bytes() == (outs[1] / "summary.json").read_bytes()

    def test_budget_exit_code(self, tmp_path):
        payload = {
            "problem": {"name": "rosenbrock"},
            "algo": {"eps": 1e-8, "max_iter": 2},
        }
        cfg = write_config(tmp_path, payload)
        assert main(["solve", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_BUDGET

    def test_flag_overrides(self, tmp_path):
        out = tmp_path / "o"
        code = main(
            [
                "solve",
                "--problem",
                "quadratic",
                "--eps",
                "1e-3",
                "--oracle",
                "noisy",
                "--noise-fraction",
                "0.5",
                "--p",
                "2",
                "--q",
                "1",
                "--schedule",
                "monotonic",
                "--seed",
                "7",
                "--out",
                str(out),
            ]
        )
        assert code == EXIT_OK
        assert (out / "summary.json").exists()

    def test_bad_config_file(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["solve", "--config", str(bad), "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_unknown_key_exit(self, tmp_path):
        cfg = write_config(tmp_path, {"bogus": True})
        assert main(["solve", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_CONFIG


class TestDatasetFile:
    def test_solve_from_dataset_file(self, tmp_path):
        from dynreg import make_synthetic_dataset, save_dataset

        data = tmp_path / "train.csv"
        save_dataset(make_synthetic_dataset(600, 5, seed=10), data)
        payload = {
            "problem": {"name": "sigmoid-file", "path": str(data)},
            "orders": {"p": 2, "q": 1},
            "oracle": {"kind": "subsampled", "t": 1e-3},
            "algo": {"eps": 2e-2},
            "seed": 2,
        }
        cfg = write_config(tmp_path, payload)
        out = tmp_path / "o"
        assert main(["solve", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
        summary = json.loads((out / "summary.json").read_text())
        assert summary["status"] != "budget"
        assert summary["totals"]["component_evals"] > 0

    def test_missing_dataset_file(self, tmp_path):
        payload = {"problem": {"name": "sigmoid-file", "path": str(tmp_path / "nope.csv")}}
        cfg = write_config(tmp_path, payload)
        assert main(["solve", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_CONFIG


class TestScaling:
    def test_quadratic_grid_obeys_bounds(self, tmp_path):
        payload = {
            "problem": {"name": "quadratic", "diag": [1.0, 2.0]},
            "orders": {"p": 1, "q": 1, "beta": 1.0},
        }
        cfg = write_config(tmp_path, payload)
        out = tmp_path / "o"
        code = main(
            ["scaling", "--config", str(cfg), "--eps-grid", "1e-1:1e-3:3", "--out", str(out)]
        )
        assert code == EXIT_OK
        with open(out / "scaling.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 3
        for row in rows:
            assert int(row["successful_iters"]) <= int(row["theorem_bound_succ"])
            assert int(row["total_iters"]) <= int(row["theorem_bound_total"])

    def test_deterministic_csv(self, tmp_path):
        payload = {"problem": {"name": "quadratic", "diag": [1.0, 2.0]}}
        cfg = write_config(tmp_path, payload)
        blobs = []
        for sub in ("a", "b"):
            out = tmp_path / sub
            main(["scaling", "--config", str(cfg), "--eps-grid", "1e-1:1e-2:2", "--out", str(out)])
            blobs.append((out / "scaling.csv").read_bytes())
        assert blobs[0] == blobs[1]


class TestSampleCheck:
    def test_small_dataset(self, tmp_path):
        payload = {
            "problem": {"name": "sigmoid-synthetic", "N": 400, "n": 4, "data_seed": 3},
            "oracle": {"kind": "subsampled", "t": 0.05},
            "algo": {"eps": 1e-2},
            "seed": 1,
        }
        cfg = write_config(tmp_path, payload)
        out = tmp_path / "o"
        code = main(
            [
                "sample-check",
                "--config",
                str(cfg),
                "--trials",
                "300",
                "--eps-frac",
                "0.3",
                "--out",
                str(out),
            ]
        )
        assert code == EXIT_OK
        with open(out / "sample_check.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert [row["order"] for row in rows] == ["0", "1", "2"]
        for row in rows:
            assert row["ok"] == "True"
            assert float(row["rate"]) <= float(row["threshold"])
