import json
import os

import numpy as np
import pytest

from gsparse import cli, core, decomposition, sensing
from gsparse.cli import ExperimentConfig, main


@pytest.fixture
def config_dict():
    return {
        "n": 8, "m": 8, "k": 2, "t": 2.0, "trials": 2, "seed": 5,
        "eps": 0.0, "noise_model": "none", "group_size": 2, "p_list": [1.0, 2.0],
    }


def write(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh)
    return str(path)


class TestRoundTrip:
    def test_matrix(self, tmp_path):
        A = sensing.gaussian_matrix(3, 5, 9)
        path = tmp_path / "m.json"
        cli.write_json(path, cli.matrix_to_json(A))
        back = cli.matrix_from_json(cli.load_json(path))
        assert np.array_equal(back.entries, A.entries)
        assert back.provenance == A.provenance

    def test_groups(self, tmp_path):
        G = core.make_group_structure(5, [[1, 2], [3, 4, 5]])
        path = tmp_path / "g.json"
        cli.write_json(path, cli.groups_to_json(G))
        assert cli.groups_from_json(cli.load_json(path)) == G

    def test_vector(self, tmp_path):
        x = np.array([1.5, -2.25, 0.0])
        path = tmp_path / "v.json"
        cli.write_json(path, cli.vector_to_json(x))
        assert np.array_equal(cli.vector_from_json(cli.load_json(path)), x)


class TestConfig:
    def test_non_integer_tk_rejected(self, config_dict):
        config_dict["t"] = 1.7
        with pytest.raises(ValueError, match="integer"):
            ExperimentConfig.from_json(config_dict).validate()

    def test_group_size_must_divide(self, config_dict):
        config_dict["group_size"] = 3
        with pytest.raises(ValueError, match="divide"):
            ExperimentConfig.from_json(config_dict).validate()

    def test_m_beyond_n_rejected(self, config_dict):
        config_dict["m"] = 9
        with pytest.raises(ValueError, match="exceeds"):
            ExperimentConfig.from_json(config_dict).validate()

    def test_group_larger_than_k_rejected(self, config_dict):
        config_dict["group_size"] = 4
        with pytest.raises(ValueError, match="budget"):
            ExperimentConfig.from_json(config_dict).validate()


class TestGen:
    def test_deterministic_bytes(self, tmp_path, config_dict):
        cfg = write(tmp_path / "c.json", config_dict)
        for sub in ("a", "b"):
            assert main(["--quiet", "--out", str(tmp_path / sub), "gen", "--config", cfg]) == 0
        for name in ("matrix.json", "groups.json", "truth.json", "measurements.json"):
            a = (tmp_path / "a" / name).read_bytes()
            b = (tmp_path / "b" / name).read_bytes()
            assert a == b

    def test_bad_config_exit_one(self, tmp_path, config_dict):
        config_dict["t"] = 1.7
        cfg = write(tmp_path / "c.json", config_dict)
        assert main(["--quiet", "--out", str(tmp_path), "gen", "--config", cfg]) == 1


class TestCertifyCommand:
    def test_identity_valid_exit_zero(self, tmp_path):
        A = sensing.SensingMatrix(4, 4, np.eye(4))
        G = core.make_group_structure(4, [[1, 2], [3, 4]])
        m = write(tmp_path / "m.json", cli.matrix_to_json(A))
        g = write(tmp_path / "g.json", cli.groups_to_json(G))
        out = tmp_path / "cert.json"
        assert main(["--quiet", "--out", str(out), "certify",
                     "--matrix", m, "--groups", g, "--k", "2", "--t", "2.0"]) == 0
        payload = json.loads(out.read_text())
        assert payload["valid"] is True
        assert payload["delta"] == 0.0

    def test_duplicate_columns_exit_two(self, tmp_path):
        entries = np.eye(4)
        entries[:, 1] = entries[:, 0]  # duplicate pair inside an admissible support
        A = sensing.SensingMatrix(4, 4, entries)
        G = core.singleton_groups(4)
        m = write(tmp_path / "m.json", cli.matrix_to_json(A))
        g = write(tmp_path / "g.json", cli.groups_to_json(G))
        assert main(["--quiet", "certify", "--matrix", m, "--groups", g,
                     "--k", "2", "--t", "2.0"]) == 2

    def test_missing_file_exit_one(self, tmp_path):
        g = write(tmp_path / "g.json", {"n": 2, "groups": [[1], [2]]})
        assert main(["--quiet", "certify", "--matrix", str(tmp_path / "nope.json"),
                     "--groups", g, "--k", "2", "--t", "2.0"]) == 1


class TestRunCommand:
    def test_noiseless_run(self, tmp_path, config_dict):
        cfg = write(tmp_path / "c.json", config_dict)
        assert main(["--quiet", "--out", str(tmp_path), "run", "--config", cfg]) == 0
        lines = (tmp_path / "trials.csv").read_text().strip().splitlines()
        header = lines[0].split(",")
        assert header == ["trial", "delta", "threshold", "certified", "success",
                         "err_1", "bound_1", "err_2", "bound_2", "error"]
        assert len(lines) == 3
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["trials"] == 2
        assert summary["errors"] == 0

    def test_zero_trials_header_only(self, tmp_path, config_dict):
        config_dict["trials"] = 0
        cfg = write(tmp_path / "c.json", config_dict)
        assert main(["--quiet", "--out", str(tmp_path), "run", "--config", cfg]) == 0
        assert len((tmp_path / "trials.csv").read_text().strip().splitlines()) == 1

    def test_run_deterministic(self, tmp_path, config_dict):
        cfg = write(tmp_path / "c.json", config_dict)
        for sub in ("a", "b"):
            assert main(["--quiet", "--out", str(tmp_path / sub), "run", "--config", cfg]) == 0
        assert (tmp_path / "a/trials.csv").read_bytes() == (tmp_path / "b/trials.csv").read_bytes()


class TestPhaseCommand:
    def test_sweep(self, tmp_path):
        config = {
            "n": 6, "m": 6, "k": 2, "t": 2.0, "trials": 4, "seed": 1,
            "group_size": 2, "p_list": [2.0], "m_sweep": [6],
        }
        cfg = write(tmp_path / "c.json", config)
        assert main(["--quiet", "--out", str(tmp_path), "phase", "--config", cfg]) == 0
        lines = (tmp_path / "phase.csv").read_text().strip().splitlines()
        assert lines[0] == "m,trials,success_rate_group,success_rate_singleton"
        # m = n is the overdetermined limit: everything succeeds
        assert lines[1].startswith("6,4,1,1")


class TestDecomposeCommand:
    def test_valid_exit_zero(self, tmp_path):
        v = write(tmp_path / "v.json", {"data": [1.0, 0.5, 0.5]})
        g = write(tmp_path / "g.json", {"n": 3, "groups": [[1], [2], [3]]})
        out = tmp_path / "dec.json"
        assert main(["--quiet", "--out", str(out), "decompose", "--vector", v,
                     "--groups", g, "--alpha", "1.0", "--s", "2"]) == 0
        payload = json.loads(out.read_text())
        assert payload["check"]["passed"] is True
        dec = decomposition.ConvexDecomposition(
            weights=tuple(payload["weights"]),
            atoms=tuple(np.asarray(a) for a in payload["atoms"]),
            source=np.asarray([1.0, 0.5, 0.5]),
            alpha=payload["alpha"],
            s=payload["s"],
        )
        G = core.singleton_groups(3)
        assert decomposition.check_decomposition(dec, G).passed

    def test_hypothesis_violation_exit_one(self, tmp_path):
        v = write(tmp_path / "v.json", {"data": [1.0, 1.0, 1.0]})
        g = write(tmp_path / "g.json", {"n": 3, "groups": [[1], [2], [3]]})
        assert main(["--quiet", "decompose", "--vector", v, "--groups", g,
                     "--alpha", "1.0", "--s", "2"]) == 1


class TestDecodeCommand:
    def test_problem_file(self, tmp_path):
        A = sensing.SensingMatrix(2, 2, np.eye(2))
        problem = {"matrix": cli.matrix_to_json(A), "y": [1.0, 2.0], "eps": 0.0}
        p = write(tmp_path / "p.json", problem)
        out = tmp_path / "r.json"
        assert main(["--quiet", "--out", str(out), "decode", "--problem", p]) == 0
        payload = json.loads(out.read_text())
        assert payload["objective"] == pytest.approx(3.0, abs=1e-10)
        assert payload["method"] == "lp_exact"


class TestIndexGripCommands:
    def test_index(self, tmp_path, capsys):
        v = write(tmp_path / "v.json", {"data": [5.0, 0.0, 1.0, 1.0, 1.0]})
        g = write(tmp_path / "g.json", {"n": 5, "groups": [[1, 2], [3, 4, 5]]})
        assert main(["index", "--vector", v, "--groups", g, "--k", "2"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["group_sparsity_index"] == 3.0
        assert payload["sparsity_index"] == 2.0

    def test_grip(self, tmp_path, capsys):
        A = sensing.SensingMatrix(4, 4, np.eye(4))
        m = write(tmp_path / "m.json", cli.matrix_to_json(A))
        g = write(tmp_path / "g.json", {"n": 4, "groups": [[1, 2], [3, 4]]})
        assert main(["grip", "--matrix", m, "--groups", g, "--k", "2"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["delta"] == 0.0
        assert payload["exact"] is True
