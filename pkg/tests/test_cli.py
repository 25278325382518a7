"""Command-line interface: report layout, determinism and exit codes."""
import json
import subprocess
import sys

import pytest

from hessquot import __version__, cli


def run_json(capsys, *argv):
    code = cli.run(list(argv))
    out = capsys.readouterr().out
    return code, out


class TestReports:
    def test_identities(self, capsys):
        code, out = run_json(capsys, "identities", "--n", "5", "--k", "3", "--samples", "20")
        rep = json.loads(out)
        assert code == 0
        assert set(rep) == {"tool_version", "config", "results", "pass"}
        assert rep["tool_version"] == __version__ and rep["pass"] is True
        assert rep["config"]["seed"] == 0

    def test_radial_hyper(self, capsys, tmp_path):
        csv_path = tmp_path / "profile.csv"
        code = cli.run(["radial", "--geom", "hyper", "--n", "3", "--k", "2", "--l", "1", "--c", "0.5",
                        "--out", str(tmp_path / "r.json"), "--csv", str(csv_path)])
        rep = json.loads((tmp_path / "r.json").read_text())
        assert code == 0
        assert rep["results"]["R"] == pytest.approx(0.54930, abs=1e-5)
        assert csv_path.read_text().startswith("r,u,du,d2u,lambda_1")
        assert capsys.readouterr().out == ""

    def test_radial_csv_on_stdout(self, capsys):
        code, out = run_json(capsys, "radial", "--format", "csv", "--csv-samples", "5")
        assert code == 0 and len(out.strip().splitlines()) == 6

    @pytest.mark.parametrize("geom", ["euclid", "hyper", "graph"])
    def test_pfunction(self, capsys, geom):
        code, out = run_json(capsys, "pfunction", "--geom", geom, "--samples", "40")
        assert code == 0
        assert json.loads(out)["results"]["p_spread"] < 1e-8

    def test_integrals(self, capsys):
        code, out = run_json(capsys, "integrals", "--resolution", "128")
        ledgers = json.loads(out)["results"]["ledgers"]
        assert code == 0
        assert {d["identity"] for d in ledgers} == {"minkowski", "pohozaev_euclid", "pohozaev_curv", "pohozaev_hyper"}

    def test_solve(self, capsys):
        code, out = run_json(capsys, "solve", "--domain", "disk", "--resolution", "65")
        res = json.loads(out)["results"]
        assert code == 0 and res["k_convex"] and res["max_u_interior"] < 0

    def test_scan_csv(self, capsys, tmp_path):
        code = cli.run(["scan", "--family", "ellipse", "--eps", "0:0.04:0.02", "--resolution", "65",
                        "--csv", str(tmp_path / "s.csv"), "--out", str(tmp_path / "s.json")])
        assert code == 0
        rows = (tmp_path / "s.csv").read_text().strip().splitlines()
        assert len(rows) == 4 and rows[0].startswith("epsilon,")


class TestDeterminism:
    def test_identical_bytes(self, tmp_path):
        outs = []
        for i in range(2):
            path = tmp_path / f"o{i}.json"
            cli.run(["identities", "--n", "4", "--k", "2", "--samples", "30", "--seed", "7", "--out", str(path)])
            outs.append(path.read_bytes())
        assert outs[0] == outs[1]

    def test_seed_changes_output(self, tmp_path):
        outs = []
        for seed in ("1", "2"):
            path = tmp_path / f"o{seed}.json"
            cli.run(["identities", "--samples", "10", "--seed", seed, "--out", str(path)])
            outs.append(json.loads(path.read_text())["results"])
        assert outs[0] != outs[1]


class TestExitCodes:
    @pytest.mark.parametrize("argv", [
        ["radial", "--n", "2", "--k", "3"],
        ["radial", "--geom", "hyper", "--c", "1.5"],
        ["scan", "--eps", "0:0.1"],
        ["solve", "--resolution", "8"],
        ["identities", "--n", "20"],
        ["nonsense"],
    ])
    def test_config_error(self, argv, capsys):
        assert cli.run(argv) == cli.EXIT_CONFIG

    def test_tolerance_failure(self, capsys):
        assert cli.run(["identities", "--samples", "5", "--tol", "1e-30"]) == cli.EXIT_TOL

    def test_non_convergence(self, capsys):
        assert cli.run(["solve", "--domain", "ellipse", "--resolution", "65", "--max-iter", "1"]) == cli.EXIT_NONCONV

    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "hessquot", "identities", "--samples", "3"],
                              capture_output=True, text=True, check=False)
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["pass"] is True


class TestRange:
    def test_inclusive(self):
        assert cli.parse_range("0:0.1:0.02") == [0.0, 0.02, 0.04, 0.06, 0.08, 0.1]

    def test_list(self):
        assert cli.parse_range("0,0.5") == [0.0, 0.5]
