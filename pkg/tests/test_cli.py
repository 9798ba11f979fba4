import csv
import json

import numpy as np
import pytest

from kirchsolve import DiscreteFunction
from kirchsolve.cli import EXIT_CONFIG, EXIT_OK, EXIT_PROPERTY, EXIT_SOLVER, main


def _run(tmp_path, command, config=None, *extra):
    argv = [command, "--out", str(tmp_path / "out"), "--quiet"]
    if config is not None:
        path = tmp_path / "config.json"
        path.write_text(json.dumps(config))
        argv += ["--config", str(path)]
    return main(argv + list(extra))


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestExitCodes:
    def test_default_solve(self, tmp_path):
        assert _run(tmp_path, "solve") == EXIT_OK
        meta = json.loads((tmp_path / "out" / "solution.json").read_text())
        assert meta["converged"] and meta["n_cells"] == 400 and meta["eps"] == 1e-3

    def test_invalid_problem(self, tmp_path, capsys):
        assert _run(tmp_path, "solve", {"problem": {"alpha": -1}}) == EXIT_CONFIG
        assert "alpha" in capsys.readouterr().err

    def test_unknown_key(self, tmp_path):
        assert _run(tmp_path, "solve", {"tolerance": 1}) == EXIT_CONFIG

    def test_missing_config_file(self, tmp_path):
        assert main(["solve", "--config", str(tmp_path / "nope.json"),
                     "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_bad_schedule(self, tmp_path):
        assert _run(tmp_path, "sweep", {"eps_schedule": [1e-3, 1e-2]}) == EXIT_CONFIG

    def test_solver_budget(self, tmp_path, capsys):
        assert _run(tmp_path, "solve", {"solver": {"picard_max_iter": 1}}) == EXIT_SOLVER
        assert "solver error" in capsys.readouterr().err

    def test_globals_before_command(self, tmp_path):
        assert main(["--grid", "50", "--quiet", "--out", str(tmp_path), "solve"]) == EXIT_OK
        assert json.loads((tmp_path / "solution.json").read_text())["n_cells"] == 50


class TestSweep:
    def test_default_schedule(self, tmp_path):
        assert _run(tmp_path, "sweep") == EXIT_OK
        out = tmp_path / "out"
        errors = _rows(out / "errors.csv")
        assert len(errors) == 4
        l2 = [float(r["l2_error"]) for r in errors]
        assert all(a > b for a, b in zip(l2, l2[1:]))
        assert len(_rows(out / "energies.csv")) == 5
        rate = json.loads((out / "rate.json").read_text())
        assert rate["slope"] > 0
        assert rate["theoretical_gamma"] == pytest.approx(1 / 6)
        assert (out / "profile_04.csv").exists() and (out / "profile_04.json").exists()

    def test_single_eps(self, tmp_path):
        assert _run(tmp_path, "sweep", {"eps_schedule": [1e-2], "grid": 100}) == EXIT_OK
        assert _rows(tmp_path / "out" / "errors.csv") == []

    def test_profile_csv_round_trip(self, tmp_path):
        assert _run(tmp_path, "sweep", {"eps_schedule": [1e-1, 1e-2], "grid": 64}) == EXIT_OK
        u = DiscreteFunction.from_csv(tmp_path / "out" / "profile_01.csv")
        assert u.grid.n_cells == 64
        text = (tmp_path / "out" / "profile_01.csv").read_text()
        assert u.to_csv() == text

    def test_energy_command(self, tmp_path):
        assert _run(tmp_path, "energy", {"grid": 100}) == EXIT_OK
        gaps = [float(r["gap"]) for r in _rows(tmp_path / "out" / "energies.csv")][:-1]
        assert all(a > b for a, b in zip(gaps, gaps[1:]))


class TestOtherCommands:
    def test_exponents(self, tmp_path):
        assert _run(tmp_path, "exponents") == EXIT_OK
        rep = json.loads((tmp_path / "out" / "exponents.json").read_text())
        assert rep["mu1"] == pytest.approx(2 / 3.5, abs=1e-9)
        assert rep["blow_up"] is True and rep["mu2"] is None
        assert rep["gamma_rate"] == pytest.approx(1 / 6, abs=1e-12)

    def test_rate_from_points(self, tmp_path):
        pts = [[1e-1, 0.0152], [1e-2, 0.0098], [1e-3, 0.0062], [1e-4, 0.0039], [1e-5, 0.0025]]
        assert _run(tmp_path, "rate", {"rate_points": pts}) == EXIT_OK
        fit = json.loads((tmp_path / "out" / "rate.json").read_text())
        assert fit["slope"] == pytest.approx(0.196, abs=0.005)
        assert len(_rows(tmp_path / "out" / "rate.csv")) == 1

    def test_rate_single_point(self, tmp_path):
        assert _run(tmp_path, "rate", {"rate_points": [[1e-1, 0.1]]}) == EXIT_CONFIG

    def test_rate_from_sweep_table(self, tmp_path):
        assert _run(tmp_path, "sweep", {"grid": 100}) == EXIT_OK
        assert _run(tmp_path, "rate") == EXIT_OK

    def test_bounds(self, tmp_path):
        assert _run(tmp_path, "bounds", {"boundary": {"side": "right", "window": 0.05}}) == EXIT_OK
        rep = json.loads((tmp_path / "out" / "boundary.json").read_text())
        assert rep["side"] == "right" and rep["linear_slope"] > 0
        assert rep["mu1"] == pytest.approx(2 / 3.5)

    def test_compare(self, tmp_path):
        cfg = {"eps": 1e-2, "grid": 100, "problem": {"lambda": 0.05},
               "compare": {"problem": {"lambda": 0.1}}}
        assert _run(tmp_path, "compare", cfg) == EXIT_OK
        assert json.loads((tmp_path / "out" / "compare.json").read_text())["holds"] is True

    def test_compare_unordered(self, tmp_path):
        cfg = {"eps": 1e-2, "grid": 100, "compare": {"problem": {"lambda": 0.05}}}
        assert _run(tmp_path, "compare", cfg) == EXIT_CONFIG


class TestVerify:
    def test_default_passes(self, tmp_path, capsys):
        assert _run(tmp_path, "verify") == EXIT_OK
        report = json.loads((tmp_path / "out" / "verify.json").read_text())
        assert report["passed"] is True
        names = [c["name"] for c in report["checks"]]
        assert names == ["comparison", "epsilon_monotonicity", "stability", "symmetry",
                         "manufactured_solution", "renormalized_residual"]
        for check in report["checks"]:
            assert set(check) == {"name", "passed", "metric", "detail", "status"}
        assert "overall" in capsys.readouterr().out

    def test_swapped_lambdas(self, tmp_path):
        cfg = {"grid": 100, "verify": {"swap_comparison_lambdas": True}}
        assert _run(tmp_path, "verify", cfg) == EXIT_PROPERTY
        report = json.loads((tmp_path / "out" / "verify.json").read_text())
        assert report["passed"] is False
        bad = [c for c in report["checks"] if not c["passed"]]
        assert [c["name"] for c in bad] == ["comparison"]
        assert np.isnan(bad[0]["metric"])
