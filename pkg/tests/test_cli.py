import csv
import io

import pytest

from conftest import BASE_CONFIG
from relaxjunction.cli import CONVERGE_HEADER, CSV_HEADER, main

NONIDENTICAL = BASE_CONFIG.replace("gamma = 0.05\n\n[fermi]", "gamma = 0.07\n\n[fermi]")
SWEEP = BASE_CONFIG + "[run]\nsweep_parameter = gamma\nsweep_values = 1e-300, 0.05, 0.1\n"
TWO_SITE = BASE_CONFIG.replace("builder = single_site\neps0 = 0.0",
                               "builder = two_site\neps1 = 0.0\neps2 = 0.0\nh12 = 0.5")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def table(text):
    body = [l for l in text.splitlines() if not l.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


class TestCurrent:
    def test_all_methods(self, capsys, write_config):
        code, out, err = run(capsys, "current", "--config", write_config(BASE_CONFIG))
        assert code == 0 and err == ""
        assert out.startswith("# mode = current\n")
        assert CSV_HEADER in out.splitlines()
        rows = {r["method"]: r for r in table(out)}
        assert set(rows) == {"trace_integral", "compact_integral", "pole_sum", "large_gamma",
                             "small_gamma", "nonmarkovian", "landauer_semiinfinite",
                             "oracle_sylvester"}
        ref = float(rows["oracle_sylvester"]["current"])
        for m in ("trace_integral", "compact_integral", "pole_sum"):
            assert float(rows[m]["current"]) == pytest.approx(ref, rel=1e-8)
        assert rows["pole_sum"]["diag_panels"] == ""
        assert float(rows["trace_integral"]["diag_panels"]) > 0

    def test_echo_is_reparseable(self, capsys, write_config):
        from relaxjunction.config import parse_config

        _, out, _ = run(capsys, "current", "--config", write_config(BASE_CONFIG))
        echoed = "\n".join(l[2:] for l in out.splitlines()[1:] if l.startswith("# "))
        assert parse_config(echoed).get("lead_L", "N") == 32

    def test_out_file_and_correlations(self, capsys, write_config, tmp_path):
        out_path, corr = tmp_path / "o.csv", tmp_path / "c.csv"
        code, out, _ = run(capsys, "current", "--config", write_config(BASE_CONFIG),
                           "--out", str(out_path), "--dump-correlations", str(corr))
        assert code == 0 and out == ""
        assert len(table(out_path.read_text())) == 8
        assert corr.read_text().startswith("row,col,re,im\n")
        assert len(corr.read_text().splitlines()) == 1 + 65 * 65

    def test_pole_sum_non_identical(self, capsys, write_config):
        text = NONIDENTICAL + "[run]\nmethods = pole_sum\n"
        code, out, err = run(capsys, "current", "--config", write_config(text))
        assert code == 1
        assert err.startswith("ERROR usage: identical reservoirs required")
        assert table(out)[0]["current"] == ""

    def test_non_identical_all_skips_identical_methods(self, capsys, write_config):
        code, out, _ = run(capsys, "current", "--config", write_config(NONIDENTICAL))
        assert code == 0
        methods = [r["method"] for r in table(out)]
        assert "pole_sum" not in methods and "trace_integral" in methods

    def test_zero_bias(self, capsys, write_config):
        text = BASE_CONFIG.replace("mu_R = -0.25", "mu_R = 0.25")
        code, out, _ = run(capsys, "current", "--config", write_config(text))
        assert code == 0
        for r in table(out):
            assert abs(float(r["current"])) <= 1e-12

    def test_accuracy_failure(self, capsys, write_config):
        text = BASE_CONFIG.replace("gamma = 0.05", "gamma = 1e-300") + \
            "[run]\nmethods = trace_integral, pole_sum\n"
        code, out, err = run(capsys, "current", "--config", write_config(text))
        assert code == 2
        assert err.startswith("ERROR accuracy:")
        rows = table(out)
        assert rows[0]["error"].startswith("accuracy:") and rows[1]["current"] != ""

    def test_usage_beats_numeric(self, capsys, write_config):
        text = NONIDENTICAL.replace("gamma = 0.05", "gamma = 1e-300") + \
            "[run]\nmethods = trace_integral, pole_sum\n"
        code, _, _ = run(capsys, "current", "--config", write_config(text))
        assert code == 1

    def test_two_site(self, capsys, write_config):
        code, out, _ = run(capsys, "current", "--config", write_config(TWO_SITE))
        assert code == 0 and len(table(out)) == 8

    def test_raw_leads(self, capsys, write_config):
        text = BASE_CONFIG.replace("N = 32\nt_hop = 1.0\nv0 = 0.2\ngamma = 0.05",
                                   "omegas = -0.5, 0.5\ngammas = 0.1, 0.1\ncouplings = 0.2, 0.2")
        code, out, _ = run(capsys, "current", "--config", write_config(text))
        assert code == 0
        assert "landauer_semiinfinite" not in [r["method"] for r in table(out)]


class TestUsageErrors:
    def test_unknown_key(self, capsys, write_config):
        text = BASE_CONFIG.replace("eps0 = 0.0", "eps0 = 0.0\nbogus = 1")
        code, _, err = run(capsys, "current", "--config", write_config(text))
        assert code == 1 and err.startswith("ERROR parse: line 4:")

    def test_negative_gamma(self, capsys, write_config):
        text = BASE_CONFIG.replace("gamma = 0.05", "gamma = -0.05", 1)
        code, _, err = run(capsys, "current", "--config", write_config(text))
        assert code == 1 and "'gamma'" in err

    def test_two_modes(self, capsys, write_config):
        text = BASE_CONFIG + "[run]\nmethods = pole_sum\nconverge_N = 8\n"
        code, _, err = run(capsys, "current", "--config", write_config(text))
        assert code == 1 and err.startswith("ERROR usage:")

    def test_missing_file(self, capsys, tmp_path):
        code, _, err = run(capsys, "current", "--config", str(tmp_path / "none.ini"))
        assert code == 1 and err.startswith("ERROR usage:")

    def test_bad_arguments(self, capsys, write_config):
        assert run(capsys, "frobnicate")[0] == 1
        assert run(capsys, "current")[0] == 1
        assert run(capsys, "sweep", "--config", write_config(SWEEP), "--jobs", "0")[0] == 1

    def test_help(self, capsys):
        code, out, _ = run(capsys, "--help")
        assert code == 0 and "mu_L" in out


class TestValidate:
    def test_pass(self, capsys, write_config):
        code, out, _ = run(capsys, "validate", "--config", write_config(BASE_CONFIG),
                           "--seed", "3")
        assert code == 0
        rows = table(out)
        assert {r["status"] for r in rows} <= {"pass", "skipped (precondition)"}
        assert {r["junction"] for r in rows} == {"config", "random0", "random1", "random2",
                                                 "random3"}

    def test_skip_for_non_identical(self, capsys, write_config):
        code, out, _ = run(capsys, "validate", "--config", write_config(NONIDENTICAL))
        assert code == 0
        row = [r for r in table(out) if r["check"] == "identical_reservoir_identity"][0]
        assert row["status"] == "skipped (precondition)"

    def test_corrupt_hermiticity(self, capsys, write_config):
        code, _, err = run(capsys, "validate", "--config", write_config(BASE_CONFIG),
                           "--corrupt-hermiticity")
        assert code == 3
        assert "full_hamiltonian_hermitian" in err and err.startswith("ERROR validation:")


class TestSweep:
    def test_isolated_failure(self, capsys, write_config):
        code, out, err = run(capsys, "sweep", "--config", write_config(SWEEP))
        assert code == 2
        rows = table(out)
        bad = [r for r in rows if r["param_value"] == "1e-300"]
        good = [r for r in rows if r["param_value"] != "1e-300"]
        assert any(r["error"] for r in bad)
        assert all(r["error"] == "" and r["current"] != "" for r in good)
        assert [r["param_value"] for r in rows][::7] == ["1e-300", "0.05", "0.1"]

    def test_clean_sweep(self, capsys, write_config):
        text = BASE_CONFIG + "[run]\nsweep_parameter = bias\nsweep_values = 0.1, 0.3\n" \
            "sweep_methods = pole_sum, landauer_semiinfinite\n"
        code, out, _ = run(capsys, "sweep", "--config", write_config(text))
        assert code == 0
        rows = table(out)
        assert [(r["param_name"], r["method"]) for r in rows] == [
            ("bias", "pole_sum"), ("bias", "landauer_semiinfinite")] * 2

    def test_needs_chain_leads(self, capsys, write_config):
        text = SWEEP.replace("N = 32\nt_hop = 1.0\nv0 = 0.2\ngamma = 0.05",
                             "omegas = -0.5, 0.5\ngammas = 0.1, 0.1\ncouplings = 0.2, 0.2")
        assert run(capsys, "sweep", "--config", write_config(text))[0] == 1

    def test_non_monotone(self, capsys, write_config):
        text = SWEEP.replace("1e-300, 0.05, 0.1", "0.1, 0.05, 0.2")
        code, _, err = run(capsys, "sweep", "--config", write_config(text))
        assert code == 1 and "monotone" in err


class TestConverge:
    def test_table(self, capsys, write_config):
        text = BASE_CONFIG + "[run]\nconverge_N = 16, 32, 64\n"
        code, out, _ = run(capsys, "converge", "--config", write_config(text))
        assert code == 0
        assert CONVERGE_HEADER in out.splitlines()
        rows = table(out)
        assert [r["N"] for r in rows] == ["16", "32", "64"]
        assert float(rows[0]["gamma"]) == 0.5


class TestDeterminism:
    def test_bit_identical(self, capsys, write_config):
        text = BASE_CONFIG + "[run]\nsweep_parameter = gamma\nsweep_values = 0.02, 0.05, 0.1, 0.2\n"
        path = write_config(text)
        outs = [run(capsys, "sweep", "--config", path, "--jobs", j)[1] for j in ("1", "1", "3")]
        assert outs[0] == outs[1] == outs[2]

    def test_floats_round_trip(self, capsys, write_config):
        _, out, _ = run(capsys, "current", "--config", write_config(BASE_CONFIG))
        for r in table(out):
            assert repr(float(r["current"])) == r["current"]


class TestTolerancePrecedence:
    def test_flag_config_env(self, capsys, write_config, monkeypatch):
        monkeypatch.setenv("RJ_DEFAULT_TOL", "1e-6")
        plain = write_config(BASE_CONFIG, "a.ini")
        with_cfg = write_config(BASE_CONFIG + "[quadrature]\nrel_tol = 1e-7\n", "b.ini")
        assert "# rel_tol = 1e-06" in run(capsys, "current", "--config", plain)[1]
        assert "# rel_tol = 1e-07" in run(capsys, "current", "--config", with_cfg)[1]
        out = run(capsys, "current", "--config", with_cfg, "--rel-tol", "1e-9")[1]
        assert "# rel_tol = 1e-09" in out
