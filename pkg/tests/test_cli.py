import csv
import json
import math

import pytest

from doublesine.cli import main


def run(tmp_path, *argv):
    code = main([*argv, "--out-dir", str(tmp_path)])
    return code


def load_json(tmp_path, name):
    with open(tmp_path / name, "r", encoding="utf-8") as fh:
        return json.load(fh)


def load_csv(tmp_path, name):
    with open(tmp_path / name, newline="", encoding="utf-8") as fh:
        return list(csv.reader(fh))


class TestPayloadShape:
    def test_schema_and_config_recorded(self, tmp_path):
        assert run(tmp_path, "check-class", "--preset", "oscillating_quadratic",
                   "--grid", "dyadic:8") == 0
        payload = load_json(tmp_path, "check-class.json")
        assert payload["schema_version"] == 1
        assert payload["command"] == "check-class"
        assert payload["pass"] is True
        assert payload["config"]["sequences"]["preset"] == "oscillating_quadratic"
        assert payload["config"]["membership"]["r"] == 2  # default recorded
        assert payload["config"]["cli"]["seed"] == 0

    def test_custom_filenames(self, tmp_path):
        run(tmp_path, "condition-22", "--preset", "zero", "--s-max", "16",
            "--json", "a.json", "--csv", "b.csv")
        assert (tmp_path / "a.json").exists()
        assert (tmp_path / "b.csv").exists()


class TestExitCodes:
    def test_pass_is_zero(self, tmp_path):
        assert run(tmp_path, "partial-sum", "--preset", "zero",
                   "--rect", "1:10x1:10", "--x", "1.0", "--y", "1.0") == 0
        payload = load_json(tmp_path, "partial-sum.json")
        assert payload["results"]["values"]["direct"] == 0.0

    def test_verdict_failure_is_one(self, tmp_path, capsys):
        code = run(tmp_path, "check-class", "--preset", "oscillating_quadratic",
                   "--r", "1", "--grid", "dyadic:64", "--max-row-c", "4")
        assert code == 1
        out = capsys.readouterr().out
        assert "FAIL" in out and "witness" in out

    def test_config_error_is_two(self, tmp_path, capsys):
        assert run(tmp_path, "check-class", "--preset", "unknown_thing") == 2
        assert "config error" in capsys.readouterr().err

    def test_bad_rect_is_two(self, tmp_path):
        assert run(tmp_path, "partial-sum", "--preset", "zero",
                   "--rect", "nope", "--x", "1.0", "--y", "1.0") == 2

    def test_singular_abscissa_is_two(self, tmp_path):
        assert run(tmp_path, "partial-sum", "--preset", "oscillating_quadratic",
                   "--rect", "1:4x1:4", "--x", str(math.pi / 2), "--y", "1.0",
                   "--r", "4") == 2

    def test_eta_cap_failure_is_one(self, tmp_path):
        code = run(tmp_path, "eta", "--preset", "product_power(1,1)",
                   "--epsilon", "0.2", "--c-const", "4", "--cap", "64",
                   "--grid-points", "3", "--rect-cap", "64", "--doublings", "2")
        assert code == 1
        payload = load_json(tmp_path, "eta.json")
        assert payload["results"]["eta"] is None


class TestConfigFile:
    def test_config_supplies_defaults_flags_override(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("[sequences]\npreset = oscillating_quadratic\n"
                       "[membership]\nr = 2\ngrid = dyadic:8\n")
        assert run(tmp_path, "check-class", "--config", str(cfg)) == 0
        p1 = load_json(tmp_path, "check-class.json")
        assert p1["config"]["membership"]["r"] == 2

        assert run(tmp_path, "check-class", "--config", str(cfg), "--r", "3") == 0
        p2 = load_json(tmp_path, "check-class.json")
        assert p2["config"]["membership"]["r"] == 3

    def test_unknown_config_key_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("[membership]\nnot_a_flag = 1\n")
        assert run(tmp_path, "check-class", "--preset", "zero",
                   "--config", str(cfg)) == 2
        assert "not_a_flag" in capsys.readouterr().err

    def test_wrong_section_rejected(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("[cli]\nr = 2\n")  # r belongs to [membership]
        assert run(tmp_path, "check-class", "--preset", "zero",
                   "--config", str(cfg)) == 2


class TestSequenceSources:
    def test_expression(self, tmp_path):
        assert run(tmp_path, "partial-sum", "--expr", "1/(j^2*k^2)",
                   "--rect", "1:4x1:4", "--x", "0.9", "--y", "1.2") == 0

    def test_sequence_file(self, tmp_path):
        seqs = tmp_path / "seqs.txt"
        seqs.write_text("mine = 1/(j^2*k^2)\nother = 1/(j*k)\n")
        assert run(tmp_path, "partial-sum", "--seq-file", str(seqs),
                   "--seq-name", "mine", "--rect", "1:4x1:4",
                   "--x", "0.9", "--y", "1.2") == 0
        payload = load_json(tmp_path, "partial-sum.json")
        assert payload["results"]["sequence"] == "mine"

    def test_sequence_file_needs_name_when_ambiguous(self, tmp_path):
        seqs = tmp_path / "seqs.txt"
        seqs.write_text("a = 1/(j*k)\nb = 1/(j*k)\n")
        assert run(tmp_path, "partial-sum", "--seq-file", str(seqs),
                   "--rect", "1:4x1:4", "--x", "0.9", "--y", "1.2") == 2

    def test_two_sources_rejected(self, tmp_path):
        assert run(tmp_path, "partial-sum", "--preset", "zero",
                   "--expr", "1/(j*k)", "--rect", "1:4x1:4",
                   "--x", "0.9", "--y", "1.2") == 2

    def test_preset_with_inline_exponents(self, tmp_path):
        assert run(tmp_path, "check-class", "--preset", "product_power(2,2)",
                   "--grid", "dyadic:8") == 0

    def test_single_class_mode(self, tmp_path):
        assert run(tmp_path, "check-class", "--preset", "oscillating_quadratic",
                   "--single-class", "mvbvs", "--grid", "4,8,16") == 0
        rows = load_csv(tmp_path, "check-class.csv")
        assert rows[0] == ["n", "lhs", "rhs", "ratio", "truncated"]


class TestCsvShapes:
    def test_tail_report_columns(self, tmp_path):
        run(tmp_path, "condition-22", "--preset", "oscillating_quadratic",
            "--s-max", "64")
        rows = load_csv(tmp_path, "condition-22.csv")
        assert rows[0] == ["scale", "value", "bounded_flag"]
        assert rows[1][0] == "4"

    def test_probe_trace_columns(self, tmp_path):
        run(tmp_path, "uniform-tail", "--preset", "oscillating_quadratic",
            "--grid-points", "3", "--thresholds", "8,16", "--rect-cap", "64",
            "--doublings", "2")
        rows = load_csv(tmp_path, "uniform-tail.csv")
        assert rows[0] == ["m0", "x", "y", "m", "M", "n", "N", "abs_sum"]
        assert len(rows) == 1 + 2 * 9  # header + thresholds x grid points

    def test_lemma2_series_are_concatenated(self, tmp_path):
        run(tmp_path, "lemma", "--preset", "oscillating_quadratic",
            "--which", "2", "--schedule", "4,8")
        rows = load_csv(tmp_path, "lemma.csv")
        assert rows[0] == ["scale", "value", "bounded_flag"]
        assert [r[0] for r in rows[1:]] == ["4", "8", "4", "8"]


class TestDeterminism:
    def test_reruns_are_byte_identical(self, tmp_path):
        args = ("uniform-tail", "--preset", "oscillating_quadratic",
                "--grid-points", "3", "--thresholds", "8,16",
                "--rect-cap", "64", "--doublings", "2")
        run(tmp_path, *args)
        first = ((tmp_path / "uniform-tail.json").read_bytes(),
                 (tmp_path / "uniform-tail.csv").read_bytes())
        run(tmp_path, *args)
        second = ((tmp_path / "uniform-tail.json").read_bytes(),
                  (tmp_path / "uniform-tail.csv").read_bytes())
        assert first == second

    def test_seeded_identity_checks_reproduce(self, tmp_path):
        args = ("verify-identities", "--cases-1d", "20", "--cases-2d", "5",
                "--delta-grid", "20", "--kernel-points", "50", "--k-max", "16")
        run(tmp_path, *args)
        first = (tmp_path / "verify-identities.json").read_bytes()
        run(tmp_path, *args)
        assert (tmp_path / "verify-identities.json").read_bytes() == first


class TestVerifyIdentities:
    def test_small_run_passes(self, tmp_path):
        assert run(tmp_path, "verify-identities", "--cases-1d", "30",
                   "--cases-2d", "5", "--delta-grid", "30",
                   "--kernel-points", "100", "--k-max", "32") == 0
        payload = load_json(tmp_path, "verify-identities.json")
        checks = payload["results"]["checks"]
        assert set(checks) == {"row_sum_by_parts", "rect_sum_by_parts",
                               "difference_decompositions", "kernel_envelope",
                               "sine_parity"}
        assert all(stats["failures"] == 0 for stats in checks.values())


class TestLemmaAndRemark2:
    def test_lemma1_decays(self, tmp_path):
        assert run(tmp_path, "lemma", "--preset", "oscillating_quadratic",
                   "--which", "1", "--expect", "decaying") == 0

    def test_lemma3_slack(self, tmp_path):
        assert run(tmp_path, "lemma", "--preset", "oscillating_quadratic",
                   "--which", "3", "--grid", "dyadic:16", "--c-const", "4") == 0
        payload = load_json(tmp_path, "lemma.json")
        assert payload["results"]["min_slack"] >= 0.0

    def test_remark2(self, tmp_path):
        assert run(tmp_path, "remark2", "--schedule", "10,100") == 0
        payload = load_json(tmp_path, "remark2.json")
        assert payload["results"]["verdict"] == "growing"
        assert len(payload["results"]["cross_checks"]) == 2


class TestRequiredFlagsViaConfig:
    def test_config_satisfies_required_flags(self, tmp_path):
        cfg = tmp_path / "psum.cfg"
        cfg.write_text("[sequences]\npreset = oscillating_quadratic\n"
                       "[kernels_summation]\nrect = 1:8x1:8\nx = 1.0\ny = 1.0\n")
        assert run(tmp_path, "partial-sum", "--config", str(cfg)) == 0

    def test_missing_required_flag_is_two(self, tmp_path, capsys):
        assert run(tmp_path, "partial-sum", "--preset", "zero",
                   "--x", "1.0", "--y", "1.0") == 2
        assert "--rect" in capsys.readouterr().err

    def test_missing_which_is_two(self, tmp_path, capsys):
        assert run(tmp_path, "lemma", "--preset", "zero") == 2
        assert "--which" in capsys.readouterr().err

    def test_missing_eta_epsilon_is_two(self, tmp_path, capsys):
        assert run(tmp_path, "eta", "--preset", "zero", "--c-const", "4") == 2
        assert "--epsilon" in capsys.readouterr().err


class TestTruncatedScanSemantics:
    def test_truncated_scan_still_certifies_cap(self, tmp_path):
        # Past m ~ 1024 the conservative tail certificate exceeds the
        # scanned sup, so scans are flagged; the fitted constant is an
        # upper estimate, which keeps the <=-assertion sound.
        assert run(tmp_path, "check-class", "--preset", "oscillating_quadratic",
                   "--r", "2", "--grid", "dyadic:4096", "--max-row-c", "4",
                   "--max-double-c", "16") == 0
        payload = load_json(tmp_path, "check-class.json")
        assert payload["results"]["truncated"] is True
        assert payload["results"]["fitted_C_row"] <= 4.0
