import io
import json
import subprocess
import sys

import jsonschema
import pytest

from bellsim import cli
from bellsim.cli import UsageError, load_schema, main, parse_args, parse_complex, run

ALL_INVOCATIONS = [
    ["bell"],
    ["bell", "--label", "4"],
    ["dense-code", "--message", "10"],
    ["dense-code", "--message", "11", "--shots", "4"],
    ["teleport", "--state", "0.6,0.8", "--seed", "7"],
    ["teleport", "--state", "1,0.5-0.5i", "--shots", "5"],
    ["teleport-mixed", "--shots", "200"],
    ["teleport-mixed", "--member", "0.5:1,1", "--member", "0.5:1,-1", "--exact"],
    ["nosignal-audit"],
    ["nosignal-audit", "--state", "0.6,0.8i", "--no-measure"],
]


def run_json(argv):
    out = io.StringIO()
    code = run(parse_args(argv + ["--format", "json"]), out)
    return code, out.getvalue()


def walk(obj, key=None):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from walk(v, k)
    elif isinstance(obj, list):
        for v in obj:
            yield from walk(v, key)
    else:
        yield key, obj


class TestParse:
    def test_teleport(self):
        cfg = parse_args(["teleport", "--state", "0.6,0.8", "--seed", "7"])
        assert cfg.subcommand == "teleport"
        assert cfg.seed == 7
        assert cfg.state == pytest.approx((0.6, 0.8))
        assert cfg.notes == []

    def test_dense(self):
        cfg = parse_args(["dense-code", "--message", "10"])
        assert cfg.message == "10"
        assert (cfg.seed, cfg.shots, cfg.format) == (0, 1, "text")

    def test_zero_state(self):
        with pytest.raises(UsageError, match="zero state"):
            parse_args(["teleport", "--state", "0,0"])

    def test_rescaling_noted(self):
        cfg = parse_args(["teleport", "--state", "3,4"])
        assert cfg.state == pytest.approx((0.6, 0.8))
        assert cfg.notes and "rescaled" in cfg.notes[0]

    def test_tiny_drift_not_noted(self):
        cfg = parse_args(["teleport", "--state", "0.6,0.8000000000001"])
        assert cfg.notes == []

    @pytest.mark.parametrize(
        "argv,flag",
        [
            (["teleport", "--bogus"], "--bogus"),
            (["teleport", "--state", "0.6,abc"], "--state"),
            (["teleport", "--state", "0.6"], "--state"),
            (["dense-code", "--message", "2"], "--message"),
            (["dense-code", "--message", "100"], "--message"),
            (["teleport", "--shots", "0"], "--shots"),
            (["teleport", "--seed", "-1"], "--seed"),
            (["teleport-mixed", "--member", "0.5:1,0"], "--member"),
            (["teleport-mixed", "--member", "x:1,0"], "--member"),
            (["teleport", "--format", "xml"], "--format"),
        ],
    )
    def test_usage_errors_name_flag(self, argv, flag):
        with pytest.raises(UsageError, match=flag):
            parse_args(argv)

    def test_unknown_subcommand(self):
        with pytest.raises(UsageError):
            parse_args(["entangle"])

    @pytest.mark.parametrize(
        "text,value",
        [("0.6", 0.6), ("0.5-0.5i", 0.5 - 0.5j), ("-i", -1j), ("0.8i", 0.8j), ("1e-1+2i", 0.1 + 2j), ("+.5", 0.5)],
    )
    def test_complex_literals(self, text, value):
        assert parse_complex(text) == value

    @pytest.mark.parametrize("text", ["", "1j", "i0.5", "0.5+", "1+2", "nan", "1,2"])
    def test_bad_complex_literals(self, text):
        with pytest.raises(ValueError):
            parse_complex(text)


class TestRun:
    def test_dense_code_text(self):
        out = io.StringIO()
        assert run(parse_args(["dense-code", "--message", "00"]), out) == 0
        assert out.getvalue().rstrip().splitlines()[-1] == "decoded: 00"

    def test_teleport_json_fidelity(self):
        code, text = run_json(["teleport", "--state", "0.6,0.8"])
        report = json.loads(text)
        assert code == 0
        assert report["fidelity"] == pytest.approx(1.0, abs=1e-12)
        assert report["correction"] in "IABC"

    def test_audit_default(self):
        code, text = run_json(["nosignal-audit"])
        audit = json.loads(text)["audit"]
        assert code == 0
        assert audit["trace_distance"] == pytest.approx(0.0, abs=1e-12)
        assert [o["purity"] for o in audit["outcomes"]] == pytest.approx([1.0] * 4, abs=1e-12)
        assert audit["purity_after"] == pytest.approx(0.5, abs=1e-12)
        assert audit["distinguishability"] == pytest.approx(0.5, abs=1e-12)

    def test_teleport_text_shows_paper_kets(self):
        out = io.StringIO()
        run(parse_args(["teleport", "--state", "1,0"]), out)
        assert "|00⟩|0⟩ + |01⟩|1⟩ + |10⟩|0⟩ + |11⟩|1⟩    ×1/2" in out.getvalue()

    @pytest.mark.parametrize("argv", ALL_INVOCATIONS, ids=lambda a: " ".join(a))
    def test_schema_and_ranges(self, argv):
        code, text = run_json(argv)
        assert code == 0
        report = json.loads(text)
        jsonschema.validate(report, load_schema())
        assert report["protocol"] == argv[0]
        for key, value in walk(report):
            if key in ("probability", "fidelity", "min_fidelity", "purity", "informed_min_fidelity"):
                assert 0.0 <= value <= 1.0
        assert "null" not in text

    @pytest.mark.parametrize("argv", ALL_INVOCATIONS, ids=lambda a: " ".join(a))
    def test_byte_identical(self, argv):
        assert run_json(argv) == run_json(argv)

    @pytest.mark.parametrize("argv", ALL_INVOCATIONS, ids=lambda a: " ".join(a))
    def test_text_mode_runs(self, argv):
        out = io.StringIO()
        assert run(parse_args(argv), out) == 0
        assert out.getvalue().startswith(f"== {argv[0]} ")

    def test_workers_match_serial(self):
        serial = run_json(["teleport-mixed", "--shots", "300", "--seed", "4"])
        parallel = run_json(["teleport-mixed", "--shots", "300", "--seed", "4", "--workers", "4"])
        assert serial == parallel

    def test_out_file(self, tmp_path):
        path = tmp_path / "report.json"
        out = io.StringIO()
        cfg = parse_args(["teleport", "--seed", "3", "--out", str(path)])
        assert run(cfg, out) == 0
        assert path.read_text(encoding="utf-8") == run_json(["teleport", "--seed", "3"])[1]

    def test_invariant_violation_exit_1(self, monkeypatch):
        def broken(cfg):
            raise cli.InvariantViolation("state norm drifted")

        monkeypatch.setitem(cli._BUILDERS, "bell", broken)
        err = io.StringIO()
        assert run(parse_args(["bell"]), io.StringIO(), err) == 1
        assert "invariant violation" in err.getvalue()

    def test_main_usage_error_exit_2(self, capsys):
        assert main(["teleport", "--state", "0,0"]) == 2
        assert "zero state" in capsys.readouterr().err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "bellsim", "dense-code", "--message", "01", "--format", "json"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["decoded"] == "01"
    bad = subprocess.run([sys.executable, "-m", "bellsim", "teleport", "--nope"], capture_output=True, text=True)
    assert bad.returncode == 2
