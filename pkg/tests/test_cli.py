import csv
import io
import json
import math
from pathlib import Path

import pytest

import fsocap.cli as cli
from fsocap.config import ParseError, build_scenario, load_scenario, parse_text
from fsocap.errors import ComputationError, ConfigurationError

ROOT = Path(__file__).resolve().parent.parent
SCENARIOS = sorted((ROOT / "scenarios").glob("*.conf"))

SMALL = """\
# small i.i.d. sweep
name = small
M = 2
N = 2
methods = closed_form, quadrature, high_snr, monte_carlo, awgn   # all of them

[sweep]
axis = rho_db
start = 0
stop = 20
steps = 3

[mc]
samples = 20000
seed = 5
"""


def write(tmp_path, text, name="s.conf"):
    p = tmp_path / name
    p.write_text(text)
    return p


def read_csv(text):
    meta = [l for l in text.splitlines() if l.startswith("#")]
    body = [l for l in text.splitlines() if not l.startswith("#")]
    return meta, list(csv.DictReader(io.StringIO("\n".join(body))))


# ---------------------------------------------------------------- grammar


def test_parse_comments_sections_and_lists():
    values, lines = parse_text(SMALL)
    assert values["M"] == 2 and values["name"] == "small"
    assert values["sweep.steps"] == 3 and lines["sweep.steps"] == 11
    assert values["methods"] == ("closed_form", "quadrature", "high_snr", "monte_carlo", "awgn")
    assert values["mc.samples"] == 20000


@pytest.mark.parametrize(
    "text,line,match",
    [
        ("M = 2\nN = 2\nM = 3\n", 3, "duplicate"),
        ("M = 2\nbogus = 1\n", 2, "unknown key"),
        ("M = 2\n[sweep]\nsteps = three\n", 3, "bad value"),
        ("M = 2\nN 2\n", 2, "key = value"),
        ("M = 2.5\n", 1, "bad value"),
        ("M =\n", 1, "missing value"),
        ("[inid]\nomega = 1, x\n", 2, "bad value"),
    ],
)
def test_parse_errors_carry_line_numbers(text, line, match):
    with pytest.raises(ParseError, match=match) as info:
        parse_text(text)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_missing_required_key():
    values, lines = parse_text("M = 2\n[sweep]\nstart = 0\nstop = 1\nsteps = 2\n")
    with pytest.raises(ParseError, match="'N'"):
        build_scenario(values, lines)


@pytest.mark.parametrize(
    "extra,match",
    [
        ("mode = magic\n", "mode"),
        ("methods = closed_form, telepathy\n", "unknown method"),
        ("mode = inid\n", "exactly one"),
        ("mode = inid\n[inid]\nomega = 1, 2\n", "4 entries"),
        ("tolerance = 0\n", "tolerance"),
        ("[mc]\nsamples = 1\n", "samples"),
        ("[link]\ndistance = -4\n", "positive"),
    ],
)
def test_semantic_errors(extra, match):
    text = "M = 2\nN = 2\n" + extra + "[sweep]\nstart = 0\nstop = 10\nsteps = 2\n"
    values, lines = parse_text(text)
    with pytest.raises(ConfigurationError, match=match):
        build_scenario(values, lines)


def test_non_snr_sweep_needs_snr_value():
    values, lines = parse_text("M = 1\nN = 2\n[sweep]\naxis = D\nstart = 0.01\nstop = 0.02\nsteps = 2\n")
    with pytest.raises(ParseError, match="snr.value"):
        build_scenario(values, lines)


def test_degenerate_sweep_gives_identical_rows(tmp_path):
    text = "M = 1\nN = 2\nmethods = closed_form, awgn\n[sweep]\nstart = 7\nstop = 7\nsteps = 2\n"
    table = cli.run_scenario(write(tmp_path, text))
    rows = [r for r in table.rows if r.method == "closed_form"]
    assert len(rows) == 2 and rows[0] == rows[1]


def test_log_sweep_endpoints(tmp_path):
    text = "M = 1\nN = 1\n[sweep]\naxis = cn2\nscale = log\nstart = 1e-15\nstop = 1e-13\nsteps = 3\n[snr]\nvalue = 10\n"
    sc = load_scenario(write(tmp_path, text))
    assert sc.sweep_values == pytest.approx((1e-15, 1e-14, 1e-13), rel=1e-12)


def test_overrides_replace_file_values(tmp_path):
    sc = load_scenario(write(tmp_path, SMALL), {"mc.seed": 9, "mc.samples": None})
    assert sc.mc.seed == 9 and sc.mc.samples == 20000


def test_digest_tracks_content(tmp_path):
    a = load_scenario(write(tmp_path, SMALL, "a.conf"))
    b = load_scenario(write(tmp_path, "\n# reordered comment\n" + SMALL, "b.conf"))
    c = load_scenario(write(tmp_path, SMALL.replace("seed = 5", "seed = 6"), "c.conf"))
    d = load_scenario(write(tmp_path, SMALL + "workers = 3\nbatch = 65536\n", "d.conf"))
    assert a.digest == b.digest == d.digest != c.digest


@pytest.mark.parametrize("path", SCENARIOS, ids=lambda p: p.stem)
def test_shipped_scenarios_parse(path):
    sc = load_scenario(path)
    assert sc.L >= 1 and len(sc.sweep_values) >= 2


# ---------------------------------------------------------------- run output


def test_run_rows_and_csv_layout(tmp_path):
    out = tmp_path / "o.csv"
    assert cli.main(["run", str(write(tmp_path, SMALL)), "--out", str(out)]) == 0
    text = out.read_text()
    meta, rows = read_csv(text)
    assert meta[0] == f"# fsocap {cli.__version__}"
    assert text.splitlines()[2] == ",".join(cli.CSV_COLUMNS)
    methods = [r["method"] for r in rows]
    assert methods == ["closed_form", "quadrature", "high_snr", "monte_carlo", "awgn"] * 3
    assert [float(r["sweep_value"]) for r in rows[::5]] == [0.0, 10.0, 20.0]
    assert all(r["status"] == "ok" for r in rows)


def test_run_metadata(tmp_path):
    table = cli.run_scenario(write(tmp_path, SMALL))
    md = table.metadata
    assert md["config_digest"] == load_scenario(tmp_path / "s.conf").digest
    assert md["mc"] == {"samples": 20000, "seed": 5}
    assert md["audit"]["passed"] and md["audit"]["discrepancy"] < 1e-9
    pt = md["points"][0]
    assert {"scintillation_index", "gamma_bar_db", "fit"} <= set(pt)
    assert pt["fit"]["alpha"] > 0


def test_rerun_is_byte_identical(tmp_path):
    cfg = str(write(tmp_path, SMALL))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(["run", cfg, "--out", str(a)]) == 0
    assert cli.main(["run", cfg, "--out", str(b), "--workers", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_json_output(tmp_path):
    out = tmp_path / "o.json"
    assert cli.main(["run", str(write(tmp_path, SMALL)), "--format", "json", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert len(doc["rows"]) == 15 and doc["metadata"]["scenario"] == "small"


def test_seed_override_changes_only_monte_carlo(tmp_path):
    cfg = write(tmp_path, SMALL)
    a = cli.run_scenario(cfg)
    b = cli.run_scenario(cfg, {"mc.seed": 77})
    for x, y in zip(a.rows, b.rows):
        if x.method == "monte_carlo":
            assert x.capacity_bits != y.capacity_bits
        else:
            assert x == y


def test_inid_run_reports_weights(tmp_path):
    text = "M = 2\nN = 2\nmode = inid\nmethods = closed_form, quadrature\n[inid]\nbeta = 2\n"
    text += "[sweep]\nstart = 0\nstop = 30\nsteps = 3\n"
    table = cli.run_scenario(write(tmp_path, text))
    assert table.exit_code() == 0
    w = table.metadata["points"][0]["weights"]
    assert w["status"] == "ok" and len(w["m"]) == 4


# ---------------------------------------------------------------- exit codes


def test_exit_code_config_error(tmp_path, capsys):
    assert cli.main(["run", str(write(tmp_path, "M = 2\nwhat = 1\n"))]) == 2
    assert "line 2" in capsys.readouterr().err
    assert cli.main(["run", str(tmp_path / "missing.conf")]) == 2


def test_exit_code_numeric_failure(tmp_path, monkeypatch, capsys):
    real = cli._evaluate

    def flaky(method, model, tol, cfg):
        if method == "high_snr":
            raise ComputationError("forced failure")
        return real(method, model, tol, cfg)

    monkeypatch.setattr(cli, "_evaluate", flaky)
    out = tmp_path / "o.csv"
    assert cli.main(["run", str(write(tmp_path, SMALL)), "--out", str(out)]) == 3
    _, rows = read_csv(out.read_text())
    bad = [r for r in rows if r["method"] == "high_snr"]
    assert all(r["capacity_bits"] == "nan" and r["status"].startswith("error: ComputationError") for r in bad)
    assert all(r["status"] == "ok" for r in rows if r["method"] != "high_snr")
    assert "forced failure" in capsys.readouterr().err


def test_exit_code_audit_failure(tmp_path, capsys):
    # coincident Omega/m pairs make the mixture weights meaningless in double precision
    text = "M = 2\nN = 2\nmode = inid\nmethods = closed_form, awgn\n[inid]\nomega = 1, 1, 2, 2\n"
    text += "[sweep]\nstart = 0\nstop = 20\nsteps = 3\n"
    assert cli.main(["run", str(write(tmp_path, text)), "--out", str(tmp_path / "o.csv")]) == 4
    assert "self-audit failed" in capsys.readouterr().err


def test_table1_refuses_without_samples(capsys):
    assert cli.main(["table1", "--samples", "0"]) == 2
    with pytest.raises(ConfigurationError):
        cli.table1_report(samples=1)


# ---------------------------------------------------------------- other subcommands


def test_fit_subcommand(tmp_path):
    out = tmp_path / "fit.json"
    assert cli.main(["fit", "--config", str(write(tmp_path, SMALL)), "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert len(doc["points"]) == 3
    fit = doc["points"][0]["fit"]
    assert fit["alpha"] == pytest.approx(0.383, abs=1e-3)


def test_mc_subcommand(tmp_path):
    out = tmp_path / "mc.csv"
    assert cli.main(["mc", str(write(tmp_path, SMALL)), "--out", str(out), "--samples", "5000"]) == 0
    meta, rows = read_csv(out.read_text())
    assert {r["method"] for r in rows} == {"monte_carlo"}
    assert '"samples":5000' in meta[1]


def test_fmt():
    assert cli.fmt(True) == "true" and cli.fmt(3) == "3" and cli.fmt(math.nan) == "nan"
    assert cli.fmt(0.1) == "1.000000000000e-01"
