"""Configuration parsing, CSV output and the command line."""
import csv
import io

import pytest

from rcfd.cli import EXIT_CONFIG, EXIT_OK, main
from rcfd.config import ExperimentConfig, parse_config
from rcfd.errors import CapacityExceeded, ConfigError, DuplicateKey
from rcfd.sweeps import CURVE_COLUMNS, RUN_COLUMNS, TABLE_COLUMNS, data_rows


def read_csv(path):
    text = path.read_text()
    meta = [ln for ln in text.splitlines() if ln.startswith("#")]
    rows = list(csv.DictReader(io.StringIO("\n".join(data_rows(text)))))
    return meta, rows


# -- config ---------------------------------------------------------------------------

def test_empty_config_is_default():
    assert parse_config(text="") == ExperimentConfig()
    assert parse_config(text="# only a comment\n\n") == ExperimentConfig()


def test_values_and_overrides():
    cfg = parse_config(text="payload = 500  # bytes\nprotocols = rcfd, dcf\n", overrides=["payload=700"])
    assert cfg.payload == 700 and cfg.protocols == ("rcfd", "dcf")


def test_duplicate_key():
    with pytest.raises(DuplicateKey) as e:
        parse_config(text="seed = 1\nseed = 2\n")
    assert "line 1" in e.value.violations[0]


def test_all_violations_reported():
    with pytest.raises(ConfigError) as e:
        parse_config(text="bogus = 1\nrate = fast\n")
    assert len(e.value.violations) == 2
    with pytest.raises(ConfigError) as e:
        parse_config(overrides=["payload=0", "rate=7"])
    assert len(e.value.violations) == 2


def test_capacity_exceeded():
    with pytest.raises(CapacityExceeded):
        parse_config(overrides=["mode=analytic", "n=60", "modulation_order=1"])
    # an automatic modulation order grows to fit
    assert parse_config(overrides=["mode=analytic", "n=60"]).n == (60,)


def test_items_round_trip():
    cfg = parse_config(overrides=["payload=321", "loss_p=0.2", "grid=3,4"])
    text = "\n".join(f"{k} = {v}" for k, v in cfg.items())
    assert parse_config(text=text) == cfg


# -- command line ---------------------------------------------------------------------

def test_analytic_csv(tmp_path, capsys):
    out = tmp_path / "a.csv"
    assert main(["--out", str(out), "analytic"]) == EXIT_OK
    meta, rows = read_csv(out)
    assert list(rows[0]) == TABLE_COLUMNS
    assert any(m.startswith("# command: rcfd") for m in meta)
    assert any(m == "# seed=1" for m in meta)
    eta = {(r["protocol"], r["N"]): float(r["eta"]) for r in rows}
    assert eta[("rcfd", "2")] == pytest.approx(1.8568, abs=1e-4)


def test_exit_codes(tmp_path, capsys):
    assert main(["analytic", "n=60", "modulation_order=1"]) == EXIT_CONFIG
    assert main(["analytic", "payload=0"]) == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "payload must be >= 1" in err
    with pytest.raises(SystemExit):
        main(["nonsense"])


def test_ofdm_exact_close_to_calibrated(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["--out", str(a), "analytic"])
    main(["--out", str(b), "analytic", "t_d_mode=ofdm-exact"])
    ra = {(r["protocol"], r["N"]): float(r["eta"]) for r in read_csv(a)[1]}
    rb = {(r["protocol"], r["N"]): float(r["eta"]) for r in read_csv(b)[1]}
    assert ra.keys() == rb.keys()
    for k in ra:
        assert abs(ra[k] - rb[k]) / ra[k] < 0.05


def test_short_payload_rtscts_lowest(tmp_path):
    out = tmp_path / "len.csv"
    assert main(["--out", str(out), "sweep", "throughput-vs-length"]) == EXIT_OK
    meta, rows = read_csv(out)
    assert list(rows[0]) == CURVE_COLUMNS
    at100 = {r["protocol"]: float(r["eta"]) for r in rows if r["L"] == "100"}
    assert min(at100, key=at100.get) == "dcf-rtscts"


def test_simulate_schema_and_rerun(tmp_path):
    a = tmp_path / "a.csv"
    args = ["simulate", "g=2", "sim_time=6", "ts_max=1", "n_s=2", "protocols=rcfd,dcf"]
    assert main(["--seed", "5", "--out", str(a)] + args) == EXIT_OK
    first = a.read_bytes()
    assert main(["--seed", "5", "--out", str(a)] + args) == EXIT_OK
    meta, rows = read_csv(a)
    assert list(rows[0]) == RUN_COLUMNS
    assert len(rows) == 4 and {r["protocol"] for r in rows} == {"rcfd", "dcf"}
    assert all(not r["error"] for r in rows)
    assert a.read_bytes() == first
    c = tmp_path / "c.csv"
    main(["--seed", "6", "--out", str(c)] + args)
    assert data_rows(c.read_text()) != data_rows(a.read_text())
