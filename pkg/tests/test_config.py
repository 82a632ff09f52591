import pytest

from ofdm_dcsk.config import (ExperimentConfig, UsageError, logspace, parse_scalar,
                              parse_sweep, read_config)


def test_sweep_list_and_range():
    assert parse_sweep("1, 3,12", int) == [1, 3, 12]
    assert parse_sweep("0:14:2") == [0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0]
    assert parse_sweep("0:1:0.1")[3] == 0.3
    assert parse_sweep("5:1:-2", int) == [5, 3, 1]


@pytest.mark.parametrize("text,kind", [("", float), ("1:2", float), ("1:2:0", float),
                                       ("a,b", float), ("1.5", int), ("3:1:1", float)])
def test_sweep_errors(text, kind):
    with pytest.raises(UsageError):
        parse_sweep(text, kind)


def test_scalar():
    assert parse_scalar("7", int) == 7
    with pytest.raises(UsageError):
        parse_scalar("1,2", int)


def test_logspace_endpoints():
    vals = logspace(1e-3, 1.0, 4)
    assert vals[0] == pytest.approx(1e-3) and vals[-1] == pytest.approx(1.0)


def test_read_config(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# scenario\nM = 32\nEbN0-dB=0:4:2  # sweep\n\nP = 1,2\n".replace("EbN0-dB", "ebn0-db"))
    values = read_config(path)
    assert values == {"m": "32", "ebn0_db": "0:4:2", "p": "1,2"}
    cfg = ExperimentConfig("x").with_overrides(values)
    assert cfg.m == 32 and cfg.ebn0_db == [0.0, 2.0, 4.0] and cfg.p == [1, 2]


def test_read_config_errors(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("m 32\n")
    with pytest.raises(UsageError):
        read_config(bad)
    bad.write_text("colour = red\n")
    with pytest.raises(UsageError):
        read_config(bad)
    with pytest.raises(OSError):
        read_config(tmp_path / "missing.cfg")


def test_overrides_validate_mode():
    assert ExperimentConfig("x").with_overrides({"mode": "psa"}).mode == "PSA"
    with pytest.raises(UsageError):
        ExperimentConfig("x").with_overrides({"mode": "both"})
    with pytest.raises(UsageError):
        ExperimentConfig("x").with_overrides({"colour": "red"})
