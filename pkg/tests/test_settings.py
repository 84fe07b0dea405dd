import math

import numpy as np
import pytest

from spin_sbs.core.errors import ConfigError
from spin_sbs.core.settings import (
    SCHEMA,
    ScenarioConfig,
    ScenarioMode,
    config_to_dict,
    key_of,
    parse_config,
    save_config,
)
from spin_sbs.core.spin import SpinQuantumNumber


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return str(path)


def _keys(err):
    return {k for k, _ in err.value.problems}


def test_defaults():
    cfg = parse_config()
    assert cfg == ScenarioConfig()
    assert cfg.beta_omega == 0.9
    assert cfg.unobserved_size == 5 and cfg.fraction_size == 5 and cfg.fractions == 1
    assert (cfg.coupling_low, cfg.coupling_high) == (0.0, 10.0)
    assert cfg.realizations == 100 and cfg.seed == 42
    assert cfg.j_list == tuple(SpinQuantumNumber(n) for n in range(1, 6))
    assert cfg.time_grid().size == 600


def test_schema_keys_are_unique_and_complete():
    keys = [e.key for e in SCHEMA]
    assert len(keys) == len(set(keys))
    assert set(config_to_dict(ScenarioConfig())) == set(keys)
    assert key_of("beta_omega") == "environment/beta_omega"


def test_minimal_file_uses_defaults(tmp_path):
    path = _write(tmp_path / "s.ini", "[scenario]\nmode=thermal\n\n[spin]\nj=3/2\nm=1/2\nm_prime=-1/2\n")
    cfg = parse_config(path)
    assert cfg.mode == ScenarioMode.THERMAL
    assert cfg.j == SpinQuantumNumber(3)
    assert (cfg.m, cfg.m_prime) == (0.5, -0.5)
    assert cfg.beta_omega == 0.9


def test_unknown_key_is_rejected(tmp_path):
    path = _write(tmp_path / "s.ini", "[spin]\njj=1\n")
    with pytest.raises(ConfigError) as err:
        parse_config(path)
    assert _keys(err) == {"spin/jj"}


def test_every_problem_is_reported(tmp_path):
    path = _write(tmp_path / "s.ini", "[spin]\nm=1/4\n\n[environment]\nbeta_omega=warm\n\n[layout]\nfractions=x\n")
    with pytest.raises(ConfigError) as err:
        parse_config(path)
    assert _keys(err) == {"spin/m", "environment/beta_omega", "layout/fractions"}


def test_parse_and_range_problems_are_reported_together(tmp_path):
    path = _write(tmp_path / "s.ini", "[spin]\njj=1\nm=3/2\n")
    with pytest.raises(ConfigError) as err:
        parse_config(path)
    assert _keys(err) == {"spin/jj", "spin/m"}


def test_unparsed_key_is_not_range_checked_at_its_default():
    # stop keeps its default 30 < start, but only the parse failure is reported
    with pytest.raises(ConfigError) as err:
        parse_config(overrides={"time/start": "50", "time/stop": "late", "layout/fractions": "0"})
    assert _keys(err) == {"time/stop", "layout/fractions"}
    assert len(err.value.problems) == 2


@pytest.mark.parametrize("overrides,key", [
    ({"spin/m": "3/2"}, "spin/m"),                      # not a magnetic number of j_S = 1/2
    ({"spin/m_prime": "-1/2"}, "spin/m_prime"),         # equal to m
    ({"environment/beta_omega": "-1"}, "environment/beta_omega"),
    ({"environment/g": "1e999"}, "environment/g"),
    ({"coupling/low": "5", "coupling/high": "1"}, "coupling/high"),
    ({"coupling/low": "-1"}, "coupling/low"),
    ({"coupling/kind": "normal"}, "coupling/kind"),
    ({"layout/fraction_size": "0"}, "layout/fraction_size"),
    ({"ensemble/sample_realization": "100"}, "ensemble/sample_realization"),
    ({"time/start": "5", "time/stop": "1"}, "time/stop"),
    ({"spin/theta": "4"}, "spin/theta"),
    ({"scenario/seed": "-3"}, "scenario/seed"),
    ({"scenario/format": "xml"}, "scenario/format"),
    ({"environment/tunneling": "1 1 1"}, "environment/tunneling"),
    ({"spin/j_list": ""}, "spin/j_list"),
])
def test_range_checks(overrides, key):
    with pytest.raises(ConfigError) as err:
        parse_config(overrides=overrides)
    assert key in _keys(err)


def test_missing_file():
    with pytest.raises(ConfigError):
        parse_config("/nonexistent/dir/scenario.ini")


def test_overrides_win_over_file(tmp_path):
    path = _write(tmp_path / "s.ini", "[environment]\nbeta_omega=0.3\ng=2\n")
    cfg = parse_config(path, {"environment/beta_omega": "1.5"})
    assert cfg.beta_omega == 1.5
    assert cfg.g == 2.0


def test_round_trip(tmp_path):
    cfg = ScenarioConfig(
        mode=ScenarioMode.ENSEMBLE,
        seed=2 ** 63 + 5,
        format="json-lines",
        out=str(tmp_path / "runs"),
        j_s=SpinQuantumNumber(3),
        j=SpinQuantumNumber(5),
        j_list=(SpinQuantumNumber(1), SpinQuantumNumber(4)),
        m=1.5,
        m_prime=-0.5,
        theta=0.1 + 0.2,
        phi=1 / 3,
        beta_omega=0.45,
        g=2.75,
        tunneling=(1.0, 0.5, 2.0, 1.25),
        coupling_low=0.5,
        coupling_high=4.0,
        unobserved_size=2,
        fraction_size=1,
        fractions=2,
        realizations=7,
        realization_offset=3,
        workers=2,
        sample_realization=6,
        t_start=0.5,
        t_stop=12.0,
        t_points=33,
        t=2.5,
    )
    path = save_config(cfg, str(tmp_path / "saved.ini"))
    assert parse_config(path) == cfg


def test_round_trip_of_defaults(tmp_path):
    path = save_config(ScenarioConfig(), str(tmp_path / "defaults.ini"))
    assert parse_config(path) == ScenarioConfig()


def test_single_time_and_experiment():
    cfg = parse_config(overrides={"time/t": "0.5", "layout/fractions": "2",
                                  "environment/tunneling": " ".join(["1"] * 15)})
    np.testing.assert_array_equal(cfg.time_grid(), [0.5])
    exp = cfg.experiment()
    assert exp.environment_count == 15
    assert exp.tunneling == tuple([1.0] * 15)
    assert exp.validate() == []
    assert parse_config().experiment().tunneling is None


def test_list_values_survive_comma_splitting(tmp_path):
    path = _write(tmp_path / "s.ini", "[spin]\nj_list=1/2, 1, 3/2\n")
    cfg = parse_config(path)
    assert cfg.j_list == (SpinQuantumNumber(1), SpinQuantumNumber(2), SpinQuantumNumber(3))
    assert math.isclose(cfg.theta, math.pi / 2)
