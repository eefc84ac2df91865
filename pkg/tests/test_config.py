import pytest

from taxidispatch.config import ConfigError, ScenarioConfig, desk_config, load_config, parse_config
from taxidispatch.dispatch import DEFAULT_GAMMA


def test_empty_file_gives_defaults(tmp_path):
    p = tmp_path / "empty.cfg"
    p.write_text("")
    cfg = load_config(p)
    assert cfg == ScenarioConfig()
    assert (cfg.area.width, cfg.area.height, cfg.n_taxis, cfg.speed, cfg.tick) == (9000, 9000, 1000, 17, 5)
    assert (cfg.pickup_dwell, cfg.dropoff_dwell) == (30, 90)
    assert cfg.tariff.fixed_cost == 2.4 and cfg.tariff.fare == pytest.approx(1.05e-3)
    assert cfg.tariff.op_cost == pytest.approx(0.2e-3) and cfg.tariff.est_trip == 4750
    assert cfg.gamma == DEFAULT_GAMMA and cfg.allow_displacement
    assert cfg.demand.rate_per_hour == 1000


def test_single_override():
    cfg = parse_config("n_taxis = 100\n")
    assert cfg.n_taxis == 100
    assert cfg.speed == 17


def test_comments_and_types():
    cfg = parse_config("# scenario\nstrategy = MaxRev  # objective\ndest_known = yes\nrate = 2000\nseed = 3\n")
    assert cfg.strategy == "maxrev" and cfg.dest_known and cfg.seed == 3
    assert cfg.demand.customers_per_interval == 500


def test_fare_below_cost_rejected():
    with pytest.raises(ConfigError):
        parse_config("fare = 0.1\nop_cost = 0.2\n")


@pytest.mark.parametrize("text", [
    "colour = blue", "n_taxis = 5\nn_taxis = 6", "n_taxis", "n_taxis = 2.5", "speed = -1",
    "strategy = random", "distribution = ring", "rate = 1000\ncustomers_per_interval = 4",
    "rate = 1001", "dest_known = maybe", "outbound_prob = 2",
])
def test_bad_input_rejected(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.cfg")


def test_round_trip_and_desk():
    cfg = desk_config(seed=9)
    text = "\n".join(f"{k} = {v}" for k, v in cfg.to_flat().items())
    assert parse_config(text) == cfg
    assert cfg.n_taxis == 100 and cfg.area.width == 2700 and cfg.demand.horizon == 2700
    assert cfg.strategy == "combined" and cfg.demand.distribution.value == "center"
