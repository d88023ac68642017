import pydantic
import pytest

from shared.config import (
    BaseConfig,
    build_experiment,
    dump_experiment,
    load_experiment,
    parse_overrides,
)
from shared.exceptions import ConfigurationError

pytestmark = pytest.mark.unit


def test_defaults_describe_two_link_benchmark():
    cfg = build_experiment({})
    assert cfg.dof == 2
    assert cfg.integration.dt == pytest.approx(2e-3)
    assert cfg.certificate.delta == pytest.approx(0.5269)
    assert [entry.name for entry in cfg.controllers] == [
        "pdp",
        "lgp_pdp",
        "nat_pdp",
        "lgp_nat_pdp",
        "lgp_var_nat_pdp",
    ]


def test_overrides_are_parsed_as_yaml_scalars():
    parsed = parse_overrides(["integration.dt=0.005", "name=run", "full_scale=true"])
    assert parsed == {"integration.dt": 0.005, "name": "run", "full_scale": True}


def test_dotted_override_reaches_list_entries():
    cfg = build_experiment({}, ["controllers.0.kp=5", "seed=7"])
    cfg_default = build_experiment({})
    assert cfg.seed == 7
    assert cfg.controllers[0].kp == 5.0
    assert cfg_default.controllers[0].kp == 10.0


def test_override_without_equals_sign_is_rejected():
    with pytest.raises(ConfigurationError):
        parse_overrides(["integration.dt"])


def test_unknown_key_names_its_location():
    with pytest.raises(ConfigurationError) as info:
        build_experiment({"integration": {"step": 0.1}})
    assert "integration" in info.value.message
    assert info.value.exit_code == 1


def test_var_nat_entry_needs_adaptation():
    document = {"controllers": [{"name": "v", "kind": "var_nat_pdp", "model": "lgp"}]}
    with pytest.raises(ConfigurationError):
        build_experiment(document)


def test_duplicate_controller_names_are_rejected():
    entry = {"name": "a", "kind": "pdp", "model": "parametric"}
    with pytest.raises(ConfigurationError):
        build_experiment({"controllers": [entry, entry]})


def test_full_scale_switches_study_sizes():
    cfg = build_experiment({}, ["full_scale=true"])
    assert cfg.plant.soft_robot.n_elems == 100
    assert cfg.monte_carlo.realizations == 100
    assert cfg.training.validation_rate_hz == 250.0


def test_soft_robot_dof_is_segment_count():
    cfg = build_experiment({"plant": {"kind": "soft_robot"}})
    assert cfg.dof == cfg.plant.soft_robot.n_segments == 4


def test_unknown_controller_lookup():
    with pytest.raises(ConfigurationError):
        build_experiment({}).controller("missing")


def test_load_round_trips_dump(tmp_path):
    cfg = build_experiment({}, ["seed=3", "integration.t_end=2.0"])
    path = tmp_path / "experiment.yml"
    path.write_text(dump_experiment(cfg), encoding="utf-8")
    assert load_experiment(path) == cfg


def test_missing_file_is_configuration_error(tmp_path):
    with pytest.raises(ConfigurationError):
        load_experiment(tmp_path / "absent.yml")


def test_non_mapping_document_is_rejected(tmp_path):
    path = tmp_path / "list.yml"
    path.write_text("- 1\n- 2\n", encoding="utf-8")
    with pytest.raises(ConfigurationError):
        load_experiment(path)


class TestRuntimeSettings:
    def test_environment_prefix(self, monkeypatch):
        monkeypatch.setenv("LGPCTRL_MAX_WORKERS", "3")
        monkeypatch.setenv("LGPCTRL_LOG_LEVEL", "debug")
        settings = BaseConfig()
        assert settings.max_workers == 3
        assert settings.log_level == "DEBUG"

    def test_unknown_log_format_is_rejected(self, monkeypatch):
        monkeypatch.setenv("LGPCTRL_LOG_FORMAT", "xml")
        with pytest.raises(pydantic.ValidationError):
            BaseConfig()
