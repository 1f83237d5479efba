"""Configuration loading: precedence, coercion, validation."""

import pytest

from virtualta.config import AppConfig, load_config
from virtualta.errors import ConfigError


def write_yaml(tmp_path, text):
    path = tmp_path / "vta.yaml"
    path.write_text(text, encoding="utf-8")
    return path


def test_defaults_apply_without_any_sources():
    config = load_config(env={})
    assert config == AppConfig()
    assert config.backend == "reference"
    assert config.max_chars == 200
    assert config.tau_model == 0.5


def test_file_values_override_defaults(tmp_path):
    path = write_yaml(tmp_path, "max_chars: 120\nhost: 0.0.0.0\n")
    config = load_config(path, env={})
    assert config.max_chars == 120
    assert config.host == "0.0.0.0"
    assert config.port == 8000


def test_env_overrides_file(tmp_path):
    path = write_yaml(tmp_path, "max_chars: 120\n")
    config = load_config(path, env={"VTA_MAX_CHARS": "150"})
    assert config.max_chars == 150


def test_flags_override_env_and_file(tmp_path):
    path = write_yaml(tmp_path, "max_chars: 120\n")
    config = load_config(
        path, env={"VTA_MAX_CHARS": "150"}, overrides={"max_chars": 175}
    )
    assert config.max_chars == 175


def test_unrelated_env_vars_are_ignored():
    config = load_config(env={"VTA_MAX_CHARSET": "9", "HOME": "/root"})
    assert config.max_chars == 200


def test_env_values_are_coerced():
    config = load_config(env={"VTA_TAU_MODEL": "0.75", "VTA_TOP_K": "5"})
    assert config.tau_model == 0.75
    assert config.top_k == 5


def test_non_numeric_env_value_is_an_error():
    with pytest.raises(ConfigError, match="top_k must be an integer"):
        load_config(env={"VTA_TOP_K": "many"})


def test_unknown_file_key_is_rejected(tmp_path):
    path = write_yaml(tmp_path, "max_char: 120\n")
    with pytest.raises(ConfigError, match="unknown configuration key 'max_char'"):
        load_config(path, env={})


def test_unknown_flag_key_is_rejected():
    with pytest.raises(ConfigError, match="command-line flags"):
        load_config(env={}, overrides={"maxchars": 5})


def test_empty_file_is_fine(tmp_path):
    path = write_yaml(tmp_path, "")
    assert load_config(path, env={}) == AppConfig()


def test_non_mapping_file_is_rejected(tmp_path):
    path = write_yaml(tmp_path, "- just\n- a\n- list\n")
    with pytest.raises(ConfigError, match="must hold a mapping"):
        load_config(path, env={})


def test_http_backend_requires_endpoint():
    with pytest.raises(ConfigError, match="requires gateway_endpoint"):
        load_config(env={"VTA_BACKEND": "http"})
    config = load_config(
        env={"VTA_BACKEND": "http", "VTA_GATEWAY_ENDPOINT": "https://lm.example/api"}
    )
    assert config.backend == "http"


def test_unrecognized_backend_is_rejected():
    with pytest.raises(ConfigError, match="backend must be"):
        load_config(env={"VTA_BACKEND": "quantum"})


@pytest.mark.parametrize("field", ["max_chars", "top_k", "cache_capacity", "port"])
def test_positive_int_fields_reject_zero(field):
    with pytest.raises(ConfigError, match=f"{field} must be a positive integer"):
        load_config(env={f"VTA_{field.upper()}": "0"})


@pytest.mark.parametrize("field", ["tau_model", "tau_extract", "cache_ttl_s"])
def test_positive_float_fields_reject_negatives(field):
    with pytest.raises(ConfigError, match=f"{field} must be a positive number"):
        load_config(env={f"VTA_{field.upper()}": "-1.5"})


def test_string_fields_reject_non_strings():
    with pytest.raises(ConfigError, match="host must be a string"):
        load_config(env={}, overrides={"host": 42})


def test_api_key_is_named_not_stored(tmp_path):
    # config carries the env var name; the secret itself stays out of files
    path = write_yaml(tmp_path, "gateway_api_key_env: MY_LM_KEY\n")
    config = load_config(path, env={})
    assert config.gateway_api_key_env == "MY_LM_KEY"
    assert not hasattr(config, "gateway_api_key")
