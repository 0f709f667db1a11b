"""
Unit tests for the configuration manager.
"""

import os
import tempfile
from pathlib import Path

import pytest

from optional_doob.config import (
    DEFAULT_TOLERANCES,
    Config,
    HarnessConfig,
    LogLevel,
    OutputFormat,
    Tolerances,
    load_config,
)


@pytest.mark.unit
class TestOutputFormat:
    """Tests for OutputFormat enum."""

    def test_values(self):
        assert OutputFormat.TABLE.value == "TABLE"
        assert OutputFormat.JSON.value == "JSON"


@pytest.mark.unit
class TestLogLevel:
    """Tests for LogLevel enum."""

    def test_all_log_levels(self):
        assert LogLevel.DEBUG.value == "DEBUG"
        assert LogLevel.INFO.value == "INFO"
        assert LogLevel.WARNING.value == "WARNING"
        assert LogLevel.ERROR.value == "ERROR"
        assert LogLevel.CRITICAL.value == "CRITICAL"


@pytest.mark.unit
class TestTolerances:
    """Tests for Tolerances dataclass."""

    def test_default_values(self):
        assert DEFAULT_TOLERANCES.input == 1e-9
        assert DEFAULT_TOLERANCES.identity == 1e-12
        assert DEFAULT_TOLERANCES.inequality == 1e-9
        assert DEFAULT_TOLERANCES.residual == 1e-10
        assert DEFAULT_TOLERANCES.homogeneous_margin == 1e-6

    def test_frozen(self):
        with pytest.raises(AttributeError):
            DEFAULT_TOLERANCES.input = 1.0  # type: ignore[misc]


@pytest.mark.unit
class TestHarnessConfig:
    """Tests for HarnessConfig dataclass."""

    def test_default_values(self):
        config = HarnessConfig()
        assert config.seed == 20240101
        assert config.trials == 100
        assert config.mixtures == 100
        assert config.drift_samples == 200
        assert config.completeness_samples == 1000


@pytest.mark.unit
class TestConfig:
    """Tests for Config class."""

    def test_from_env_with_defaults(self, isolated_env):
        config = Config.from_env(env_path=Path("/nonexistent/.env"))
        assert config.tolerances == Tolerances()
        assert config.harness.seed == 20240101
        assert config.output_format == OutputFormat.TABLE
        assert config.log_level == LogLevel.WARNING
        assert config.log_to_file is False

    def test_from_env_with_all_keys(self, isolated_env):
        os.environ["DOOB_TOLERANCE"] = "1e-7"
        os.environ["DOOB_SEED"] = "7"
        os.environ["DOOB_TRIALS"] = "12"
        os.environ["DOOB_OUTPUT"] = "json"
        os.environ["LOG_LEVEL"] = "DEBUG"
        os.environ["LOG_TO_FILE"] = "true"

        config = Config.from_env(env_path=Path("/nonexistent/.env"))

        assert config.tolerances.inequality == 1e-7
        assert config.tolerances.feasibility == 1e-7
        assert config.tolerances.residual == 1e-10
        assert config.harness.seed == 7
        assert config.harness.trials == 12
        assert config.output_format == OutputFormat.JSON
        assert config.log_level == LogLevel.DEBUG
        assert config.log_to_file is True

    def test_from_env_with_env_file(self, isolated_env):
        with tempfile.NamedTemporaryFile(mode="w", suffix=".env", delete=False) as f:
            f.write("DOOB_SEED=99\n")
            f.write("DOOB_OUTPUT=JSON\n")
            env_path = Path(f.name)

        try:
            config = Config.from_env(env_path=env_path)
            assert config.harness.seed == 99
            assert config.output_format == OutputFormat.JSON
        finally:
            env_path.unlink()

    def test_invalid_enum_values_fall_back(self, isolated_env):
        os.environ["LOG_LEVEL"] = "LOUD"
        os.environ["DOOB_OUTPUT"] = "XML"
        config = Config.from_env(env_path=Path("/nonexistent/.env"))
        assert config.log_level == LogLevel.WARNING
        assert config.output_format == OutputFormat.TABLE

    def test_unparseable_number(self, isolated_env):
        os.environ["DOOB_TRIALS"] = "many"
        with pytest.raises(ValueError):
            Config.from_env(env_path=Path("/nonexistent/.env"))

    def test_overrides_win(self, isolated_env):
        os.environ["DOOB_SEED"] = "7"
        config = Config.from_env(env_path=Path("/nonexistent/.env")).with_overrides(
            tolerance=1e-6, seed=3, trials=5, output_format=OutputFormat.JSON, log_level=LogLevel.INFO,
        )
        assert config.harness.seed == 3
        assert config.harness.trials == 5
        assert config.tolerances.inequality == 1e-6
        assert config.output_format == OutputFormat.JSON
        assert config.log_level == LogLevel.INFO

    def test_none_overrides_keep_values(self):
        config = Config(harness=HarnessConfig(seed=11))
        assert config.with_overrides().harness.seed == 11

    def test_validate_valid(self):
        config = Config()
        assert config.validate() == []
        assert config.is_valid()

    def test_validate_tolerance_range(self):
        config = Config().with_overrides(tolerance=0.5)
        errors = config.validate()
        assert any("inequality" in e for e in errors)
        assert not config.is_valid()

    def test_validate_trials_and_seed(self):
        config = Config(harness=HarnessConfig(seed=-1, trials=0))
        errors = config.validate()
        assert "DOOB_TRIALS must be at least 1" in errors
        assert "DOOB_SEED must be non-negative" in errors

    def test_get_log_dir(self):
        config = Config(project_root=Path("/tmp/project"))
        assert config.get_log_dir() == Path("/tmp/project/logs")


@pytest.mark.unit
class TestLoadConfig:
    """Tests for load_config function."""

    def test_load_config(self, isolated_env):
        config = load_config(env_path=Path("/nonexistent/.env"))
        assert isinstance(config, Config)
