"""
Optional Doob Core - Configuration Manager

Centralized configuration management with environment variable loading,
validation, and sensible defaults for numerical tolerances and the
property-checking harness.
"""

import os
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv


class OutputFormat(Enum):
    """Report rendering for the command-line interface."""

    TABLE = "TABLE"  # Human-readable tables (pandas)
    JSON = "JSON"  # Machine-readable, sorted keys


class LogLevel(Enum):
    """Logging level configuration."""

    DEBUG = "DEBUG"
    INFO = "INFO"
    WARNING = "WARNING"
    ERROR = "ERROR"
    CRITICAL = "CRITICAL"


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared by every module."""

    input: float = 1e-9  # Probability rows, weights, user data
    identity: float = 1e-12  # Internally derived identities
    inequality: float = 1e-9  # lhs <= rhs + inequality
    residual: float = 1e-10  # Moment equations, reconstructions
    feasibility: float = 1e-9  # Equality constraints in linear programs
    rank_cutoff: float = 1e-10  # Relative to the largest singular value
    homogeneous_margin: float = 1e-6  # Safety margin below the largest admissible t


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class HarnessConfig:
    """Sampling sizes and seed for randomized checks."""

    seed: int = 20240101
    trials: int = 100  # Random variables per instance
    mixtures: int = 100  # Random mixture measures per instance
    drift_samples: int = 200  # Sampled Q for the drift bound
    completeness_samples: int = 1000  # Strictly positive solutions per system


@dataclass
class Config:
    """
    Main configuration class for Optional Doob Core.

    Loads configuration from environment variables with sensible defaults.
    Uses python-dotenv to load from .env file if present. Command-line
    flags are applied on top with ``with_overrides``.

    Usage:
        config = Config.from_env()
        config = config.with_overrides(tolerance=1e-8, seed=7)

    Attributes:
        tolerances: Numerical tolerances
        harness: Seed and sample sizes for randomized checks
        output_format: Default report rendering
        log_level: Logging level
        log_to_file: Whether to also write a rotating log file
        project_root: Project root directory
    """

    tolerances: Tolerances = field(default_factory=Tolerances)
    harness: HarnessConfig = field(default_factory=HarnessConfig)
    output_format: OutputFormat = OutputFormat.TABLE
    log_level: LogLevel = LogLevel.WARNING
    log_to_file: bool = False
    project_root: Path = field(default_factory=Path.cwd)

    @classmethod
    def from_env(cls, env_path: Optional[Path] = None) -> "Config":
        """
        Load configuration from environment variables.

        Args:
            env_path: Optional path to .env file. If None, searches for .env
                     in project root and parent directories.

        Returns:
            Configured Config instance.

        Raises:
            ValueError: If a numeric variable cannot be parsed.
        """
        project_root = cls._find_project_root()

        if env_path:
            load_dotenv(env_path)
        else:
            env_file = project_root / ".env"
            if env_file.exists():
                load_dotenv(env_file)
            else:
                load_dotenv()

        tolerance_str = os.getenv("DOOB_TOLERANCE", "")
        seed = int(os.getenv("DOOB_SEED", str(HarnessConfig.seed)))
        trials = int(os.getenv("DOOB_TRIALS", str(HarnessConfig.trials)))
        output_str = os.getenv("DOOB_OUTPUT", "TABLE").upper()
        log_level_str = os.getenv("LOG_LEVEL", "WARNING").upper()
        log_to_file = os.getenv("LOG_TO_FILE", "false").lower() in ("1", "true", "yes")

        try:
            log_level = LogLevel[log_level_str]
        except KeyError:
            log_level = LogLevel.WARNING

        try:
            output_format = OutputFormat[output_str]
        except KeyError:
            output_format = OutputFormat.TABLE

        tolerances = Tolerances()
        if tolerance_str:
            tolerances = _with_tolerance(tolerances, float(tolerance_str))

        return cls(
            tolerances=tolerances,
            harness=HarnessConfig(seed=seed, trials=trials),
            output_format=output_format,
            log_level=log_level,
            log_to_file=log_to_file,
            project_root=project_root,
        )

    @staticmethod
    def _find_project_root() -> Path:
        """
        Find the project root directory.

        Looks for a directory containing 'src' folder, walking up from
        the current file's location.

        Returns:
            Path to project root directory.
        """
        current = Path(__file__).resolve().parent

        for _ in range(10):  # Limit search depth
            if (current / "src").is_dir():
                return current
            if (current.parent / "src").is_dir():
                return current.parent
            parent = current.parent
            if parent == current:
                break
            current = parent

        return Path.cwd()

    def with_overrides(
        self,
        tolerance: Optional[float] = None,
        seed: Optional[int] = None,
        trials: Optional[int] = None,
        output_format: Optional[OutputFormat] = None,
        log_level: Optional[LogLevel] = None,
    ) -> "Config":
        """
        Return a copy with command-line overrides applied.

        Flags always win over environment values; ``None`` keeps the current value.
        """
        tolerances = self.tolerances
        if tolerance is not None:
            tolerances = _with_tolerance(tolerances, tolerance)

        harness = self.harness
        if seed is not None:
            harness = replace(harness, seed=seed)
        if trials is not None:
            harness = replace(harness, trials=trials)

        return replace(
            self,
            tolerances=tolerances,
            harness=harness,
            output_format=output_format or self.output_format,
            log_level=log_level or self.log_level,
        )

    def validate(self) -> list[str]:
        """
        Validate the configuration.

        Returns:
            List of validation error messages. Empty list if valid.
        """
        errors = []

        for name in ("input", "identity", "inequality", "residual", "feasibility", "rank_cutoff"):
            value = getattr(self.tolerances, name)
            if not (0 < value < 1e-2):
                errors.append(f"tolerance '{name}' must be in (0, 0.01), got {value}")
        if self.harness.trials < 1:
            errors.append("DOOB_TRIALS must be at least 1")
        if self.harness.seed < 0:
            errors.append("DOOB_SEED must be non-negative")

        return errors

    def is_valid(self) -> bool:
        """Check if configuration is valid."""
        return len(self.validate()) == 0

    def get_log_dir(self) -> Path:
        """Get the logs directory."""
        return self.project_root / "logs"


def _with_tolerance(tolerances: Tolerances, value: float) -> Tolerances:
    # A single user tolerance governs the verdict-producing comparisons
    return replace(tolerances, inequality=value, feasibility=value)


def load_config(env_path: Optional[Path] = None) -> Config:
    """
    Load configuration from environment.

    Args:
        env_path: Optional path to .env file.

    Returns:
        Configured Config instance.
    """
    return Config.from_env(env_path)
