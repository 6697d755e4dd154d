from __future__ import annotations

from pydantic import Field, model_validator
from pydantic_settings import BaseSettings

_LEVELS = {"TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL"}


class Settings(BaseSettings):
    """Project-wide configuration loaded from environment variables (.env optional).

    Per-run hyperparameters live in :class:`gmtpool.config.RunConfig`; this
    object only carries process-level knobs (paths, logging, default seed).
    """

    # General settings
    LOG_LEVEL: str = Field("INFO", description="Root log level for Loguru")
    LOG_DIR: str = Field("logs", description="Directory for rotating log files")
    LOG_TO_FILE: bool = Field(True, description="Write run/debug/error log files next to stderr output")

    # Data / outputs
    DATA_DIR: str = Field("data", description="Root directory that contains TU dataset folders")
    OUTPUT_DIR: str = Field("runs", description="Default directory for CSV/SVG/run.json outputs")

    # Reproducibility
    DEFAULT_SEED: int = Field(0, ge=0, description="Seed used when neither config nor --seed sets one")
    GIT_DESCRIBE: str | None = Field(None, description="Override for the provenance git-describe string")

    model_config = {
        "env_file": ".env",
        "case_sensitive": False,
        "extra": "ignore",
        "env_prefix": "GMT_",
    }

    # ------------------------------------------------------------------
    # Validators
    # ------------------------------------------------------------------
    @model_validator(mode="after")
    def _check_level(self):  # noqa: D401 – pydantic hook
        """Normalise and reject unknown log levels early."""
        level = self.LOG_LEVEL.upper()
        if level not in _LEVELS:
            raise ValueError(f"LOG_LEVEL must be one of {sorted(_LEVELS)}, got {self.LOG_LEVEL!r}")
        object.__setattr__(self, "LOG_LEVEL", level)
        return self


settings = Settings()
