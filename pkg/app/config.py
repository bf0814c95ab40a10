"""Configuration management using Pydantic Settings."""
from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings."""

    model_config = SettingsConfigDict(env_file=".env", case_sensitive=True, extra="ignore")

    # Seeds and default ranges
    DEFAULT_SEED: int = 0
    N_CHECK_MIN: int = 20
    ZETA_ORDER: int = 15
    L_MAX: int = 20
    N_MAX_FIELD: int = 6

    # Verification and oracle bounds (p^{rN} limits, matrix dimensions)
    EXHAUSTIVE_BOUND: int = 4096
    SEARCH_BOUND: int = 65536
    SAMPLE_COUNT: int = 64
    ORACLE_MAX_DIM: int = 600
    LADDER_J_MAX: int = 5
    MAX_ATTEMPTS: int = 10000

    # Reporting
    ASYMPTOTIC_BOUND: float = 2.0
    COUNT_DECIMAL_MAX_LOG: int = 256
    THREADS: int = 1

    # Trace Configuration
    TRACE_ENABLED: bool = True
    TRACE_ROOT: str = "logs/traces"

    @field_validator("THREADS", "N_CHECK_MIN", "ZETA_ORDER", "L_MAX", "N_MAX_FIELD", mode="after")
    @classmethod
    def at_least_one(cls, v):
        if v < 1:
            raise ValueError("must be >= 1")
        return v


# Global settings instance
settings = Settings()
