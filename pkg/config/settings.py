from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # Output
    out: str = "out"

    # Seed di default documentato: una run "di default" deve essere riproducibile
    seed: int = 20240611

    # Parallelismo sulle traiettorie
    threads: int = 1

    # Logging
    log_level: str = "INFO"

    # Oltre questo r, cosh(2r) e i prodotti e^{2r}·e^{2r} dei test escono dalla zona comoda
    max_squeeze: float = 12.0

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="EPRWMR_",
        extra="ignore",
    )


settings = Settings()
