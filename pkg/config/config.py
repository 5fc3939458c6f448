import os
from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict

load_dotenv()


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="KDVB_", extra="ignore")

    output_dir: str = "runs"
    log_level: str = "INFO"
    workers: int = 1
    seed: int = 0


settings = Settings()

# Output Configuration
OUTPUT_DIR = os.path.abspath(settings.output_dir)
LOG_LEVEL = settings.log_level.upper()

# Run Defaults
DEFAULT_WORKERS = settings.workers
DEFAULT_SEED = settings.seed


# Numerical Defaults
BOUNDARY_MASS_THRESHOLD = 1e-8
BOUNDARY_FRACTION = 0.10
BLOWUP_GROWTH_CAP = 1e8
DT_GUARD = 1e-12
