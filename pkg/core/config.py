# core/config.py
from pydantic_settings import BaseSettings
import os
from dotenv import load_dotenv

load_dotenv()


class Settings(BaseSettings):
    # Application Settings
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")
    PROJECT_NAME: str = os.getenv("PROJECT_NAME", "Shopbot Market Lab")
    PROJECT_VERSION: str = os.getenv("PROJECT_VERSION", "1.0.0")

    # Profit comparisons closer than this (relative) are ties
    PROFIT_TIE_TOLERANCE: float = float(os.getenv("PROFIT_TIE_TOLERANCE", "1e-9"))

    # Regime detector defaults (tick counts are multiples of the price tick)
    DETECTOR_MIN_DROP_RUN: int = int(os.getenv("DETECTOR_MIN_DROP_RUN", "3"))
    DETECTOR_RESET_TICKS: int = int(os.getenv("DETECTOR_RESET_TICKS", "10"))
    COLLUSION_WINDOW: int = int(os.getenv("COLLUSION_WINDOW", "500"))
    COLLUSION_MARGIN_TICKS: int = int(os.getenv("COLLUSION_MARGIN_TICKS", "5"))
    COLLUSION_CV_MAX: float = float(os.getenv("COLLUSION_CV_MAX", "0.02"))
    COMPETITIVE_MARGIN_TICKS: int = int(os.getenv("COMPETITIVE_MARGIN_TICKS", "2"))

    # Equilibrium search
    FICTITIOUS_PLAY_SAMPLES: int = int(os.getenv("FICTITIOUS_PLAY_SAMPLES", "64"))

    # Traffic defense
    BLOCK_THRESHOLD: int = int(os.getenv("BLOCK_THRESHOLD", "100"))
    BLOCK_WINDOW: int = int(os.getenv("BLOCK_WINDOW", "100"))
    CAPACITY_THRESHOLD: float = float(os.getenv("CAPACITY_THRESHOLD", "0.25"))
    LOAD_WINDOW: int = int(os.getenv("LOAD_WINDOW", "100"))

    # Artifacts
    CSV_FLOAT_FORMAT: str = os.getenv("CSV_FLOAT_FORMAT", "%.10g")

    class Config:
        env_file = ".env"
        extra = "ignore"  # Ignore any other extra fields


# Global settings instance
settings = Settings()
