from dotenv import load_dotenv
import os

# Load environment variables
load_dotenv()

TOOL_VERSION = "1.0.0"

# Defaults used when neither a flag nor the environment provides a value
DEFAULT_THREADS = 1
DEFAULT_OUT_DIR = "results"
DEFAULT_LOG_LEVEL = "INFO"
DEFAULT_SEED = 20240601
DEFAULT_C0 = 1.33


def get_threads() -> int:
    """Worker count for grid sweeps; CAPGATE_THREADS overrides the default."""
    value = os.getenv("CAPGATE_THREADS")
    if not value:
        return DEFAULT_THREADS
    try:
        threads = int(value)
    except ValueError:
        raise ValueError(f"CAPGATE_THREADS must be an integer, got {value!r}")
    if threads < 1:
        raise ValueError("CAPGATE_THREADS must be at least 1")
    return threads


def get_out_dir() -> str:
    return os.getenv("CAPGATE_OUT_DIR") or DEFAULT_OUT_DIR


def get_log_level() -> str:
    return (os.getenv("CAPGATE_LOG_LEVEL") or DEFAULT_LOG_LEVEL).upper()


def get_seed() -> int:
    value = os.getenv("CAPGATE_SEED")
    return int(value) if value else DEFAULT_SEED
