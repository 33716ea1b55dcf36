"""
utils_config.py - environment-driven settings.

Values come from the process environment, optionally seeded from a
local .env file. Every getter falls back to a default when the
variable is missing or malformed.
"""

#####################################
# Import Modules
#####################################

# Import packages from Python Standard Library
import os
import pathlib

# Import external packages
from dotenv import load_dotenv

#####################################
# Default Configurations
#####################################

DEFAULT_SEED = 0
DEFAULT_LOG_LEVEL = "INFO"
DEFAULT_LOG_FOLDER = "logs"
DEFAULT_DENSE_THRESHOLD = 64
DEFAULT_TRACE_DELIMITER = ","

load_dotenv()

#####################################
# Helper Functions
#####################################


def get_default_seed() -> int:
    """Fetch the RNG seed used when the CLI gets no --seed."""
    raw = os.getenv("GRIDMODEL_SEED", str(DEFAULT_SEED))
    try:
        return int(raw)
    except ValueError:
        return DEFAULT_SEED


def get_log_level() -> str:
    """Fetch the console log level."""
    return os.getenv("GRIDMODEL_LOG_LEVEL", DEFAULT_LOG_LEVEL).upper()


def get_log_folder() -> pathlib.Path:
    """Fetch the folder that holds the rotating log file."""
    return pathlib.Path(os.getenv("GRIDMODEL_LOG_FOLDER", DEFAULT_LOG_FOLDER))


def get_dense_threshold() -> int:
    """Systems with fewer unknowns than this use the dense LU path."""
    raw = os.getenv("GRIDMODEL_DENSE_THRESHOLD", str(DEFAULT_DENSE_THRESHOLD))
    try:
        return max(0, int(raw))
    except ValueError:
        return DEFAULT_DENSE_THRESHOLD


def get_trace_delimiter() -> str:
    """Fetch the delimiter for repeats trace tables."""
    return os.getenv("GRIDMODEL_TRACE_DELIMITER", DEFAULT_TRACE_DELIMITER)
