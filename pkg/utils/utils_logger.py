"""
Logger Setup Script
File: utils/utils_logger.py

This script provides logging functions for the project.

Features:
- Logs information, warnings, and errors to a rotating log file.
- Mirrors messages to standard error; standard output stays reserved for
  solver reports so identical runs produce byte-identical output.
- Sanitizes logs to remove personal/identifying information.
"""

#####################################
# Import Modules
#####################################

# Imports from Python Standard Library
import getpass
import pathlib
import sys
from typing import Any, Mapping, Optional

# Imports from external packages
from loguru import logger

# Imports from local modules
from utils.utils_config import get_log_folder, get_log_level

#####################################
# Default Configurations
#####################################

CURRENT_SCRIPT = pathlib.Path(__file__).stem

LOG_FOLDER: pathlib.Path = get_log_folder()

LOG_FILE: pathlib.Path = LOG_FOLDER.joinpath("gridmodel_log.log")

_console_sink_id: Optional[int] = None

#####################################
# Helper Functions
#####################################


def sanitize_message(record: Mapping[str, Any]) -> str:
    """Remove personal/identifying information from log messages and escape braces."""
    message = record["message"]

    try:
        current_user = getpass.getuser()
        message = message.replace(current_user, "USER")
    except Exception:
        pass

    try:
        home_path = str(pathlib.Path.home())
        message = message.replace(home_path, "~")
    except Exception:
        pass

    try:
        cwd = str(pathlib.Path.cwd())
        message = message.replace(cwd, "PROJECT_ROOT")
    except Exception:
        pass

    message = message.replace("\\", "/")

    # Loguru treats braces in a format result as fields
    message = message.replace("{", "{{").replace("}", "}}")

    return message


def format_sanitized(record: Mapping[str, Any]) -> str:
    """Custom formatter that sanitizes messages and returns a plain string."""
    message = sanitize_message(record)
    time_str = record["time"].strftime("%Y-%m-%d %H:%M:%S")
    level_name = record["level"].name
    return f"{time_str} | {level_name} | {message}\n"


def set_console_level(level: str) -> None:
    """Replace the stderr sink with one at the given level."""
    global _console_sink_id
    if _console_sink_id is not None:
        try:
            logger.remove(_console_sink_id)
        except ValueError:
            pass
    _console_sink_id = logger.add(
        sys.stderr,
        level=level.upper(),
        format=format_sanitized,
    )


try:
    LOG_FOLDER.mkdir(parents=True, exist_ok=True)
except Exception as e:
    sys.stderr.write(f"Error creating log folder: {e}\n")

try:
    logger.remove()
    logger.add(
        LOG_FILE,
        level="DEBUG",
        rotation="200 kB",
        retention=1,
        compression=None,
        enqueue=True,
        format=format_sanitized,
    )
    set_console_level(get_log_level())
    logger.debug(f"Logging to file: {LOG_FILE}")
except Exception as e:
    logger.error(f"Error configuring logger to write to file: {e}")


def get_log_file_path() -> pathlib.Path:
    """Return the path to the log file."""
    return LOG_FILE


#####################################
# Main Function for Testing
#####################################


def main() -> None:
    """Show where logs go and emit one line per level."""
    logger.info(f"STARTING {CURRENT_SCRIPT}.py")
    logger.debug(f"Current working directory: {pathlib.Path.cwd()}")
    logger.warning("This is an example warning message.")
    logger.info(f"View the log output at {LOG_FILE}")
    logger.info(f"EXITING {CURRENT_SCRIPT}.py.")


#####################################
# Conditional Execution
#####################################

if __name__ == "__main__":
    main()
