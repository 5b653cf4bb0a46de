"""Application-wide constants."""

from pathlib import Path

# Application info
APP_NAME = "qchain"
APP_VERSION = "0.1.0"

# Paths
DEFAULT_CONFIG_FILE = Path("qchain.yaml")

# Numerics
DEFAULT_DIM_CAP = 4096
DEFAULT_TOLERANCE = 1e-10
UNITARITY_TOLERANCE = 1e-10
NORMALIZATION_TOLERANCE = 1e-12
DISTRIBUTION_TOLERANCE = 1e-9
EQUIVALENCE_TOLERANCE = 1e-9
POSITIVITY_FLOOR = -1e-10
NEGATIVE_PROBABILITY_FLOOR = -1e-12
PRUNE_THRESHOLD = 1e-15

# Event ordering: observations sharing a time tag are separated by this amount
ORDERING_EPSILON = 1e-9

# Engines and output
ENGINES = ["feynman", "evolution", "both"]
OUTPUT_FORMATS = ["table", "json", "csv"]
DEFAULT_SIGNIFICANT_DIGITS = 12
REPORT_FORMAT_VERSION = 1
SCENARIO_FORMAT_VERSION = 1

# Labels
PREPARED_LABEL = "prepared"
UNTAGGED_LABEL = "untagged"
SYSTEM_LABEL = "s"

# Logging (fixed format, not user-configurable)
LOG_FORMAT = "%(asctime)s | %(levelname)-8s | %(name)s | %(scenario)s | %(message)s"
LOG_NO_SCENARIO = "-"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
LOG_COLORS = {
    "DEBUG": "\033[36m",  # Cyan
    "INFO": "\033[32m",  # Green
    "WARNING": "\033[33m",  # Yellow
    "ERROR": "\033[31m",  # Red
    "CRITICAL": "\033[35m",  # Magenta
}
LOG_RESET = "\033[0m"
LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]

# File logging defaults
LOG_DEFAULT_FILE = Path("log") / "qchain.log"
LOG_DEFAULT_MAX_SIZE_MB = 10
LOG_DEFAULT_BACKUP_COUNT = 5

# Environment variable prefix
ENV_PREFIX = "QCHAIN"
