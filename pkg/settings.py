"""
Runtime configuration for the newtoncert certifier.
Values come from the environment (optionally a .env file) and are read once at import.
"""

import os
from pathlib import Path

# Load environment variables from .env file if present
try:
    from dotenv import load_dotenv
    load_dotenv()
except ImportError:
    pass  # python-dotenv not installed, will use system env vars only


def env_flag(name: str, default: bool = False) -> bool:
    """Parse a boolean environment variable ("1", "true", "yes", "on")."""
    raw = os.getenv(name)
    if raw is None:
        return default
    return raw.strip().lower() in ("1", "true", "yes", "on")


def env_int(name: str, default: int) -> int:
    """Parse an integer environment variable, falling back to default on junk."""
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw.strip())
    except ValueError:
        return default


# ============================================================================
# CONFIGURATION
# ============================================================================

TOOL_VERSION = "1.0.0"
SCHEMA_VERSION = "1"

# Gröbner kernel: reduction steps allowed per basis computation
STEP_BUDGET = env_int("NEWTONCERT_STEP_BUDGET", 1_000_000)

# Worker threads for independent subset x cone checks
DEFAULT_JOBS = max(1, env_int("NEWTONCERT_JOBS", 1))

# Numeric probing
DEFAULT_SEED = env_int("NEWTONCERT_SEED", 20240229)
DEFAULT_TOLERANCE = 1e-9

LOG_LEVEL = os.getenv("NEWTONCERT_LOG_LEVEL", "WARNING").upper()

# Persistent torus-emptiness verdict cache (opt-in)
VERDICT_CACHE_ENABLED = env_flag("NEWTONCERT_CACHE", False)
CACHE_DIR = Path(os.getenv("NEWTONCERT_CACHE_DIR", ".cache"))

# Desk-scale caps, validated at parse time
MAX_VARIABLES = 16
MAX_EXPONENT = 2 ** 16

# In-memory LP feasibility memo
LP_CACHE_SIZE = 4096

# Small-integer torus witness search
WITNESS_SEARCH_VALUES = (1, -1, 2, -2, 3, -3)
WITNESS_SEARCH_LIMIT = 20_000
