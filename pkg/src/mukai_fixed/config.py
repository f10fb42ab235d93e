"""Configuration constants for mukai-fixed."""

import os

from mukai_fixed.exceptions import ValidationError

# q-series
DEFAULT_TRUNCATION = 64  # coefficients
DEFAULT_TERMS = 8  # coefficients shown by `euler`

# Group closure
DEFAULT_MAX_GROUP = 1024
MAX_GROUP_ENV = "MUKAI_MAX_GROUP"

# Semistable support rule: vectors of square >= -2 always contribute
SUPPORT_MIN_SQUARE = -2

# Brute-force oracles
BRUTE_FORCE_MAX_RANK = 10
DEFAULT_BOX_RADIUS = 3
DEFAULT_ORACLE_SEED = 20240611
DEFAULT_ORACLE_PROBLEMS = 50
DEFAULT_ORACLE_CHARGES = 20

# Problem files
FORMAT_VERSION = "1"
SHIPPED_FIXTURES = ("nikulin", "genus2", "order11", "order2-frameshapes")

# Integers at or above this magnitude are written to JSON as decimal strings
EXACT_INT_LIMIT = 2**53


def get_max_group() -> int:
    """Return the group closure cap.

    The cap defaults to DEFAULT_MAX_GROUP and can be overridden with the
    MUKAI_MAX_GROUP environment variable.

    Returns:
        Maximum number of elements a generated group may have.

    Raises:
        ValidationError: If the environment variable is not a positive integer.
    """
    raw = os.environ.get(MAX_GROUP_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_MAX_GROUP
    try:
        value = int(raw)
    except ValueError as e:
        raise ValidationError(f"{MAX_GROUP_ENV} must be an integer, got {raw!r}") from e
    if value < 1:
        raise ValidationError(f"{MAX_GROUP_ENV} must be positive, got {value}")
    return value
