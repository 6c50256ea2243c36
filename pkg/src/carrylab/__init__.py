"""carrylab: carry functions for base addition, their structure, and their
learnability by minimal recurrent networks.

The carry recursion for adding two numbers digit by digit is determined by a
carry table F on digit pairs. This package enumerates every valid table for a
base, measures how orderly each one is (box-counting dimension of its carry
borders, carry frequency, associativity), trains small GRU/LSTM networks to
add under each table, and correlates structure with learnability.
"""

from .modnum import Base, Digit, Ordering  # noqa: F401
from .carry import (  # noqa: F401
    CarryTable,
    CoboundaryMap,
    CarryClass,
    SingleValue,
    LowDimMultiValue,
    OtherMultiValue,
    classify,
    coboundary_shift,
    enumerate_carry_tables,
    one_carry,
    table_by_id,
    u_carry,
)
from .addition import BaseNumber, add, counting_orbit  # noqa: F401
from .measures import box_dimension, measure_report  # noqa: F401
from .errors import ConfigError, NumericError, ResourceLimitError  # noqa: F401

__version__ = "0.1.0"
