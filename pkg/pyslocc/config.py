import locale
import os
import logging

# ==============================
#  PATH
# ==============================
### json schema dir path (state files, canonical files)
JSON_SCHEMA_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), "utils", "schema")


# ==============================
#  LOGGING
# ==============================
### default level of every pyslocc logger
### `-v` on the command line lowers it to DEBUG
LOG_LEVEL = logging.WARNING


# ==============================
#  MAX-RANK SEARCH
# ==============================
### coefficients of the deterministic sweep: t in {0, +-1, +-2}^L
SWEEP_VALUES = (0, 1, -1, 2, -2)
### the sweep is skipped when len(SWEEP_VALUES)**L exceeds this
SWEEP_LIMIT = 3125
### random phase: number of tuples and the magnitude of their entries
RANDOM_SAMPLES = 64
RANDOM_MAGNITUDE = 10**6
### coefficients c tried when A is recombined as A + c J - t E to order the slot ranks
RECOMBINE_COEFFS = ("0", "1", "-1", "2", "-2")


# ==============================
#  ORBIT SEARCH
# ==============================
### values tried for free coordinates of the symmetry matrix T
WITNESS_GRID = ("0", "1", "-1", "2", "-2", "1/2", "-1/2", "3")
### at most this many grid points per matching
WITNESS_GRID_LIMIT = 4096
### at most this many block matchings per decision
PERMUTATION_LIMIT = 720
### random draws used to find an invertible element of a solution space
GENERIC_DRAWS = 8


# ==============================
#  HARNESS
# ==============================
### |numerator|, |denominator| cap of random scalars
COEFFICIENT_BOUND = 9
DEFAULT_SEED = 0
### redraws of a degenerate sample before a trial is given up
MAX_REDRAWS = 50


# ==============================
#  EXIT CODES
# ==============================
EXIT_OK = 0
EXIT_FAIL = 1
EXIT_UNDECIDED = 2
EXIT_PARSE = 3
EXIT_NOT_IN_FIELD = 4
EXIT_NOT_COMMUTING = 5


# ==============================
#  ENCODING
# ==============================
### Encoding when writing report and canonical files
### default
### Windows -> cp932 (jp)
### linux   -> utf-8
PREFERRED_ENCODING = locale.getpreferredencoding()
