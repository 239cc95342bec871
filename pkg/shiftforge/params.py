import os
from fractions import Fraction

#caps (refuse rather than degrade)

PATTERN_CAP = int(os.environ.get("SHIFTFORGE_PATTERN_CAP", str(10 ** 7)))
NODE_BUDGET = int(os.environ.get("SHIFTFORGE_NODE_BUDGET", str(5 * 10 ** 7)))
WINDOW_CAP = 24            # sites in an enlarged SFT window
ALLOWED_CAP = 2 * 10 ** 6  # patterns materialized for one window
SUBSET_CAP = 200_000       # states of a subset construction
SCAN_STATE_CAP = 2 * 10 ** 6

#parallelism

THREADS = int(os.environ.get("SHIFTFORGE_THREADS", "1"))

#combing

DELTA_SAFETY = 0.99        # delta = safety * eps / (2 + log 2 + 2 log|A|)
DEFAULT_MAX_STEPS = 100_000
DECOMPOSITION_SAMPLES = 3

#word system

WORD_DELTA = Fraction(1, 10)
MATERIALIZE_LEVEL = 4
SUBWORD_CAP = 4
PREFIX_CAP = 4 * 10 ** 7    # cells of w-infinity materialized at once
SPAN_CAP = 5 * 10 ** 6      # blocks listed by a block decomposition

#reports

SCHEMA_VERSION = 1
TIER_EXACT = "exact-1D"
TIER_MARGIN = "local-margin"
