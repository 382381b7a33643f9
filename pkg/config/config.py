import os

from dotenv import load_dotenv

load_dotenv()

TOOL_VERSION = "qdarwin 0.3.0"

# Dense fragment states: 2^cap x 2^cap complex matrices
DENSE_CAP = int(os.getenv("QDARWIN_DENSE_CAP", "12"))
DENSE_CAP_MAX = 14

# Largest C(#E, #F) that enumerate mode will walk
ENUM_LIMIT = int(os.getenv("QDARWIN_ENUM_LIMIT", "10000000"))

THREADS = int(os.getenv("QDARWIN_THREADS", str(os.cpu_count() or 1)))
DEFAULT_SEED = int(os.getenv("QDARWIN_SEED", "20150601"))
LOG_LEVEL = os.getenv("QDARWIN_LOG_LEVEL", "INFO")

# Draws per Monte Carlo work unit. Sums are reduced chunk by chunk, so this fixes the
# summation order; outputs are byte-stable only for a fixed value.
MC_CHUNK = int(os.getenv("QDARWIN_MC_CHUNK", "256"))
ENUM_CHUNK = 65536

# Numerical tolerances shared by the linear-algebra layer
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
MONOTONE_TOL = 1e-9
OVERLAP_FLOOR = 1e-300

assert DENSE_CAP <= DENSE_CAP_MAX, "QDARWIN_DENSE_CAP above hard ceiling of 14 spins"
