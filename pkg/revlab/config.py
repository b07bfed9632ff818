"""
Configuration module for the two-good revenue lab.

Contains all numerical tolerances, solver limits, paths and CLI defaults.
A handful of knobs can be overridden through environment variables
(or a .env file in the project root), all prefixed with REVLAB_.
"""

import os
from pathlib import Path
from dotenv import load_dotenv

# =============================================================================
# Path Configuration
# =============================================================================

# Get the project root directory
PACKAGE_DIR = Path(__file__).parent
PROJECT_ROOT = PACKAGE_DIR.parent

# Load environment variables from project root
load_dotenv(PROJECT_ROOT / ".env")

# Folder paths
FIXTURES_FOLDER = PROJECT_ROOT / "fixtures"
OUTPUT_FOLDER = Path(os.getenv("REVLAB_OUTPUT_DIR", PROJECT_ROOT / "results"))

# =============================================================================
# Run Configuration
# =============================================================================

DEFAULT_SEED = int(os.getenv("REVLAB_SEED", "0"))
LOG_LEVEL = os.getenv("REVLAB_LOG_LEVEL", "WARNING").upper()
SCHEMA_VERSION = 1

# =============================================================================
# Distribution Tolerances
# =============================================================================

MASS_TOL = 1e-12            # probabilities / density masses must sum to 1
MYERSON_TIE_TOL = 1e-12     # relative; smallest optimizer wins inside it
REGULARITY_TOL = 1e-9
REGULARITY_GRID_N = 10_001
TAU_TOL = 1e-10             # absolute, on H
MYERSON_SCAN_POINTS = 2001  # bracketed scan for wrapped / parametric objects

# =============================================================================
# Mechanism Tolerances
# =============================================================================

TIE_RTOL = 1e-12            # relative payoff tie window for best response
IC_TOL = 1e-8               # pairwise IC check on LP solutions

# =============================================================================
# LP Configuration
# =============================================================================

LP_BACKEND = os.getenv("REVLAB_LP_BACKEND", "simplex")   # simplex | highs
LP_FEAS_TOL = 1e-9
LP_OPT_TOL = 1e-9
LP_PIVOT_TOL = 1e-9
LP_MAX_ITER = int(os.getenv("REVLAB_LP_MAX_ITER", "200000"))
LP_BLAND_AFTER = 50         # consecutive degenerate pivots before Bland's rule
LP_REFACTOR_EVERY = 200     # pivots between rebuilds of the dictionary
LP_SETTLE_ROUNDS = 4        # solve / rebuild passes before giving up
LP_RESIDUAL_TOL = 1e-7      # relative; row residual allowed in a returned solution
MAX_SUPPORT_POINTS = 400

# Row generation
ROWGEN_VIOLATION_TOL = 1e-9
ROWGEN_MAX_ROUNDS = 200
ROWGEN_ROWS_PER_POINT = 3   # most-violated IC rows added per point per round
ROWGEN_NEIGHBORS = 2        # nearest neighbours seeded into the first round
ROWGEN_PURGE_SLACK = 1e-6   # IC rows this slack may be dropped between rounds
ROWGEN_PURGE_FACTOR = 6     # ... once the LP holds this many IC rows per point

# =============================================================================
# Quadrature / Bounds Configuration
# =============================================================================

QUAD_TOL = 1e-8
QUAD_MAX_DEPTH = 40
SUP_GRID_N = 40
SUP_REFINE_ROUNDS = 3
SINGLE_CROSSING_TOL = 1e-9
CROSSING_GRID_N = 2001
DECOMPOSITION_GRID_N = 120  # per-good cells of the product discretization
FD_STEP = 1e-5              # central differences for L' = -K

# =============================================================================
# Continuity Configuration
# =============================================================================

PROHOROV_TOL = 1e-7         # binary-search width on rho
PROHOROV_EDGE_SLACK = 1e-12
FLOW_SCALE = 10 ** 9        # probabilities -> integer capacities

# =============================================================================
# Scan Configuration
# =============================================================================

DEFAULT_BUDGET = 200
DEFAULT_GRID = 12

# =============================================================================
# Acceptance Configuration
# =============================================================================

REFINE_RATIO_TOL = 1e-2     # allowed drop of SRev/Rev from the 12- to the 16-cell grid
ESTIMATE_TOL = 1e-7         # slack on the tail estimates (quadrature error)
