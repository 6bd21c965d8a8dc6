"""
CoreMotif — Configuration: environment overrides, algorithm constants, logging setup.
"""

import os
import logging

logger = logging.getLogger("coremotif")


def _env_int(name, default):
    # type: (str, int) -> int
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning("CONFIG: %s=%r is not an integer, using %d", name, raw, default)
        return default


# ── Logging ──
LOG_LEVEL = os.environ.get("COREMOTIF_LOG_LEVEL", "INFO").upper()
LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"


def setup_logging(level=None):
    """Configure the root handler once. CLI calls this before any work."""
    logging.basicConfig(level=(level or LOG_LEVEL).upper(), format=LOG_FORMAT)


# ── Workers ──
# Row-block parallelism for motif products and k-means distances.
WORKERS = _env_int("COREMOTIF_WORKERS", 1)

# ── Motifs ──
MOTIF_TAGS = ("M1", "M2", "M3", "M4", "M5", "M6", "M7")
DEFAULT_MOTIF = "M6"
ORACLE_MAX_NODES = _env_int("COREMOTIF_ORACLE_MAX_NODES", 500)

# ── Spectral ──
DENSE_EIG_MAX = _env_int("COREMOTIF_DENSE_EIG_MAX", 128)
EIG_RESTARTS = _env_int("COREMOTIF_EIG_RESTARTS", 30)  # times k_eig
EIG_TOL = 1e-10
EIG_ACCEPT = 1e-8
KMEANS_MAX_ITER = _env_int("COREMOTIF_KMEANS_MAX_ITER", 300)

# ── Recovery ──
DEFAULT_THRESHOLD = 0.5
SHARE_BASES = ("labeled", "all")

# ── k Selection ──
K_BANDS = {
    "normal": (0.40, 0.50),
    "power_law": (0.05, 0.10),
}
MIN_DISTINCT_CORENESS = 3

# ── Algorithms ──
ALGORITHMS = ("conventional", "motif", "kcoremotif")
DEFAULT_SEED = 0

# ── Data ──
DATA_DIR = os.environ.get("COREMOTIF_DATA_DIR", os.path.join(os.getcwd(), "data"))


# ── Startup Validation ──
def validate_config():
    """Log warnings for out-of-range settings. Called by the CLI on startup."""
    warnings = []
    if WORKERS < 1:
        warnings.append("COREMOTIF_WORKERS < 1 — falling back to a single worker")
    if ORACLE_MAX_NODES < 3:
        warnings.append("COREMOTIF_ORACLE_MAX_NODES < 3 — the enumeration oracle will refuse every graph")
    if DENSE_EIG_MAX < 0:
        warnings.append("COREMOTIF_DENSE_EIG_MAX < 0 — every Laplacian goes to the Lanczos solver")
    if EIG_RESTARTS < 1:
        warnings.append("COREMOTIF_EIG_RESTARTS < 1 — eigensolver budget is empty")
    if KMEANS_MAX_ITER < 1:
        warnings.append("COREMOTIF_KMEANS_MAX_ITER < 1 — k-means will stop after seeding")
    for w in warnings:
        logger.warning("CONFIG: %s", w)
    return warnings


def effective_workers(workers=None):
    # type: (int) -> int
    return max(1, workers if workers is not None else WORKERS)
