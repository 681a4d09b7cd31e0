"""Static configuration constants shared by all modules."""

# ── On-disk formats ───────────────────────────────────────────────────

CUBE_MAGIC = b"HSIC"
LABELS_MAGIC = b"HSIL"
MODEL_MAGIC = b"MDGC"

# Little-endian dtypes for every binary payload. The cube stores float32
# band-sequential, labels uint16 row-major, checkpoints float64.
HEADER_DTYPE = "<u4"
CUBE_DTYPE = "<f4"
LABELS_DTYPE = "<u2"
MODEL_DTYPE = "<f8"

SPLIT_ROLES = ("train", "val")

# ── Pipeline defaults ─────────────────────────────────────────────────

DEFAULT_PER_CLASS = 30
DEFAULT_VAL_FRACTION = 0.1

# Pixels per superpixel used when --k is not given: K = ceil(H*W / 100).
DEFAULT_PIXELS_PER_SUPERPIXEL = 100
DEFAULT_COMPACTNESS = 0.1
DEFAULT_SLIC_ITERS = 10
# Convergence threshold on center movement, as a fraction of the grid step S.
SLIC_CONVERGENCE = 1e-4
# Seed grids whose cell count is within this fraction of k compete on squareness.
GRID_TOLERANCE = 0.1

DEFAULT_GAMMA = 0.2
DEFAULT_SCALES = (1, 2, 3)
DEFAULT_LAYERS = 2
DEFAULT_HIDDEN = 20
DEFAULT_ALPHA = 0.1
DEFAULT_BETA = 0.01
DEFAULT_ITERATIONS = 5000
DEFAULT_LEARNING_RATE = 0.0005
DEFAULT_SEED = 0
DEFAULT_LOG_EVERY = 500

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPSILON = 1e-8

# Tolerance used when checking that an adjacency matrix is symmetric.
SYMMETRY_TOL = 1e-10

# ── Variants ──────────────────────────────────────────────────────────

VARIANT_MDGCN = "mdgcn"
VARIANT_FIXED_GRAPH = "fixed-graph"
VARIANT_SINGLE_SCALE = "single-scale"

# ── Output file names (inside --out) ─────────────────────────────────

SEGMENTATION_FILE = "segmentation.csv"
BOUNDARY_FILE = "boundaries.ppm"
SPLIT_FILE = "split.csv"
CHECKPOINT_FILE = "model.mdgc"
FINAL_CHECKPOINT_FILE = "model_final.mdgc"
HISTORY_FILE = "history.csv"
TIMING_FILE = "timing.csv"
CONFIG_FILE = "config.json"
REPORT_FILE = "report.json"
MAP_FILE = "map.ppm"
PREDICTION_FILE = "prediction.hsil"
ABLATION_FILE = "ablation.csv"
ABLATION_SUMMARY_FILE = "ablation_summary.csv"
SWEEP_FILE = "sweep.csv"

# ── Exit codes ────────────────────────────────────────────────────────

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3

# Boundary overlay colour for segmentation inspection images.
BOUNDARY_RGB = (255, 0, 0)
