import os
from dotenv import load_dotenv

# Load .env file
load_dotenv()

C1 = float(os.getenv("QW_C1", "8"))
C2 = float(os.getenv("QW_C2", "4"))
MODEL = os.getenv("QW_MODEL", "ideal")
SEED = int(os.getenv("QW_SEED", "20240607"))
OUT_DIR = os.getenv("QW_OUT_DIR", "results")
LOG_LEVEL = os.getenv("QW_LOG_LEVEL", "INFO")
MAX_WORKERS = int(os.getenv("QW_MAX_WORKERS", "4"))
MAX_BASIS = int(os.getenv("QW_MAX_BASIS", "5000"))

# Numerical tolerances
SIGMA_TOLERANCE = 1e-12
FLOW_TOLERANCE = 1e-9
EIGENPHASE_TOLERANCE = 1e-9
UNITARITY_TOLERANCE = 1e-10
STATE_NORM_TOLERANCE = 1e-9
