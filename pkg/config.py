"""
Konfigurationsfil för Secure Platoon Toolkit
"""
import os
from dotenv import load_dotenv

# Ladda valfria överstyrningar från .env bredvid projektet
load_dotenv(dotenv_path=os.path.join(os.path.dirname(__file__), ".env"))

# Numeriska toleranser
NONZERO_TOL = float(os.getenv("SPT_NONZERO_TOL", "1e-9"))
KERNEL_TOL = float(os.getenv("SPT_KERNEL_TOL", "1e-9"))
NORM_TOL = float(os.getenv("SPT_NORM_TOL", "1e-10"))
EIGEN_CLUSTER_TOL = float(os.getenv("SPT_EIGEN_CLUSTER_TOL", "1e-6"))

# LP-lösare
LP_PIVOT_TOL = float(os.getenv("SPT_LP_PIVOT_TOL", "1e-9"))
LP_INTEGRALITY_TOL = float(os.getenv("SPT_LP_INTEGRALITY_TOL", "1e-6"))
LP_MAX_ITERATIONS = int(os.getenv("SPT_LP_MAX_ITERATIONS", "10000"))

# Test av total unimodularitet (antal rader/kolumner i den mindre dimensionen)
TU_EXHAUSTIVE_MAX_COLS = int(os.getenv("SPT_TU_MAX_COLS", "18"))

# Säkerhetsplanering
DEFAULT_MODE_FILTER = os.getenv("SPT_MODE_FILTER", "all")
DEFAULT_BASIS = os.getenv("SPT_BASIS", "jordan")
DEFAULT_ALGORITHM = os.getenv("SPT_ALGORITHM", "efficient")

# Estimator
DEFAULT_CONSENSUS_ROUNDS = int(os.getenv("SPT_CONSENSUS_ROUNDS", "5"))

# Simulering och mätvärden
TAIL_FRACTION = float(os.getenv("SPT_TAIL_FRACTION", "0.2"))
TAIL_MIN_STEPS = int(os.getenv("SPT_TAIL_MIN_STEPS", "200"))
TRACE_FLOAT_FORMAT = "%.17g"

# Loggning
LOG_LEVEL = os.getenv("SPT_LOG_LEVEL", "WARNING")

# Datasökvägar
DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data")
PLATOON_SCENARIO_FILE = os.path.join(DATA_DIR, "platoon5.json")
