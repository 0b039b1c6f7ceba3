import os

from dotenv import load_dotenv

# Permite sobreescribir los valores por defecto con un archivo .env local
load_dotenv()

# Configuración de Logging
LOG_FILE = os.getenv("LOG_FILE", "")  # Vacío = solo consola
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")

# Cuadratura esférica (Gauss-Legendre en el ángulo polar x trapecio en el azimut)
GRID_POLAR = int(os.getenv("GRID_POLAR", "128"))
GRID_AZIMUTHAL = int(os.getenv("GRID_AZIMUTHAL", "256"))
GRID_CHUNK_SIZE = int(os.getenv("GRID_CHUNK_SIZE", "65536"))  # Nodos evaluados por bloque
MAX_GRID_NODES = int(os.getenv("MAX_GRID_NODES", "4000000"))  # Límite del producto cartesiano de mallas

# Monte Carlo
MC_SAMPLES = int(os.getenv("MC_SAMPLES", "1000000"))
MC_BLOCK_SIZE = int(os.getenv("MC_BLOCK_SIZE", "65536"))  # Fijo: la muestra i depende solo de (seed, i)
SEED = int(os.getenv("SEED", "0"))

# Paralelismo (no altera los resultados)
WORKERS = int(os.getenv("WORKERS", "1"))

# Tolerancias
PURE_TOLERANCE = float(os.getenv("PURE_TOLERANCE", "1e-12"))
ATOM_TOLERANCE = float(os.getenv("ATOM_TOLERANCE", "1e-12"))
WEIGHT_TOLERANCE = float(os.getenv("WEIGHT_TOLERANCE", "1e-12"))
FIDELITY_THRESHOLD = float(os.getenv("FIDELITY_THRESHOLD", "1e-9"))
BORN_TOLERANCE = float(os.getenv("BORN_TOLERANCE", "1e-6"))
MC_SIGMA_TOLERANCE = float(os.getenv("MC_SIGMA_TOLERANCE", "5.0"))
MASS_TOLERANCE = float(os.getenv("MASS_TOLERANCE", "1e-6"))  # Normalización de densidades
MASS_CHECK_POLAR = int(os.getenv("MASS_CHECK_POLAR", "32"))
MASS_CHECK_AZIMUTHAL = int(os.getenv("MASS_CHECK_AZIMUTHAL", "64"))

# Conjuntos de prueba deterministas
BORN_PAIRS = int(os.getenv("BORN_PAIRS", "100"))
BORN_SEED = int(os.getenv("BORN_SEED", "1927"))
FIBONACCI_DIRECTIONS = int(os.getenv("FIBONACCI_DIRECTIONS", "32"))
CONNECTION_PAIRS = int(os.getenv("CONNECTION_PAIRS", "64"))

# Reducción Bell-Mermin -> Kochen-Specker
REDUCTION_SAMPLES = int(os.getenv("REDUCTION_SAMPLES", "1000000"))
REDUCTION_MIN_SAMPLES = 10_000
REDUCTION_BANDS = int(os.getenv("REDUCTION_BANDS", "64"))
REDUCTION_SIGMA = float(os.getenv("REDUCTION_SIGMA", "4.0"))
REDUCTION_DEGENERATE_NORM = 1e-12
