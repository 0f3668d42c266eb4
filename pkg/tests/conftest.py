import sys
from pathlib import Path

# make oracles.py / vectors.py importable from any invocation directory
sys.path.insert(0, str(Path(__file__).resolve().parent))
