"""pytest setup: make ``classifier/`` importable as the ``mdgcn_hsi`` package."""

import sys
from pathlib import Path

_CLASSIFIER = Path(__file__).resolve().parent.parent / "classifier"
if str(_CLASSIFIER) not in sys.path:
    sys.path.insert(0, str(_CLASSIFIER))
