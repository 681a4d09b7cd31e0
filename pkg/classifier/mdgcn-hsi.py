#!/usr/bin/env python3
"""mdgcn-hsi launcher.

Runs the ``mdgcn_hsi`` command line straight from a checked-out source tree,
where the package lives next to this file under ``classifier/``. An installed
copy (``pip install .``) gets the ``mdgcn-hsi`` console script instead.
"""

import sys
from pathlib import Path

_HERE = Path(__file__).resolve().parent

if (_HERE / "mdgcn_hsi" / "__init__.py").is_file() and str(_HERE) not in sys.path:
    sys.path.insert(0, str(_HERE))

from mdgcn_hsi.cli import main  # noqa: E402

if __name__ == "__main__":
    sys.exit(main())
