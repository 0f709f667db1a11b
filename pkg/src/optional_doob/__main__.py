"""Allow ``python -m optional_doob``."""

import sys

from .cli import main

sys.exit(main())
