"""``python -m weak_measurement_info``."""

import sys

from .cli import main

sys.exit(main())
