"""Allow running the CLI as `python -m gtmlab`."""

import sys

from .cli import main

sys.exit(main())
