"""Run the command-line interface with ``python -m envycake``."""
import sys

from .cli import main

sys.exit(main())
