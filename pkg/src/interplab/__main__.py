"""Run the experiment CLI via ``python -m interplab``."""

import sys

from .labcli import main

if __name__ == "__main__":
    sys.exit(main())
