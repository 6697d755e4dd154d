#!/usr/bin/env python3
"""
gmtpool command-line entry point.

Runs the classification, reconstruction and efficiency-benchmark harnesses;
see ``gmt_cli.py --help`` or docs/index.md.
"""

# ---------------------------------------------------------------------------
# Load .env before any other application code so that pydantic-settings
# picks up the correct environment variables.
# ---------------------------------------------------------------------------
from dotenv import load_dotenv

load_dotenv()
# ---------------------------------------------------------------------------

import sys

from gmtpool.cli import main

if __name__ == "__main__":
    sys.exit(main())
