import sys

from gmtpool.cli import main

sys.exit(main())
