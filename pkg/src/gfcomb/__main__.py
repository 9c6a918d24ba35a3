import sys

from gfcomb.cli import main

sys.exit(main())
