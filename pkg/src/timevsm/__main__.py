import sys

from timevsm.cli import main

sys.exit(main())
