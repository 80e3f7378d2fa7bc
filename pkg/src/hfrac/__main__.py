import sys

from hfrac.cli import main

sys.exit(main())
