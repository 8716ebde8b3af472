import sys

from bvtate.cli import main

sys.exit(main())
