import sys

from noetherlab.cli import main

sys.exit(main())
