import sys

from divmax.cli import main

sys.exit(main())
