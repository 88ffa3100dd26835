import sys

from chorealloc.cli import main

sys.exit(main())
