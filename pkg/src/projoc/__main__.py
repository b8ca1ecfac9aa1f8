import sys

from projoc.cli import main

sys.exit(main())
