import sys

from iqnkit.cli import main

sys.exit(main())
