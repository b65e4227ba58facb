import sys

from vargame.cli import main

sys.exit(main())
