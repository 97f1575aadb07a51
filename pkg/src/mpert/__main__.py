import sys

from mpert.cli import main

sys.exit(main())
