import sys

from hypquad.cli import main

sys.exit(main())
