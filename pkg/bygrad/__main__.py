import sys

from bygrad.cli import main

sys.exit(main())
