import sys

from opdam.cli import main

sys.exit(main())
