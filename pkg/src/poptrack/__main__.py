import sys

from poptrack.cli import main

sys.exit(main())
