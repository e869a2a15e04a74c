import sys

from verblunsky.cli import main

sys.exit(main())
