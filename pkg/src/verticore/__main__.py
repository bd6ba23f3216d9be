import sys

from verticore.cli import main

sys.exit(main())
