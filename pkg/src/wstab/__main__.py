import sys

from wstab.cli import main

sys.exit(main())
