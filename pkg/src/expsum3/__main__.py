import sys

from expsum3.cli import main

sys.exit(main())
