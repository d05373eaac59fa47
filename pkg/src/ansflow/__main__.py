import sys

from ansflow.cli import main

sys.exit(main())
