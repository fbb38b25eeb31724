import sys

from fracstefan.cli import main

sys.exit(main())
