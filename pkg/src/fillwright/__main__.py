import sys

from fillwright.cli import main

sys.exit(main())
