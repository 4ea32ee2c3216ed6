import sys

from ladder_verify.cli import main

sys.exit(main())
