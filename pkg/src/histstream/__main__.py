import sys

from histstream.harness.cli import main

sys.exit(main())
