"""Allow running as: python -m cprover"""

import sys

from .main import main

sys.exit(main())
