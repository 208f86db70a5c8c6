import sys

from forgebench_adapter.server import main

sys.exit(main())
