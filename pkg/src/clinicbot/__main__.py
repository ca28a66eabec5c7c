import sys

from clinicbot.service.cli import main

sys.exit(main())
