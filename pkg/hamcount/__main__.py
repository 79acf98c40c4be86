import sys

from hamcount.main import main


sys.exit(main())
