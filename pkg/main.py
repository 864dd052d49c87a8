#
# For licensing see accompanying LICENSE file.
#

import sys

sys.path.append('.')

from qme.cli import main


if __name__=='__main__':
    sys.exit(main())
