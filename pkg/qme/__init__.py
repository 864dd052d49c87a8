#
# For licensing see accompanying LICENSE file.
#

__version__ = '0.1.0'
