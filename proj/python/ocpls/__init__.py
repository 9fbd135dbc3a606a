"""Python bindings for the ocpls C++ library."""

from ._ocpls import *  # noqa: F401,F403
from ._ocpls import __doc__  # noqa: F401
