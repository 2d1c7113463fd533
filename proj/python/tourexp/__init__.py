"""Foreign card expenditure analytics.

Python bindings over the C++ core: transaction cube ingestion, gravity
models, origin/destination similarity spaces, map-equation community
detection, industry classification and the synthetic data generator.
"""

from ._tourexp import *  # noqa: F401,F403
from ._tourexp import __version__  # noqa: F401
