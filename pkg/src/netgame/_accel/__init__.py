"""Backend selection for the hot kernels.

The compiled Cython module is preferred when it built successfully; setting
the environment variable ``NETGAME_PURE`` to a nonempty value forces the
numpy fallback (used by the benchmark and for debugging).
"""

import os

from . import pure

if os.environ.get("NETGAME_PURE"):
    _impl = pure
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = pure

BACKEND = _impl.BACKEND
project_budget_box = _impl.project_budget_box
pairwise_sqdist = _impl.pairwise_sqdist
