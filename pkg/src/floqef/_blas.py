"""Best-effort OpenBLAS thread clamp for worker processes.

Grid precompute and ensemble workers parallelize over independent tasks;
letting each forked worker also spin up BLAS threads just oversubscribes
the cores. No-op when the symbol cannot be found.
"""

import ctypes
import glob
import os

import numpy as np

_SYMBOLS = ("scipy_openblas_set_num_threads64_", "openblas_set_num_threads64_",
            "openblas_set_num_threads")


def set_blas_threads(n: int) -> bool:
    candidates = glob.glob(os.path.join(os.path.dirname(np.__file__) + ".libs",
                                        "*openblas*"))
    candidates.append(None)  # fall back to globally loaded symbols
    for path in candidates:
        try:
            lib = ctypes.CDLL(path)
        except OSError:
            continue
        for sym in _SYMBOLS:
            fn = getattr(lib, sym, None)
            if fn is not None:
                fn(int(n))
                return True
    return False
