"""Python access to the simulator core."""

from ._core import (
    DEFAULT_WINDOWS,
    KERNELS,
    build_kernel,
    compare_memory,
    interpret,
    run,
    simulate,
    speedup_pct,
    sweep,
    validate,
)

__all__ = [
    "DEFAULT_WINDOWS",
    "KERNELS",
    "build_kernel",
    "compare_memory",
    "interpret",
    "run",
    "simulate",
    "speedup_pct",
    "sweep",
    "validate",
]
