"""Discrete-event simulation of the shared preemptive server.

The event loop lives in a compiled extension (``_ckernel``) with a pure-Python
twin (``_pykernel``) used when the extension is not built or when the
environment variable ``AOIPREEMPT_PURE_PYTHON`` is set.
"""
import os

from . import _pykernel

KERNEL = "python"
run_replication = _pykernel.run_replication

if not os.environ.get("AOIPREEMPT_PURE_PYTHON"):
    try:
        from . import _ckernel
    except ImportError:  # extension not built
        pass
    else:
        run_replication = _ckernel.run_replication
        KERNEL = "cython"

from .engine import (  # noqa: E402
    InvalidHorizon,
    SimConfig,
    SimResult,
    occupancy_check,
    replication_states,
    simulate,
    simulate_reduced,
)

__all__ = [
    "KERNEL",
    "InvalidHorizon",
    "SimConfig",
    "SimResult",
    "occupancy_check",
    "replication_states",
    "run_replication",
    "simulate",
    "simulate_reduced",
]
