"""
Field-calculus runtime: rounds, exports, builtins and aggregate processes.
"""

from calculus.builtins import (
    aggregate, aligned_branch, argmin_hood, fold_hood, map_hood, min_hood, mod_self, mux, nbr,
    nbr_dist, nbr_uid, old, self_of,
)
from calculus.codec import SerializationError, decode_value, encode_value
from calculus.context import RoundContext, RuntimeOptions, SensorSnapshot, execute_round
from calculus.export import Export, message_size
from calculus.field import DeviceId, NbrField
from calculus.processes import ProcessKeyCollisionError, ProcessRecord, Status, process_lifecycle_step, spawn
from calculus.trace import Tag, TraceCollisionError, TraceKey

__all__ = [
    "aggregate", "aligned_branch", "argmin_hood", "fold_hood", "map_hood", "min_hood", "mod_self", "mux",
    "nbr", "nbr_dist", "nbr_uid", "old", "self_of",
    "SerializationError", "decode_value", "encode_value",
    "RoundContext", "RuntimeOptions", "SensorSnapshot", "execute_round",
    "Export", "message_size",
    "DeviceId", "NbrField",
    "ProcessKeyCollisionError", "ProcessRecord", "Status", "process_lifecycle_step", "spawn",
    "Tag", "TraceCollisionError", "TraceKey",
]
