"""
Self-stabilizing coordination blocks built on the field-calculus runtime.
"""

from blocks.collection import gossip_collect, redundant_collect, sp_collection
from blocks.gradient import HOPS_INF, NO_REGION, abf_distance, abf_hops, closest_sink, gradient_parent, hops_inc, sink_region
from blocks.spreading import broadcast

__all__ = [
    "gossip_collect", "redundant_collect", "sp_collection",
    "HOPS_INF", "NO_REGION", "abf_distance", "abf_hops", "closest_sink", "gradient_parent", "hops_inc",
    "sink_region", "broadcast",
]
