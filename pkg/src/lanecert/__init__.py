"""Local certification of graph properties on bounded-pathwidth graphs.

A centralized prover decomposes the input graph into ordered interval lanes,
rebuilds it as a bounded-depth recursive structure, and emits short per-edge
certificates; a simulated distributed verifier checks them from each vertex's
local view only.
"""

__version__ = "0.1.0"
