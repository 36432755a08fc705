"""Stateless keyed randomness for lazily generated edge weights.

Every edge weight in a simulated power graph is a pure function of
(seed, replica, canonical edge id): the id bytes are hashed with a keyed
blake2b, the 64-bit digest becomes a uniform in the open interval (0, 1),
and inversion gives a standard exponential.  No weight table is ever
stored, queries from either endpoint of an undirected edge agree, and
runs are reproducible across platforms and thread schedules.
"""

from __future__ import annotations

import hashlib
import math

_TWO64 = 2.0 ** 64


def keyed_uniform(seed: int, payload: bytes) -> float:
    """Uniform in (0, 1), a pure function of (seed, payload)."""
    key = (seed & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "little")
    digest = hashlib.blake2b(payload, digest_size=8, key=key).digest()
    # +0.5 keeps the value strictly inside (0, 1)
    return (int.from_bytes(digest, "little") + 0.5) / _TWO64


def keyed_exponential(seed: int, payload: bytes) -> float:
    """Standard exponential draw, pure function of (seed, payload)."""
    u = keyed_uniform(seed, payload)
    return -math.log1p(-u)


def edge_payload(replica: int, tail_code: int, head_code: int,
                 edge_index: int, code_bytes: int) -> bytes:
    """Canonical byte encoding of one power-graph edge draw.

    ``tail_code``/``head_code`` are the fixed-radix encodings of the edge
    endpoints, already canonicalized (undirected edges pass the
    lexicographic min of the two directions).
    """
    return (replica.to_bytes(8, "little")
            + tail_code.to_bytes(code_bytes, "little")
            + head_code.to_bytes(code_bytes, "little")
            + edge_index.to_bytes(4, "little"))
