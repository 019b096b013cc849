"""Counter-based RNG streams with explicit 64-bit seeds.

Philox is counter-based, so independent substreams derive from one master
seed via jumps; every sampler records its (seed, stream) provenance.
"""

from __future__ import annotations

import numpy as np


def philox_stream(seed: int, stream: int = 0) -> np.random.Generator:
    bitgen = np.random.Philox(key=np.uint64(seed))
    if stream:
        bitgen = bitgen.jumped(int(stream))
    return np.random.Generator(bitgen)


def seed_trace(seed: int, stream: int = 0) -> str:
    return f"philox(seed={int(seed)}, stream={int(stream)})"
