"""Counter-based random streams.

Every consumer of randomness gets its own Philox stream keyed by
(seed, family, index0, index1). Streams are independent of how work is
chunked across threads, which is what makes experiment outputs
byte-identical at any thread count.

Families partition the uses so that e.g. main-path noise never collides
with the shared copy pool or nested sub-simulation draws.
"""

import numpy as np

# stream families
MAIN_PATHS = 1
COPY_POOL = 2
PREPASS = 3
NESTED = 4

_MASK64 = (1 << 64) - 1


def substream(seed, family, index0=0, index1=0):
    """Generator for the (seed, family, index0, index1) stream.

    The pair (index0, index1) occupies the high counter words of a
    Philox-4x64 state, so streams never overlap as long as a single
    stream draws fewer than 2**128 values.
    """
    key = np.array([int(seed) & _MASK64, int(family) & _MASK64], dtype=np.uint64)
    counter = np.array([0, 0, int(index0) & _MASK64, int(index1) & _MASK64],
                       dtype=np.uint64)
    return np.random.Generator(np.random.Philox(counter=counter, key=key))


def normal_rows(seed, family, indices, n_cols):
    """Matrix whose row k is n_cols standard normals from stream indices[k].

    Row content depends only on (seed, family, index), never on the other
    rows, so any batch decomposition reproduces the same matrix.
    """
    out = np.empty((len(indices), n_cols))
    for k, idx in enumerate(indices):
        out[k] = substream(seed, family, idx).standard_normal(n_cols)
    return out
