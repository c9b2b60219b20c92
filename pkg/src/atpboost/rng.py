import hashlib

import numpy as np


def derive_rng(seed, *keys) -> np.random.Generator:
    """Independent generator for the stream named by ``keys`` under ``seed``.

    Streams depend only on (seed, keys), never on call order, so per-theorem
    sampling gives the same result however the work is scheduled.
    """
    material = "\x1f".join([str(int(seed))] + [str(k) for k in keys])
    digest = hashlib.sha256(material.encode("utf-8")).digest()
    return np.random.default_rng(int.from_bytes(digest[:16], "little"))
