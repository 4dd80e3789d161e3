"""Seed derivation.

Every random stream in the package is obtained as
``derive_seed(parent_seed, label)``: the first 8 bytes of
``blake2b(f"{parent_seed}:{label}")`` read as an unsigned little-endian
integer. Labels are stable strings such as ``"interferer-3/fading"``, so
adding a new consumer never shifts the streams of existing ones.
"""

import hashlib

import numpy as np


def derive_seed(seed: int, label: str) -> int:
    digest = hashlib.blake2b(f"{int(seed)}:{label}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def rng_for(seed: int, label: str) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, label))
