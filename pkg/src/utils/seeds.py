"""
Seed derivation for reproducible simulation runs.

Every random task (a replicate, a fold fit, a single tree) gets its own seed derived
from a stable 64-bit FNV-1a hash of a canonical key, so results do not depend on the
order in which tasks are executed or on the number of workers.
"""
import numpy as np

_fnv_offset = 0xCBF29CE484222325
_fnv_prime = 0x100000001B3
_mask_64 = (1 << 64) - 1
_max_seed = 1 << 63


def fnv1a_64(data):
    """64-bit FNV-1a hash.

    Args:
        data (bytes): bytes to hash.

    Returns:
        int: unsigned 64-bit hash value.
    """
    h = _fnv_offset
    for byte in data:
        h ^= byte
        h = (h * _fnv_prime) & _mask_64
    return h


def canonical_key(*parts):
    return "|".join(str(part) for part in parts)


def derive_seed(*parts):
    """Derive a 64-bit seed from the canonical ``|``-joined string of ``parts``."""
    return fnv1a_64(canonical_key(*parts).encode("utf-8"))


def make_rng(seed):
    """Counter-based generator used throughout the package."""
    return np.random.Generator(np.random.Philox(int(seed) & _mask_64))


def child_seed(rng):
    """Draw a seed for a sub-task from an existing generator."""
    return int(rng.integers(0, _max_seed))


class SeedGen(object):
    """Hands out keyed seeds below a master seed.

    Args:
        master_seed (int): seed of the whole run.

    Attributes:
        master_seed: the master seed
        issued: number of seeds handed out so far
    """

    def __init__(self, master_seed):
        self.master_seed = int(master_seed)
        self.issued = 0

    def get_single_seed(self, *key):
        self.issued += 1
        return derive_seed(*key, self.master_seed)

    def get_batch_of_seeds(self, no_seeds, *key):
        batch_of_seeds = [derive_seed(*key, index, self.master_seed) for index in range(no_seeds)]
        self.issued += no_seeds
        return batch_of_seeds

    def get_rng(self, *key):
        return make_rng(self.get_single_seed(*key))
