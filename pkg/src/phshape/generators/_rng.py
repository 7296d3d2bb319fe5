import numpy as np


def numba_seed(seed: int) -> int:
    """Map a 64-bit seed to the 32-bit state numba's np.random.seed accepts."""
    return int(np.random.SeedSequence(int(seed) & (2**64 - 1)).generate_state(1, np.uint32)[0])
