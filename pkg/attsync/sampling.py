"""
Counter-based splitmix64 stream for reproducible random initial conditions. The stream depends only
on the 64-bit seed, never on numpy's global state or the platform.

"""

import numpy as np

MASK = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, seed: int):
        self.state = int(seed) & MASK

    def next_uint64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """in [0, 1), 53 bits"""
        return (self.next_uint64() >> 11) * 2. ** -53

    def normal(self) -> float:
        # Box-Muller, one variate per pair of uniforms
        u1 = 1. - self.uniform()
        u2 = self.uniform()
        return float(np.sqrt(-2. * np.log(u1)) * np.cos(2. * np.pi * u2))


def trial_seed(seed: int, trial: int) -> int:
    return ((int(seed) << 32) + int(trial)) & MASK


def random_axis_angle(rng: SplitMix64, max_norm: float) -> np.ndarray:
    """
    Uniform direction (normalized Gaussian triple) times a radius uniform in [0, max_norm]
    """
    while True:
        g = np.array([rng.normal(), rng.normal(), rng.normal()])
        norm = np.linalg.norm(g)
        if norm > 0:
            break
    return max_norm * rng.uniform() * g / norm


def random_state(n: int, max_norm: float, seed: int) -> np.ndarray:
    rng = SplitMix64(seed)
    return np.concatenate([random_axis_angle(rng, max_norm) for _ in range(n)])
