# src/rng.py
from typing import Optional

import numpy as np

from src.exceptions import ValidationError

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """splitmix64 finalizer (64비트 정수 -> 64비트 정수)"""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def mix_seed(seed: int, *keys: int) -> int:
    """seed와 키들(실험점 번호, 반복 번호 등)을 섞어 하위 스트림 seed 생성"""
    h = splitmix64(seed & MASK64)
    for key in keys:
        h = splitmix64(h ^ splitmix64((key + 1) & MASK64))
    return h


class RngStream:
    """재현 가능한 난수 스트림

    numpy PCG64 위에 seed 혼합 규칙만 직접 구현한다. 같은 seed로 만든
    두 스트림은 동일한 수열을 생성한다.
    """

    def __init__(self, seed: int):
        if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
            raise ValidationError(f"seed must be an integer, got {seed!r}")
        seed = int(seed)
        if seed < 0 or seed > MASK64:
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self._generator: Optional[np.random.Generator] = None

    @property
    def generator(self) -> np.random.Generator:
        if self._generator is None:
            self._generator = np.random.Generator(np.random.PCG64(self.seed))
        return self._generator

    def substream(self, *keys: int) -> "RngStream":
        """(seed, keys)로부터 독립 하위 스트림 생성"""
        return RngStream(mix_seed(self.seed, *keys))

    # ========== Draw helpers ==========

    def uniform(self, low: float = 0.0, high: float = 1.0, size=None):
        return self.generator.uniform(low, high, size)

    def normal(self, scale: float = 1.0, size=None):
        return self.generator.normal(0.0, scale, size)

    def poisson(self, lam: float) -> int:
        return int(self.generator.poisson(lam))

    def integers(self, low: int, high: int, size=None):
        """[low, high) 구간 정수"""
        return self.generator.integers(low, high, size)

    def random(self, size=None):
        return self.generator.random(size)

    def permutation(self, n: int) -> np.ndarray:
        return self.generator.permutation(n)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed})"
