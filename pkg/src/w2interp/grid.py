from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """Equally spaced nodes x_b = b*h, h = 1/N, on [0, 1] for space order m."""

    m: int
    N: int
    h: float = field(init=False)

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m!r}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N!r}")
        if self.N + 1 < self.m:
            raise ValueError(f"need N + 1 >= m for a unique optimal formula (m={self.m}, N={self.N})")
        object.__setattr__(self, "h", 1.0 / self.N)

    @property
    def nodes(self):
        return np.arange(self.N + 1) * self.h

    def node_index(self, z, tol=1e-12):
        """Index b with |z - b*h| <= tol, or None."""
        b = round(z * self.N)
        if 0 <= b <= self.N and abs(z - b * self.h) <= tol:
            return b
        return None

    def snap(self, z, tol=1e-12):
        """z moved onto the node it matches within ``tol``; other points unchanged."""
        b = self.node_index(z, tol)
        return z if b is None else b * self.h
