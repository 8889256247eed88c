"""Charger port catalog: the ten port types, their power and observed frequency."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

POWERS_KW = (7.0, 11.0, 22.0, 30.0, 60.0, 80.0, 120.0, 150.0, 180.0, 250.0)
FREQUENCIES = (2, 20, 8, 6, 18, 11, 4, 4, 10, 1)
N_PORT_TYPES = 10


@dataclass(frozen=True)
class PortCatalog:
    powers_kw: tuple[float, ...] = POWERS_KW
    frequencies: tuple[int, ...] = FREQUENCIES

    def __post_init__(self):
        if len(self.powers_kw) != N_PORT_TYPES or len(self.frequencies) != N_PORT_TYPES:
            raise ValueError("port catalog must have exactly 10 entries")
        if any(b <= a for a, b in zip(self.powers_kw, self.powers_kw[1:])):
            raise ValueError("port powers must be strictly increasing")

    @property
    def types(self) -> range:
        return range(1, N_PORT_TYPES + 1)

    def power(self, j: int) -> float:
        self.check_type(j)
        return self.powers_kw[j - 1]

    def scale(self, j: int) -> float:
        """Sizing scale s_j = 0.1 * j, used by the sizing index."""
        self.check_type(j)
        return j / 10.0

    def probabilities(self) -> np.ndarray:
        f = np.asarray(self.frequencies, dtype=float)
        return f / f.sum()

    @staticmethod
    def check_type(j: int) -> None:
        if not isinstance(j, (int, np.integer)) or not 1 <= j <= N_PORT_TYPES:
            raise ValueError(f"port type must be an integer in 1..10, got {j!r}")


DEFAULT_CATALOG = PortCatalog()
