"""One-dimensional vertical grid on (-m, 0) U (0, l)."""
from dataclasses import dataclass

import numpy as np

LOWER = -1
UPPER = 1


@dataclass(frozen=True, eq=False)
class Grid1D:
    nodes: np.ndarray
    interface_index: int

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        if nodes.ndim != 1 or nodes.size < 3:
            raise ValueError("grid needs at least three nodes")
        if not np.all(np.diff(nodes) > 0):
            raise ValueError("grid nodes must be strictly increasing")
        i0 = self.interface_index
        if not 0 < i0 < nodes.size - 1 or nodes[i0] != 0.0:
            raise ValueError("interface node must be an interior node at exactly 0")

    @classmethod
    def uniform(cls, m, l, n_per_side):
        n = int(n_per_side)
        if n < 1:
            raise ValueError("n_per_side must be >= 1")
        lower = -m + m * np.arange(n + 1) / n
        lower[-1] = 0.0
        upper = l * np.arange(n + 1) / n
        return cls(np.concatenate([lower, upper[1:]]), n)

    @property
    def m(self):
        return -self.nodes[0]

    @property
    def l(self):
        return self.nodes[-1]

    @property
    def n_nodes(self):
        return self.nodes.size

    @property
    def n_elements(self):
        return self.nodes.size - 1

    @property
    def widths(self):
        return np.diff(self.nodes)

    @property
    def element_side(self):
        side = np.full(self.n_elements, UPPER)
        side[: self.interface_index] = LOWER
        return side

    def side_nodes(self, side):
        i0 = self.interface_index
        return self.nodes[: i0 + 1] if side == LOWER else self.nodes[i0:]

    def side_elements(self, side):
        i0 = self.interface_index
        return np.arange(i0) if side == LOWER else np.arange(i0, self.n_elements)
