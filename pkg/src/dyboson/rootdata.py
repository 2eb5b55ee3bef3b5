"""Distinguished root data of sl(M+1|N+1).

Nodes are 1-based, ``1 .. M+N+1``; node ``M+1`` is the unique odd node.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field


class Sector(enum.Enum):
    BOSONIC_LEFT = "BosonicLeft"
    FERMIONIC = "Fermionic"
    BOSONIC_RIGHT = "BosonicRight"


class Parity(enum.Enum):
    EVEN = 0
    ODD = 1


@dataclass(frozen=True)
class SuperCartanData:
    M: int
    N: int
    cartan: tuple[tuple[int, ...], ...] = field(repr=False)

    @property
    def rank(self) -> int:
        return self.M + self.N + 1

    @property
    def fermionic_node(self) -> int:
        return self.M + 1

    @property
    def nodes(self) -> range:
        return range(1, self.rank + 1)

    def a(self, i: int, j: int) -> int:
        self._check(i)
        self._check(j)
        return self.cartan[i - 1][j - 1]

    def parity(self, i: int) -> Parity:
        self._check(i)
        return Parity.ODD if i == self.M + 1 else Parity.EVEN

    def _check(self, i: int) -> None:
        if not 1 <= i <= self.rank:
            raise IndexError(f"node {i} out of range 1..{self.rank}")


def build_root_data(M: int, N: int) -> SuperCartanData:
    if M < 0 or N < 0:
        raise ValueError("M and N must be non-negative")
    rank = M + N + 1
    f = M + 1
    rows = []
    for i in range(1, rank + 1):
        row = []
        for j in range(1, rank + 1):
            if i == j:
                row.append(2 if i < f else (0 if i == f else -2))
            elif abs(i - j) == 1:
                # -1 on the bosonic-left block, +1 from the odd node rightwards
                row.append(-1 if min(i, j) < f else 1)
            else:
                row.append(0)
        rows.append(tuple(row))
    return SuperCartanData(M, N, tuple(rows))


def node_sector(data: SuperCartanData, i: int) -> Sector:
    data._check(i)
    if i < data.M + 1:
        return Sector.BOSONIC_LEFT
    if i == data.M + 1:
        return Sector.FERMIONIC
    return Sector.BOSONIC_RIGHT
