"""Chimera hardware graph: a grid of complete bipartite cells with
same-shore links between neighboring cells, plus defect masks.

Qubit ids are row-major by cell, then shore (0 = vertical), then index
within the shore: id = ((row * n) + col) * 2l + shore * l + index.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

from .bundled import data_text


@dataclass(frozen=True)
class HardwareGraph:
    """Chimera lattice of m x n cells with shore size l and disabled elements."""

    m: int
    n: int
    l: int
    disabled_qubits: frozenset[int] = frozenset()
    disabled_couplers: frozenset[tuple[int, int]] = frozenset()

    def __post_init__(self):
        if min(self.m, self.n, self.l) < 1:
            raise ValueError("m, n, l must all be positive")
        object.__setattr__(self, "disabled_qubits", frozenset(int(q) for q in self.disabled_qubits))
        couplers = set()
        for u, v in self.disabled_couplers:
            u, v = int(u), int(v)
            couplers.add((u, v) if u < v else (v, u))
        object.__setattr__(self, "disabled_couplers", frozenset(couplers))
        for q in self.disabled_qubits:
            if not 0 <= q < self.num_qubits:
                raise ValueError(f"illegal qubit id {q}")
        for u, v in self.disabled_couplers:
            if not self.is_chimera_edge(u, v):
                raise ValueError(f"illegal coupler ({u}, {v})")

    @property
    def num_qubits(self) -> int:
        return self.m * self.n * 2 * self.l

    def qubit_id(self, row: int, col: int, shore: int, index: int) -> int:
        if not (0 <= row < self.m and 0 <= col < self.n
                and shore in (0, 1) and 0 <= index < self.l):
            raise ValueError(f"illegal coordinates ({row}, {col}, {shore}, {index})")
        return ((row * self.n) + col) * 2 * self.l + shore * self.l + index

    def qubit_coords(self, qid: int) -> tuple[int, int, int, int]:
        if not 0 <= qid < self.num_qubits:
            raise ValueError(f"illegal qubit id {qid}")
        cell, within = divmod(qid, 2 * self.l)
        row, col = divmod(cell, self.n)
        shore, index = divmod(within, self.l)
        return row, col, shore, index

    def is_chimera_edge(self, u: int, v: int) -> bool:
        """Whether (u, v) is a legal lattice edge, disabled or not."""
        if u == v or not (0 <= u < self.num_qubits and 0 <= v < self.num_qubits):
            return False
        r1, c1, s1, i1 = self.qubit_coords(u)
        r2, c2, s2, i2 = self.qubit_coords(v)
        if r1 == r2 and c1 == c2:
            return s1 != s2
        if s1 != s2 or i1 != i2:
            return False
        if s1 == 0:
            return c1 == c2 and abs(r1 - r2) == 1
        return r1 == r2 and abs(c1 - c2) == 1

    @cached_property
    def all_edges(self) -> tuple[tuple[int, int], ...]:
        """Every legal lattice edge, defect-free, as sorted id pairs."""
        edges = []
        for row in range(self.m):
            for col in range(self.n):
                for i in range(self.l):
                    vert = self.qubit_id(row, col, 0, i)
                    for j in range(self.l):
                        edges.append((vert, self.qubit_id(row, col, 1, j)))
                    if row + 1 < self.m:
                        edges.append((vert, self.qubit_id(row + 1, col, 0, i)))
                    horiz = self.qubit_id(row, col, 1, i)
                    if col + 1 < self.n:
                        edges.append((horiz, self.qubit_id(row, col + 1, 1, i)))
        return tuple(sorted(tuple(sorted(e)) for e in edges))

    @property
    def num_couplers(self) -> int:
        return len(self.all_edges)

    def is_usable_qubit(self, qid: int) -> bool:
        return 0 <= qid < self.num_qubits and qid not in self.disabled_qubits

    def is_usable_edge(self, u: int, v: int) -> bool:
        if not self.is_chimera_edge(u, v):
            return False
        if u in self.disabled_qubits or v in self.disabled_qubits:
            return False
        key = (u, v) if u < v else (v, u)
        return key not in self.disabled_couplers

    @cached_property
    def usable_qubits(self) -> tuple[int, ...]:
        return tuple(q for q in range(self.num_qubits) if q not in self.disabled_qubits)

    @cached_property
    def usable_edges(self) -> tuple[tuple[int, int], ...]:
        return tuple(e for e in self.all_edges if self.is_usable_edge(*e))

    @cached_property
    def adjacency(self) -> dict[int, tuple[int, ...]]:
        """Usable adjacency; disabled qubits do not appear at all."""
        adj: dict[int, list[int]] = {q: [] for q in self.usable_qubits}
        for u, v in self.usable_edges:
            adj[u].append(v)
            adj[v].append(u)
        return {q: tuple(sorted(nbrs)) for q, nbrs in adj.items()}

    def degree(self, qid: int) -> int:
        return len(self.adjacency[qid])


def build_chimera(m: int, n: int, l: int) -> HardwareGraph:
    """Defect-free Chimera lattice."""
    return HardwareGraph(m, n, l)


def apply_defects(hw: HardwareGraph, disabled_qubits: Iterable[int] = (),
                  disabled_couplers: Iterable[tuple[int, int]] = ()) -> HardwareGraph:
    """Disable additional qubits and couplers.

    A disabled qubit also removes its incident couplers from every usable
    view. Illegal ids are rejected.
    """
    return HardwareGraph(hw.m, hw.n, hw.l,
                         hw.disabled_qubits | frozenset(int(q) for q in disabled_qubits),
                         hw.disabled_couplers | frozenset(
                             (int(u), int(v)) for u, v in disabled_couplers))


def topology_to_json(hw: HardwareGraph, indent: int | None = None) -> str:
    return json.dumps({
        "m": hw.m, "n": hw.n, "l": hw.l,
        "disabled_qubits": sorted(hw.disabled_qubits),
        "disabled_couplers": [list(e) for e in sorted(hw.disabled_couplers)],
    }, indent=indent)


def topology_from_json(text: str) -> HardwareGraph:
    doc = json.loads(text)
    return HardwareGraph(int(doc["m"]), int(doc["n"]), int(doc["l"]),
                         frozenset(doc.get("disabled_qubits", [])),
                         frozenset(tuple(e) for e in doc.get("disabled_couplers", [])))


def bundled_defect_topology() -> HardwareGraph:
    """A 12 x 12, shore-4 lattice with 55 disabled qubits.

    Emulates the scale of a partially yielded 1152-qubit chip; the mask is
    an arbitrary fixed sample, not calibration data.
    """
    return topology_from_json(data_text("chimera_12_12_4_mask.json"))
