"""Built-in heavy-hex coupling maps (undirected edge lists).

Node labels follow the vendor's qubit numbering. The 127-qubit map is the
Eagle r3 layout with 144 couplers.
"""

from __future__ import annotations

GUADALUPE_16 = [
    (0, 1), (1, 2), (1, 4), (2, 3), (3, 5), (4, 7), (5, 8), (6, 7),
    (7, 10), (8, 9), (8, 11), (10, 12), (11, 14), (12, 13), (12, 15), (13, 14),
]

FALCON_27 = GUADALUPE_16 + [
    (14, 16), (15, 18), (16, 19), (17, 18), (18, 21), (19, 20), (19, 22),
    (21, 23), (22, 25), (23, 24), (24, 25), (25, 26),
]


def _eagle_127() -> list[tuple[int, int]]:
    # rows of the lattice as (first, last) qubit of each horizontal chain
    rows = [(0, 13), (18, 32), (37, 51), (56, 70), (75, 89), (94, 108), (113, 126)]
    edges = []
    for a, b in rows:
        edges.extend((q, q + 1) for q in range(a, b))
    # bridge qubits between consecutive rows: (upper row qubit, bridge, lower row qubit)
    bridges = [
        (0, 14, 18), (4, 15, 22), (8, 16, 26), (12, 17, 30),
        (20, 33, 39), (24, 34, 43), (28, 35, 47), (32, 36, 51),
        (37, 52, 56), (41, 53, 60), (45, 54, 64), (49, 55, 68),
        (58, 71, 77), (62, 72, 81), (66, 73, 85), (70, 74, 89),
        (75, 90, 94), (79, 91, 98), (83, 92, 102), (87, 93, 106),
        (96, 109, 114), (100, 110, 118), (104, 111, 122), (108, 112, 126),
    ]
    for up, mid, low in bridges:
        edges.append((up, mid))
        edges.append((mid, low))
    return sorted(edges)


EAGLE_127 = _eagle_127()

BUILTIN_MAPS: dict[str, tuple[int, list[tuple[int, int]]]] = {
    "guadalupe-16": (16, sorted(GUADALUPE_16)),
    "falcon-27": (27, sorted(FALCON_27)),
    "eagle-127": (127, EAGLE_127),
}
