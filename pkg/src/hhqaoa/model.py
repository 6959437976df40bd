"""Heavy-hex graphs, random higher-order Ising instances and their cost function.

The cost of a spin vector ``z`` in ``{-1, +1}^n`` is::

    C(z) = sum_v d_v z_v + sum_(i,j) d_ij z_i z_j + sum_l d_l z_l z_n1(l) z_n2(l)

where the cubic terms live on the degree-2 nodes ``l`` of the ``V2`` side of
the bipartition, together with their two neighbours.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .coupling_maps import BUILTIN_MAPS
from .rng import Xoshiro256StarStar


class GraphError(ValueError):
    """Raised for coupling maps that are not heavy-hex compatible."""


class WEntry(NamedTuple):
    """A cubic-term site: degree-2 node ``l`` in V2 and its neighbours ``n1 < n2``."""

    l: int
    n1: int
    n2: int


class Term(NamedTuple):
    sites: tuple[int, ...]  # ascending
    coeff: int


@dataclass(frozen=True)
class HeavyHexGraph:
    n: int
    edges: tuple[tuple[int, int], ...]
    v2: frozenset[int]
    v3: frozenset[int]
    w_set: tuple[WEntry, ...]
    name: str = "custom"

    @property
    def nodes(self) -> range:
        return range(self.n)

    def degree(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=int)
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return deg

    def neighbors(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return [sorted(a) for a in adj]

    def counts(self) -> tuple[int, int, int]:
        """Numbers of linear, quadratic and cubic terms."""
        return self.n, len(self.edges), len(self.w_set)


def _normalize_edges(n: int, edges: Iterable[Sequence[int]]) -> list[tuple[int, int]]:
    out = set()
    for e in edges:
        if len(e) != 2:
            raise GraphError(f"edge {e!r} does not have two endpoints")
        i, j = int(e[0]), int(e[1])
        if i == j:
            raise GraphError(f"self-loop on node {i}")
        if not (0 <= i < n and 0 <= j < n):
            raise GraphError(f"edge ({i}, {j}) out of range for n={n}")
        key = (min(i, j), max(i, j))
        if key in out:
            raise GraphError(f"duplicate edge {key}")
        out.add(key)
    return sorted(out)


def derive_structure(
    n: int, edges: Iterable[Sequence[int]]
) -> tuple[frozenset[int], frozenset[int], tuple[WEntry, ...]]:
    """Split the nodes into ``(v2, v3)`` and collect the cubic-term set ``w_set``.

    Degree-3 nodes fix the side of their component. Components without a
    degree-3 node take whichever two-colouring puts more degree-2 nodes in
    ``v2``; remaining ties put the component's lowest node id in ``v2``.
    Isolated nodes therefore land in ``v2``.
    """
    edge_list = _normalize_edges(n, edges)
    adj: list[list[int]] = [[] for _ in range(n)]
    for i, j in edge_list:
        adj[i].append(j)
        adj[j].append(i)
    deg = [len(a) for a in adj]
    for v, d in enumerate(deg):
        if d > 3:
            raise GraphError(f"node {v} has degree {d} > 3")

    side = [-1] * n  # 0 -> v2, 1 -> v3
    for root in range(n):
        if side[root] != -1:
            continue
        color = {root: 0}
        order = [root]
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                if w not in color:
                    color[w] = 1 - color[u]
                    order.append(w)
                    queue.append(w)
                elif color[w] == color[u]:
                    raise GraphError(f"odd cycle through edge ({u}, {w}); graph is not bipartite")
        deg3_colors = {color[v] for v in order if deg[v] == 3}
        if len(deg3_colors) == 2:
            raise GraphError(
                f"component of node {root} has degree-3 nodes on both sides of the bipartition"
            )
        if deg3_colors:
            v3_color = deg3_colors.pop()
        else:
            deg2 = [sum(1 for v in order if deg[v] == 2 and color[v] == c) for c in (0, 1)]
            if deg2[0] != deg2[1]:
                v3_color = 0 if deg2[1] > deg2[0] else 1
            else:
                v3_color = 1  # root is the component's lowest id and has colour 0
        for v in order:
            side[v] = 1 if color[v] == v3_color else 0

    v2 = frozenset(v for v in range(n) if side[v] == 0)
    v3 = frozenset(v for v in range(n) if side[v] == 1)
    w_set = tuple(
        WEntry(l, *sorted(adj[l])) for l in sorted(v2) if deg[l] == 2
    )
    return v2, v3, w_set


def make_graph(n: int, edges: Iterable[Sequence[int]], name: str = "custom") -> HeavyHexGraph:
    edge_list = _normalize_edges(n, edges)
    v2, v3, w_set = derive_structure(n, edge_list)
    return HeavyHexGraph(n=n, edges=tuple(edge_list), v2=v2, v3=v3, w_set=w_set, name=name)


def load_coupling_map(source: str | Path) -> HeavyHexGraph:
    """Load a built-in map by name or a JSON map file ``{name, n, edges}``."""
    if isinstance(source, str) and source in BUILTIN_MAPS:
        n, edges = BUILTIN_MAPS[source]
        return make_graph(n, edges, name=source)
    path = Path(source)
    try:
        data = json.loads(path.read_text())
        n = int(data["n"])
        edges = data["edges"]
        name = str(data.get("name", path.stem))
    except FileNotFoundError:
        raise
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise GraphError(f"cannot parse coupling map {source}: {exc}") from exc
    return make_graph(n, edges, name=name)


def save_coupling_map(graph: HeavyHexGraph, path: str | Path) -> None:
    data = {"name": graph.name, "n": graph.n, "edges": [list(e) for e in graph.edges]}
    Path(path).write_text(json.dumps(data) + "\n")


@dataclass(frozen=True)
class IsingInstance:
    graph: HeavyHexGraph
    linear: Mapping[int, int]
    quadratic: Mapping[tuple[int, int], int]
    cubic: Mapping[WEntry, int]
    seed: int = 0
    _terms: tuple[Term, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        g = self.graph
        if set(self.linear) != set(g.nodes):
            raise ValueError("linear coefficients must cover exactly the graph nodes")
        if set(self.quadratic) != set(g.edges):
            raise ValueError("quadratic coefficients must cover exactly the graph edges")
        if set(self.cubic) != set(g.w_set):
            raise ValueError("cubic coefficients must cover exactly the graph w_set")
        for table in (self.linear, self.quadratic, self.cubic):
            for key, c in table.items():
                if c not in (-1, 1):
                    raise ValueError(f"coefficient {c!r} at {key} is not +-1")
        terms = [Term((v,), int(self.linear[v])) for v in g.nodes]
        terms += [Term(e, int(self.quadratic[e])) for e in g.edges]
        terms += [Term(tuple(sorted(w)), int(self.cubic[w])) for w in g.w_set]
        object.__setattr__(self, "_terms", tuple(terms))

    @property
    def n(self) -> int:
        return self.graph.n

    def terms(self) -> tuple[Term, ...]:
        """All terms (linear, then quadratic, then cubic) with ascending site tuples."""
        return self._terms

    def negated(self) -> "IsingInstance":
        return IsingInstance(
            self.graph,
            {k: -c for k, c in self.linear.items()},
            {k: -c for k, c in self.quadratic.items()},
            {k: -c for k, c in self.cubic.items()},
            self.seed,
        )


def generate_instance(graph: HeavyHexGraph, seed: int) -> IsingInstance:
    """Draw every coefficient uniformly from {-1, +1}.

    Draw order: linear terms by ascending node, quadratic terms by
    lexicographic edge, cubic terms by ascending ``l``.
    """
    rng = Xoshiro256StarStar(seed)
    linear = {v: rng.next_sign() for v in graph.nodes}
    quadratic = {e: rng.next_sign() for e in graph.edges}
    cubic = {w: rng.next_sign() for w in sorted(graph.w_set)}
    return IsingInstance(graph, linear, quadratic, cubic, seed=seed)


def uniform_instance(graph: HeavyHexGraph, value: int = 1) -> IsingInstance:
    """Instance with every coefficient equal to ``value``."""
    return IsingInstance(
        graph,
        {v: value for v in graph.nodes},
        {e: value for e in graph.edges},
        {w: value for w in graph.w_set},
    )


def evaluate_cost(instance: IsingInstance, z: Sequence[int]) -> int:
    z = [int(s) for s in z]
    if len(z) != instance.n:
        raise ValueError(f"spin vector has length {len(z)}, expected {instance.n}")
    if any(s not in (-1, 1) for s in z):
        raise ValueError("spins must be +-1")
    total = 0
    for sites, c in instance.terms():
        prod = c
        for s in sites:
            prod *= z[s]
        total += prod
    return total


def cost_parity(instance: IsingInstance) -> int:
    """Parity shared by every cost value: (#terms) mod 2."""
    return len(instance.terms()) % 2


@dataclass(frozen=True)
class EnergyBounds:
    min_energy: int
    max_energy: int
    argmin: tuple[int, ...]
    exact: bool

    def __post_init__(self):
        if self.min_energy > self.max_energy:
            raise ValueError("min_energy exceeds max_energy")


def approximation_ratio(e, bounds: EnergyBounds):
    """``(Max - e) / (Max - Min)``; works elementwise on arrays."""
    span = bounds.max_energy - bounds.min_energy
    if span <= 0:
        raise ValueError("degenerate spectrum: max_energy == min_energy")
    if np.ndim(e):
        return (bounds.max_energy - np.asarray(e, dtype=float)) / span
    return (bounds.max_energy - float(e)) / span


# --- instance files -------------------------------------------------------

def instance_to_dict(instance: IsingInstance) -> dict:
    g = instance.graph
    return {
        "map": g.name,
        "seed": int(instance.seed),
        "linear": {str(v): instance.linear[v] for v in g.nodes},
        "quadratic": {f"{i}-{j}": instance.quadratic[(i, j)] for i, j in g.edges},
        "cubic": {f"{w.l}-{w.n1}-{w.n2}": instance.cubic[w] for w in g.w_set},
    }


def instance_from_dict(data: Mapping) -> IsingInstance:
    """Rebuild an instance; the graph is recovered from the coefficient keys."""
    linear = {int(k): int(c) for k, c in data["linear"].items()}
    quadratic = {}
    for key, c in data["quadratic"].items():
        i, j = (int(x) for x in key.split("-"))
        quadratic[(min(i, j), max(i, j))] = int(c)
    n = len(linear)
    name = str(data.get("map", "custom"))
    if name in BUILTIN_MAPS and BUILTIN_MAPS[name][0] == n:
        graph = load_coupling_map(name)
        if set(graph.edges) != set(quadratic):
            graph = make_graph(n, quadratic, name=name)
    else:
        graph = make_graph(n, quadratic, name=name)
    cubic = {}
    for key, c in data["cubic"].items():
        l, n1, n2 = (int(x) for x in key.split("-"))
        cubic[WEntry(l, n1, n2)] = int(c)
    return IsingInstance(graph, linear, quadratic, cubic, seed=int(data.get("seed", 0)))


def save_instance(instance: IsingInstance, path: str | Path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(instance), indent=1) + "\n")


def load_instance(path: str | Path) -> IsingInstance:
    return instance_from_dict(json.loads(Path(path).read_text()))
