"""Random k-regular interaction graphs.

Sampling follows the stub-pairing (configuration model) approach: give
every node k stubs, pair stubs uniformly at random, keep the pairs that
form new simple edges, and re-shuffle only the stubs left dangling by
self-loops and duplicate edges.  A round that pairs off every remaining
stub yields a uniform-ish simple k-regular graph; a stuck round discards
the attempt.  Whole-graph rejection (resample everything on any
collision) is hopeless for the degrees used here, where the chance of an
all-simple pairing is astronomically small, so the repair loop is the
difference between milliseconds and never.

Graphs are immutable.  ``validate`` reports structural violations as
data instead of raising, so damaged inputs (hand-edited edge lists) can
be diagnosed; generation itself only emits graphs that validate clean.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property

import numpy as np

__all__ = [
    "RegularGraph",
    "generate_regular",
    "validate",
    "from_edge_list",
]


@dataclass(frozen=True, eq=False)
class RegularGraph:
    """Undirected k-regular graph on nodes 0..n-1.

    adjacency[v] lists v's neighbors.  Instances constructed by hand may
    break regularity or symmetry; run ``validate`` to find out.
    """

    n: int
    k: int
    adjacency: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "adjacency",
            tuple(tuple(int(w) for w in row) for row in self.adjacency),
        )
        if len(self.adjacency) != self.n:
            raise ValueError(
                f"{len(self.adjacency)} adjacency rows for n={self.n}"
            )

    @cached_property
    def neighbor_matrix(self) -> np.ndarray:
        """(n, k) int32 neighbor table for the simulation kernel.

        Only valid graphs have one; ragged adjacency raises.
        """
        if any(len(row) != self.k for row in self.adjacency):
            raise ValueError("graph is not k-regular; no neighbor matrix")
        m = np.array(self.adjacency, dtype=np.int32)
        m.setflags(write=False)
        return m

    def edges(self) -> list[tuple[int, int]]:
        """Undirected edges, each once as (min, max), sorted."""
        seen = set()
        for v, row in enumerate(self.adjacency):
            for w in row:
                seen.add((v, w) if v <= w else (w, v))
        return sorted(seen)

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        seen = bytearray(self.n)
        seen[0] = 1
        queue = deque([0])
        reached = 1
        while queue:
            v = queue.popleft()
            for w in self.adjacency[v]:
                if 0 <= w < self.n and not seen[w]:
                    seen[w] = 1
                    reached += 1
                    queue.append(w)
        return reached == self.n

    def to_edge_list(self) -> str:
        """Plain-text edge list: one 'u v' pair per line, 0-indexed, each
        undirected edge exactly once, LF line endings."""
        return "\n".join(f"{a} {b}" for a, b in self.edges()) + "\n"


def from_edge_list(
    text: str, n: int | None = None, k: int | None = None
) -> RegularGraph:
    """Parse the ``to_edge_list`` format back into a graph.

    n and k default to what the edges imply (max index + 1, degree of
    node 0); pass them explicitly to check a file against expectations
    via ``validate``.  Duplicate lines and self-loops are preserved so
    that validation can report them.
    """
    pairs = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {ln}: expected 'u v', got {raw!r}")
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise ValueError(f"line {ln}: non-integer node id in {raw!r}") from exc
        if a < 0 or b < 0:
            raise ValueError(f"line {ln}: negative node id in {raw!r}")
        pairs.append((a, b))
    if n is None:
        if not pairs:
            raise ValueError("empty edge list and no n given")
        n = max(max(a, b) for a, b in pairs) + 1
    adj: list[list[int]] = [[] for _ in range(n)]
    for a, b in pairs:
        if a >= n or b >= n:
            raise ValueError(f"edge ({a}, {b}) outside 0..{n - 1}")
        adj[a].append(b)
        if a != b:
            adj[b].append(a)
    if k is None:
        k = len(adj[0]) if adj else 0
    return RegularGraph(n=n, k=k, adjacency=tuple(tuple(r) for r in adj))


def validate(g: RegularGraph) -> list[str]:
    """Structural check; returns human-readable violations, empty if clean.

    Checks, in order: node count positive, degree bounds sane, every
    neighbor index in range, no self-loops, no duplicate neighbors,
    every edge symmetric, every node of degree exactly k.  Connectivity
    is reported by ``RegularGraph.is_connected`` but is not a validity
    requirement; regular graphs sampled here are almost always connected
    yet a disconnected one is still a legal interaction structure.
    """
    out: list[str] = []
    if g.n <= 0:
        out.append(f"node count {g.n} not positive")
        return out
    if g.k < 0 or g.k >= g.n:
        out.append(f"degree k={g.k} outside 0..{g.n - 1}")
    neighbor_sets: list[set[int]] = []
    for v, row in enumerate(g.adjacency):
        s = set()
        for w in row:
            if not (0 <= w < g.n):
                out.append(f"node {v}: neighbor {w} out of range")
                continue
            if w == v:
                out.append(f"node {v}: self-loop")
                continue
            if w in s:
                out.append(f"node {v}: duplicate neighbor {w}")
                continue
            s.add(w)
        if len(row) != g.k:
            out.append(f"node {v}: degree {len(row)} != k={g.k}")
        neighbor_sets.append(s)
    for v, s in enumerate(neighbor_sets):
        for w in s:
            if v not in neighbor_sets[w]:
                out.append(f"edge ({v}, {w}) not symmetric")
    return out


def generate_regular(
    n: int, k: int, seed: int | tuple[int, ...] | np.random.SeedSequence,
    max_retries: int = 1000,
) -> RegularGraph:
    """Sample a simple k-regular graph on n nodes, deterministically in seed.

    Preconditions: 0 < k < n and n*k even; violations raise ValueError.
    Stub pairing with per-round repair, as described in the module
    docstring; after max_retries discarded attempts raises RuntimeError
    (unreachable in practice for feasible n, k).
    """
    if int(n) != n or int(k) != k:
        raise ValueError(f"n={n!r} and k={k!r} must be integers")
    n, k = int(n), int(k)
    if n <= 0:
        raise ValueError(f"n={n} must be positive")
    if not (0 < k < n):
        raise ValueError(f"degree k={k} must satisfy 0 < k < n={n}")
    if (n * k) % 2 != 0:
        raise ValueError(f"n*k = {n * k} is odd; no k-regular graph exists")

    if isinstance(seed, np.random.SeedSequence):
        ss = seed
    else:
        ss = np.random.SeedSequence(seed)
    rng = np.random.default_rng(ss)

    for _ in range(max_retries):
        edges = _attempt_pairing(n, k, rng)
        if edges is not None:
            adj: list[list[int]] = [[] for _ in range(n)]
            for a, b in edges:
                adj[a].append(b)
                adj[b].append(a)
            return RegularGraph(
                n=n, k=k, adjacency=tuple(tuple(r) for r in adj)
            )
    raise RuntimeError(
        f"no simple {k}-regular graph on {n} nodes found in {max_retries} attempts"
    )


def _attempt_pairing(n: int, k: int, rng: np.random.Generator) -> set | None:
    """One generation attempt: pair all stubs, repairing collisions.

    Returns the edge set, or None if a repair round makes no progress
    (every remaining pairing collided, e.g. all leftover stubs belong to
    one node).
    """
    stubs = np.repeat(np.arange(n, dtype=np.int64), k)
    edges: set[tuple[int, int]] = set()
    while stubs.size:
        rng.shuffle(stubs)
        leftover = []
        for i in range(0, stubs.size, 2):
            a = int(stubs[i])
            b = int(stubs[i + 1])
            if a == b:
                leftover.append(a)
                leftover.append(b)
                continue
            e = (a, b) if a < b else (b, a)
            if e in edges:
                leftover.append(a)
                leftover.append(b)
                continue
            edges.add(e)
        if len(leftover) == stubs.size:
            return None
        stubs = np.asarray(leftover, dtype=np.int64)
    return edges
