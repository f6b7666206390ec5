"""Regular bipartite graphs and the set combinatorics the counting identities use.

Vertices are dense 0-based indices per part. Internally every vertex set is an
int bitmask; `VertexSet` wraps a mask with its part tag for the public API.
Cuts (subsets of V = X ∪ Y) use indices 0..n-1 for X and n..2n-1 for Y, the
same order as the rows of the adjacency matrix in `spectral`.

Closure follows the standard container-method reading
[A] = {x in X : N(x) ⊆ N(A)}, so that N([A]) = N(A) and A is closed iff every
2-linked component of A is closed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Callable, Iterable, Iterator, List, Sequence, Tuple, Union

import numpy as np

from biscount.errors import (
    GenerationError,
    GraphFormatError,
    GraphInvariantError,
    PartMismatchError,
)
from biscount.logging_setup import get_logger

logger = get_logger(__name__)

MAX_REJECTIONS = 10_000
REPAIR_PASSES = 100
CLOSURE_CACHE_SIZE = 1 << 16


class Part(str, Enum):
    X = "X"
    Y = "Y"
    V = "V"


def iter_bits(mask: int) -> Iterator[int]:
    """Indices of the set bits of `mask`, ascending."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << i
    return mask


@dataclass(frozen=True)
class VertexSet:
    """Subset of one part (or of V) with exact set algebra."""

    part: Part
    mask: int
    universe: int

    def __post_init__(self):
        if self.mask < 0 or self.mask >> self.universe:
            raise PartMismatchError(
                f"mask has members outside 0..{self.universe - 1} for part {self.part.value}"
            )

    @classmethod
    def from_indices(cls, part: Part, indices: Iterable[int], universe: int) -> "VertexSet":
        return cls(part, mask_of(indices), universe)

    @classmethod
    def empty(cls, part: Part, universe: int) -> "VertexSet":
        return cls(part, 0, universe)

    @classmethod
    def full(cls, part: Part, universe: int) -> "VertexSet":
        return cls(part, (1 << universe) - 1, universe)

    def indices(self) -> List[int]:
        return list(iter_bits(self.mask))

    def key(self) -> Tuple[int, ...]:
        """Canonical encoding: the sorted index tuple."""
        return tuple(iter_bits(self.mask))

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __bool__(self) -> bool:
        return self.mask != 0

    def __contains__(self, index: int) -> bool:
        return 0 <= index < self.universe and bool(self.mask >> index & 1)

    def __iter__(self) -> Iterator[int]:
        return iter_bits(self.mask)

    def _same_part(self, other: "VertexSet") -> None:
        if self.part is not other.part or self.universe != other.universe:
            raise PartMismatchError(
                f"cannot combine {self.part.value}-set with {other.part.value}-set"
            )

    def union(self, other: "VertexSet") -> "VertexSet":
        self._same_part(other)
        return VertexSet(self.part, self.mask | other.mask, self.universe)

    def intersection(self, other: "VertexSet") -> "VertexSet":
        self._same_part(other)
        return VertexSet(self.part, self.mask & other.mask, self.universe)

    def difference(self, other: "VertexSet") -> "VertexSet":
        self._same_part(other)
        return VertexSet(self.part, self.mask & ~other.mask, self.universe)

    def symmetric_difference(self, other: "VertexSet") -> "VertexSet":
        self._same_part(other)
        return VertexSet(self.part, self.mask ^ other.mask, self.universe)

    def sym_diff_size(self, other: "VertexSet") -> int:
        """|S △ T|."""
        self._same_part(other)
        return (self.mask ^ other.mask).bit_count()

    def issubset(self, other: "VertexSet") -> bool:
        self._same_part(other)
        return self.mask & ~other.mask == 0

    __or__ = union
    __and__ = intersection
    __sub__ = difference
    __xor__ = symmetric_difference
    __le__ = issubset

    def __repr__(self) -> str:
        return f"VertexSet({self.part.value}, {self.indices()})"


@dataclass(frozen=True)
class DeltaParam:
    """Density δ with d = ⌊δn⌋; for a concrete graph δ = d/n."""

    delta: Fraction

    def degree_for(self, n: int) -> int:
        return int(self.delta * n)


@dataclass(frozen=True, eq=False)
class BipartiteGraph:
    """Immutable d-regular bipartite graph on X = {0..n-1}, Y = {0..n-1}.

    `x_adj[x]` is the sorted neighbour list of x in Y and `y_adj[y]` the sorted
    neighbour list of y in X. Use `from_edges` to build one from an edge list.
    """

    n: int
    d: int
    x_adj: Tuple[Tuple[int, ...], ...]
    y_adj: Tuple[Tuple[int, ...], ...]
    x_masks: Tuple[int, ...] = field(init=False, repr=False)
    y_masks: Tuple[int, ...] = field(init=False, repr=False)
    two_hop: Tuple[int, ...] = field(init=False, repr=False)
    _closure: Callable[[int], int] = field(init=False, repr=False)

    def __post_init__(self):
        n, d = self.n, self.d
        if n < 1:
            raise GraphInvariantError(f"n must be at least 1, got {n}")
        if not 1 <= d <= n:
            raise GraphInvariantError(f"degree must satisfy 1 <= d <= n, got d={d}, n={n}")
        if len(self.x_adj) != n or len(self.y_adj) != n:
            raise GraphInvariantError("adjacency lists must have one entry per vertex")

        reverse: List[List[int]] = [[] for _ in range(n)]
        for x, nbrs in enumerate(self.x_adj):
            if len(nbrs) != d:
                raise GraphInvariantError(f"vertex X{x} has degree {len(nbrs)}, expected {d}")
            if len(set(nbrs)) != len(nbrs):
                raise GraphInvariantError(f"vertex X{x} has a parallel edge")
            if list(nbrs) != sorted(nbrs):
                raise GraphInvariantError(f"neighbours of X{x} are not sorted")
            for y in nbrs:
                if not 0 <= y < n:
                    raise GraphInvariantError(f"edge X{x}-Y{y} out of range")
                reverse[y].append(x)
        for y, nbrs in enumerate(self.y_adj):
            if tuple(nbrs) != tuple(reverse[y]):
                raise GraphInvariantError(f"forward and reverse adjacency disagree at Y{y}")

        x_masks = tuple(mask_of(nbrs) for nbrs in self.x_adj)
        y_masks = tuple(mask_of(nbrs) for nbrs in self.y_adj)
        object.__setattr__(self, "x_masks", x_masks)
        object.__setattr__(self, "y_masks", y_masks)
        object.__setattr__(
            self, "two_hop", tuple(self.x_neighborhood_mask(m) for m in x_masks)
        )
        object.__setattr__(
            self, "_closure", lru_cache(maxsize=CLOSURE_CACHE_SIZE)(self._closure_uncached)
        )

    @classmethod
    def from_edges(cls, n: int, d: int, edges: Iterable[Tuple[int, int]]) -> "BipartiteGraph":
        x_lists: List[set] = [set() for _ in range(max(n, 0))]
        y_lists: List[List[int]] = [[] for _ in range(max(n, 0))]
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise GraphInvariantError(f"edge ({u}, {v}) out of range for n={n}")
            if v in x_lists[u]:
                raise GraphInvariantError(f"duplicate edge ({u}, {v})")
            x_lists[u].add(v)
            y_lists[v].append(u)
        return cls(
            n=n,
            d=d,
            x_adj=tuple(tuple(sorted(s)) for s in x_lists),
            y_adj=tuple(tuple(sorted(s)) for s in y_lists),
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BipartiteGraph):
            return NotImplemented
        return self.n == other.n and self.d == other.d and self.x_adj == other.x_adj

    def __hash__(self) -> int:
        return hash((self.n, self.d, self.x_adj))

    @property
    def full_x(self) -> int:
        return (1 << self.n) - 1

    @property
    def full_y(self) -> int:
        return (1 << self.n) - 1

    @property
    def num_edges(self) -> int:
        return self.n * self.d

    def edges(self) -> Iterator[Tuple[int, int]]:
        for x, nbrs in enumerate(self.x_adj):
            for y in nbrs:
                yield x, y

    # -- mask-level helpers (hot path) ---------------------------------------

    def neighborhood_mask(self, a_mask: int) -> int:
        """N(A) as a Y-mask for an X-mask A."""
        out = 0
        x_masks = self.x_masks
        for x in iter_bits(a_mask):
            out |= x_masks[x]
        return out

    def x_neighborhood_mask(self, b_mask: int) -> int:
        """N(B) as an X-mask for a Y-mask B."""
        out = 0
        y_masks = self.y_masks
        for y in iter_bits(b_mask):
            out |= y_masks[y]
        return out

    def _closure_uncached(self, a_mask: int) -> int:
        # x is outside [A] exactly when it has a neighbour outside N(A)
        outside = self.full_y & ~self.neighborhood_mask(a_mask)
        return self.full_x & ~self.x_neighborhood_mask(outside)

    def closure_mask(self, a_mask: int) -> int:
        return self._closure(a_mask)

    def component_masks(self, a_mask: int) -> List[int]:
        """2-linked components of A, ordered by smallest member."""
        comps = []
        rest = a_mask
        two_hop = self.two_hop
        while rest:
            comp = rest & -rest
            frontier = comp
            while frontier:
                reach = 0
                for x in iter_bits(frontier):
                    reach |= two_hop[x]
                frontier = reach & rest & ~comp
                comp |= frontier
            comps.append(comp)
            rest &= ~comp
        return comps

    def is_two_linked_mask(self, a_mask: int) -> bool:
        if not a_mask:
            return False
        return self.component_masks(a_mask)[0] == a_mask

    def x_set(self, mask: int) -> VertexSet:
        return VertexSet(Part.X, mask, self.n)

    def y_set(self, mask: int) -> VertexSet:
        return VertexSet(Part.Y, mask, self.n)

    def v_set(self, mask: int) -> VertexSet:
        return VertexSet(Part.V, mask, 2 * self.n)

    def cut_of(self, x_mask: int, y_mask: int) -> VertexSet:
        """The cut (X-part) ∪ (Y-part) in V coordinates."""
        return self.v_set(x_mask | (y_mask << self.n))

    def split_cut(self, c: VertexSet) -> Tuple[int, int]:
        """(C ∩ X, C ∩ Y) as an X-mask and a Y-mask."""
        if c.part is not Part.V or c.universe != 2 * self.n:
            raise PartMismatchError("expected a cut over V = X ∪ Y")
        return c.mask & self.full_x, c.mask >> self.n


def _require(part: Part, s: VertexSet, g: BipartiteGraph) -> None:
    universe = 2 * g.n if part is Part.V else g.n
    if s.part is not part or s.universe != universe:
        raise PartMismatchError(f"expected a {part.value}-side set, got {s.part.value}-side")


def neighbors(g: BipartiteGraph, a: VertexSet) -> VertexSet:
    """N(A) ⊆ Y for A ⊆ X."""
    _require(Part.X, a, g)
    return g.y_set(g.neighborhood_mask(a.mask))


def second_neighbors(g: BipartiteGraph, a: VertexSet) -> VertexSet:
    """N²(A) = N(N(A)) ⊆ X."""
    _require(Part.X, a, g)
    return g.x_set(g.x_neighborhood_mask(g.neighborhood_mask(a.mask)))


def closure(g: BipartiteGraph, a: VertexSet) -> VertexSet:
    _require(Part.X, a, g)
    return g.x_set(g.closure_mask(a.mask))


def is_closed(g: BipartiteGraph, a: VertexSet) -> bool:
    _require(Part.X, a, g)
    return g.closure_mask(a.mask) == a.mask


def is_t_contracting(g: BipartiteGraph, a: VertexSet, t: int) -> bool:
    """|N(A)| < |[A]| + t."""
    _require(Part.X, a, g)
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    return g.neighborhood_mask(a.mask).bit_count() < g.closure_mask(a.mask).bit_count() + t


def two_linked_components(g: BipartiteGraph, a: VertexSet) -> List[VertexSet]:
    _require(Part.X, a, g)
    return [g.x_set(m) for m in g.component_masks(a.mask)]


def is_two_linked(g: BipartiteGraph, a: VertexSet) -> bool:
    _require(Part.X, a, g)
    return g.is_two_linked_mask(a.mask)


def cut_value(g: BipartiteGraph, c: VertexSet) -> int:
    """|∇(C)|: edges with exactly one endpoint in C."""
    _require(Part.V, c, g)
    cx, cy = g.split_cut(c)
    total = 0
    for x, nbrs in enumerate(g.x_masks):
        if cx >> x & 1:
            total += (nbrs & ~cy).bit_count()
        else:
            total += (nbrs & cy).bit_count()
    return total


def delta(g: BipartiteGraph) -> DeltaParam:
    return DeltaParam(Fraction(g.d, g.n))


# -- named instances ----------------------------------------------------------


def complete_bipartite(n: int) -> BipartiteGraph:
    return BipartiteGraph.from_edges(n, n, ((x, y) for x in range(n) for y in range(n)))


def cycle(m: int) -> BipartiteGraph:
    """C_{2m} with x_i ~ y_i and x_i ~ y_{i+1 mod m}."""
    if m < 2:
        raise GraphInvariantError("a simple even cycle needs m >= 2")
    return BipartiteGraph.from_edges(m, 2, ((i, j) for i in range(m) for j in (i, (i + 1) % m)))


def disjoint_union(g: BipartiteGraph, h: BipartiteGraph) -> BipartiteGraph:
    if g.d != h.d:
        raise GraphInvariantError(f"cannot union graphs of degree {g.d} and {h.d}")
    shifted = ((x + g.n, y + g.n) for x, y in h.edges())
    return BipartiteGraph.from_edges(g.n + h.n, g.d, list(g.edges()) + list(shifted))


# -- random generation --------------------------------------------------------


def _repair_matching(perm: np.ndarray, used: List[int], rng: np.random.Generator) -> bool:
    n = len(perm)
    for _ in range(REPAIR_PASSES):
        bad = [x for x in range(n) if used[x] >> int(perm[x]) & 1]
        if not bad:
            return True
        for x in bad:
            j = int(rng.integers(n))
            perm[x], perm[j] = perm[j], perm[x]
    return False


def generate_regular(
    n: int, d: int, seed: int, max_rejections: int = MAX_REJECTIONS
) -> BipartiteGraph:
    """Random simple d-regular bipartite graph as a union of d perfect matchings.

    Each matching starts as a random permutation; collisions with edges already
    placed are repaired by random swaps and, failing that, the matching is
    redrawn. Deterministic given `seed`.
    """
    if not 1 <= d <= n:
        raise GraphInvariantError(f"degree must satisfy 1 <= d <= n, got d={d}, n={n}")
    rng = np.random.default_rng(seed)
    used = [0] * n
    rejections = 0
    for _ in range(d):
        while True:
            perm = rng.permutation(n)
            if _repair_matching(perm, used, rng):
                break
            rejections += 1
            if rejections >= max_rejections:
                raise GenerationError(
                    f"gave up after {rejections} rejected matchings (n={n}, d={d}, seed={seed})"
                )
        for x in range(n):
            used[x] |= 1 << int(perm[x])

    logger.debug("generated graph", extra={"n": n, "d": d, "seed": seed, "rejections": rejections})
    x_adj = tuple(tuple(iter_bits(m)) for m in used)
    y_lists: List[List[int]] = [[] for _ in range(n)]
    for x, nbrs in enumerate(x_adj):
        for y in nbrs:
            y_lists[y].append(x)
    return BipartiteGraph(n=n, d=d, x_adj=x_adj, y_adj=tuple(tuple(v) for v in y_lists))


# -- edge-list I/O ------------------------------------------------------------


def _parse_pair(line: str, lineno: int) -> Tuple[int, int]:
    parts = line.split()
    if len(parts) != 2:
        raise GraphFormatError(f"expected two integers, got {line!r}", lineno)
    try:
        return int(parts[0]), int(parts[1])
    except ValueError:
        raise GraphFormatError(f"expected two integers, got {line!r}", lineno) from None


def parse_edge_list(text: str) -> BipartiteGraph:
    """Parse the "n d" header + n·d "u v" lines format."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise GraphFormatError("missing header", 1)

    n, d = _parse_pair(lines[0], 1)
    if n < 1 or not 1 <= d <= n:
        raise GraphFormatError(f"header needs n >= 1 and 1 <= d <= n, got n={n}, d={d}", 1)

    x_deg = [0] * n
    y_deg = [0] * n
    seen = set()
    edges = []
    for lineno, line in enumerate(lines[1:], start=2):
        u, v = _parse_pair(line, lineno)
        if not (0 <= u < n and 0 <= v < n):
            raise GraphFormatError(f"edge ({u}, {v}) out of range 0..{n - 1}", lineno)
        if (u, v) in seen:
            raise GraphFormatError(f"duplicate edge ({u}, {v})", lineno)
        seen.add((u, v))
        x_deg[u] += 1
        y_deg[v] += 1
        if x_deg[u] > d:
            raise GraphFormatError(f"vertex X{u} exceeds degree {d}", lineno)
        if y_deg[v] > d:
            raise GraphFormatError(f"vertex Y{v} exceeds degree {d}", lineno)
        edges.append((u, v))

    eof = len(lines) + 1
    for label, degs in (("X", x_deg), ("Y", y_deg)):
        for i, k in enumerate(degs):
            if k != d:
                raise GraphFormatError(f"vertex {label}{i} has degree {k}, expected {d}", eof)
    return BipartiteGraph.from_edges(n, d, edges)


def format_edge_list(g: BipartiteGraph) -> str:
    rows = [f"{g.n} {g.d}"]
    rows.extend(f"{x} {y}" for x, y in g.edges())
    return "\n".join(rows) + "\n"


def read_graph(path: Union[str, Path]) -> BipartiteGraph:
    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        line = raw[: exc.start].count(b"\n") + 1
        raise GraphFormatError("file is not valid UTF-8 text", line) from None
    return parse_edge_list(text)


def write_graph(g: BipartiteGraph, path: Union[str, Path]) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_edge_list(g))


# -- vectorised subset scans (oracles) -----------------------------------------

_POPCOUNT8 = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)


def popcount_array(values: np.ndarray) -> np.ndarray:
    """Element-wise popcount of an unsigned integer array."""
    as_bytes = values.view(np.uint8).reshape(values.shape + (values.itemsize,))
    return _POPCOUNT8[as_bytes].sum(axis=-1, dtype=np.int64)


def subset_neighborhood_masks(g: BipartiteGraph, xs: Sequence[int]) -> np.ndarray:
    """N(B) for every B ⊆ xs, indexed by the local bitmask of B over `xs`."""
    if g.n > 64:
        raise ValueError("subset scans need n <= 64")
    dtype = np.uint32 if g.n <= 32 else np.uint64
    masks = np.zeros(1, dtype=dtype)
    for x in xs:
        masks = np.concatenate([masks, masks | dtype(g.x_masks[x])])
    return masks


__all__ = [
    "Part",
    "VertexSet",
    "DeltaParam",
    "BipartiteGraph",
    "iter_bits",
    "mask_of",
    "neighbors",
    "second_neighbors",
    "closure",
    "is_closed",
    "is_t_contracting",
    "two_linked_components",
    "is_two_linked",
    "cut_value",
    "delta",
    "complete_bipartite",
    "cycle",
    "disjoint_union",
    "generate_regular",
    "parse_edge_list",
    "format_edge_list",
    "read_graph",
    "write_graph",
    "popcount_array",
    "subset_neighborhood_masks",
]
