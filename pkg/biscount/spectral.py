"""Laplacian spectrum, threshold rank and the small-cut candidate family.

The adjacency matrix is indexed in V coordinates (X first, then Y). Low
Laplacian eigenvectors (μ ≤ d/2) span the subspace U in which every indicator
of a small cut lies up to a short orthogonal residual; an ε-net of U rounded
coordinate-wise to {0, 1} therefore lands near every small cut.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from biscount.bigraph import BipartiteGraph, Part, VertexSet, iter_bits
from biscount.errors import BudgetExceededError, ConvergenceError
from biscount.logging_setup import get_logger

logger = get_logger(__name__)

NET_EPS = math.sqrt(2.0)
NET_BUDGET = 10_000_000
BATCH = 4096
# relative slack on the lattice radius so points exactly on the sphere survive
_RADIUS_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    """Ascending Laplacian eigenpairs of L = dI - A and the threshold rank."""

    n: int
    d: int
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns, V coordinates
    k: int
    residual: float

    @property
    def size(self) -> int:
        return 2 * self.n

    @property
    def low_basis(self) -> np.ndarray:
        """Orthonormal basis of U, shape (2n, k)."""
        return self.eigenvectors[:, : self.k]


@dataclass(frozen=True)
class CutFamily:
    cuts: Tuple[VertexSet, ...]
    eps: float
    norm_bound: float
    k: int
    net_points: int

    def __len__(self) -> int:
        return len(self.cuts)

    def __iter__(self) -> Iterator[VertexSet]:
        return iter(self.cuts)

    def __contains__(self, cut: object) -> bool:
        return cut in self.cuts


def adjacency_matrix(g: BipartiteGraph) -> np.ndarray:
    n = g.n
    a = np.zeros((2 * n, 2 * n), dtype=np.float64)
    for x, y in g.edges():
        a[x, n + y] = 1.0
        a[n + y, x] = 1.0
    return a


def laplacian(g: BipartiteGraph) -> np.ndarray:
    return g.d * np.eye(2 * g.n) - adjacency_matrix(g)


def decompose(g: BipartiteGraph, tol: float = 1e-9) -> SpectralBasis:
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    lap = laplacian(g)
    try:
        mu, vecs = np.linalg.eigh(lap)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigensolver failed: {exc}", float("nan")) from exc

    residual = float(np.max(np.linalg.norm(lap @ vecs - vecs * mu, axis=0)))
    scale = float(np.linalg.norm(lap))
    if residual > tol * max(scale, 1.0):
        raise ConvergenceError("eigenpair residual above tolerance", residual)

    # ties at exactly d/2 count toward k
    k = int(np.count_nonzero(mu <= g.d / 2 + 1e-9 * g.d))
    logger.info(
        "spectral decomposition",
        extra={"size": 2 * g.n, "k": k, "residual": residual},
    )
    return SpectralBasis(n=g.n, d=g.d, eigenvalues=mu, eigenvectors=vecs, k=k, residual=residual)


def projection_residual(basis: SpectralBasis, s: VertexSet) -> float:
    """‖s - Π_U s‖² for the indicator of S."""
    if s.part is not Part.V or s.universe != basis.size:
        raise ValueError("projection_residual expects a cut over V")
    vec = np.zeros(basis.size)
    vec[s.indices()] = 1.0
    u = basis.low_basis
    rest = vec - u @ (u.T @ vec)
    return float(rest @ rest)


def net_size_bound(n: int, k: int, eps: float = NET_EPS) -> float:
    """(2√(nk)/ε)^k."""
    return (2.0 * math.sqrt(n * k) / eps) ** k


def _radius_squared(k: int, eps: float, norm_bound: float) -> int:
    """Largest integer r² with |z|·ε/√k ≤ norm_bound for |z|² ≤ r²."""
    raw = norm_bound * norm_bound * k / (eps * eps)
    return int(math.floor(raw * (1.0 + _RADIUS_SLACK) + _RADIUS_SLACK))


def lattice_point_count(k: int, r2: int) -> int:
    """#{z ∈ Z^k : |z|² ≤ r2}, by convolving squared coordinates."""
    ways = [1] + [0] * r2
    squares = [v * v for v in range(math.isqrt(r2) + 1)]
    for _ in range(k):
        nxt = [0] * (r2 + 1)
        for s, w in enumerate(ways):
            if not w:
                continue
            for i, sq in enumerate(squares):
                if s + sq > r2:
                    break
                nxt[s + sq] += w if i == 0 else 2 * w
        ways = nxt
    return sum(ways)


def _checked_radius(basis: SpectralBasis, eps: float, bound: float, budget: int) -> int:
    r2 = _radius_squared(basis.k, eps, bound)
    total = lattice_point_count(basis.k, r2)
    if total > budget:
        raise BudgetExceededError(
            "epsilon_net",
            budget,
            total,
            hint=f"k={basis.k}, bound (2√(nk)/ε)^k = {net_size_bound(basis.n, basis.k, eps):.3g}",
        )
    return r2


def _lattice_points(k: int, r2: int, first: Iterable[int]) -> Iterator[Tuple[int, ...]]:
    z = [0] * k

    def rec(i: int, rem: int) -> Iterator[Tuple[int, ...]]:
        if i == k:
            yield tuple(z)
            return
        bound = math.isqrt(rem)
        for v in range(-bound, bound + 1):
            z[i] = v
            yield from rec(i + 1, rem - v * v)

    for v in first:
        if v * v > r2:
            continue
        z[0] = v
        yield from rec(1, r2 - v * v)


def epsilon_net(
    basis: SpectralBasis,
    eps: float = NET_EPS,
    norm_bound: Optional[float] = None,
    budget: int = NET_BUDGET,
    first: Optional[Sequence[int]] = None,
) -> Iterator[np.ndarray]:
    """Stream the points Σ z_i·(ε/√k)·e_i of U with norm ≤ norm_bound.

    Yields one (2n,)-vector per lattice point; the zero vector is always among
    them. `first` restricts the first lattice coordinate (worker partitions).
    Raises BudgetExceededError before yielding anything if the net is larger
    than `budget`.
    """
    if basis.k < 1:
        raise ValueError("epsilon_net needs k >= 1")
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    bound = math.sqrt(basis.n) if norm_bound is None else norm_bound
    k = basis.k
    r2 = _checked_radius(basis, eps, bound, budget)

    scale = eps / math.sqrt(k)
    e_k = basis.low_basis
    reach = math.isqrt(r2)
    firsts = range(-reach, reach + 1) if first is None else first
    batch: List[Tuple[int, ...]] = []
    for z in _lattice_points(k, r2, firsts):
        batch.append(z)
        if len(batch) == BATCH:
            yield from (np.asarray(batch, dtype=np.float64) * scale) @ e_k.T
            batch = []
    if batch:
        yield from (np.asarray(batch, dtype=np.float64) * scale) @ e_k.T


def _pack_rows(bits: np.ndarray) -> List[bytes]:
    packed = np.packbits(bits, axis=-1, bitorder="little")
    return [row.tobytes() for row in packed]


def _key_to_mask(key: bytes) -> int:
    return int.from_bytes(key, "little")


def round_to_cut(p: Union[np.ndarray, Sequence[float]]) -> VertexSet:
    """Nearest 0/1 vector to p, ties at 1/2 going to 1."""
    vec = np.asarray(p, dtype=np.float64)
    mask = _key_to_mask(_pack_rows(vec[np.newaxis, :] >= 0.5)[0]) if vec.size else 0
    return VertexSet(Part.V, mask, int(vec.size))


def _rounded_keys(
    basis: SpectralBasis, eps: float, bound: float, first: Sequence[int]
) -> Tuple[Set[bytes], int]:
    keys: Set[bytes] = set()
    scale = eps / math.sqrt(basis.k)
    e_k = basis.low_basis
    r2 = _radius_squared(basis.k, eps, bound)
    points = 0
    batch: List[Tuple[int, ...]] = []

    def flush() -> None:
        p = (np.asarray(batch, dtype=np.float64) * scale) @ e_k.T
        keys.update(_pack_rows(p >= 0.5))

    for z in _lattice_points(basis.k, r2, first):
        batch.append(z)
        points += 1
        if len(batch) == BATCH:
            flush()
            batch = []
    if batch:
        flush()
    return keys, points


def build_cut_family(
    g: BipartiteGraph,
    basis: SpectralBasis,
    eps: float = NET_EPS,
    norm_bound: Optional[float] = None,
    budget: int = NET_BUDGET,
    workers: int = 1,
) -> CutFamily:
    """Round every ε-net point to a cut; deduplicate; order canonically.

    `workers` threads split the walk by first coordinate. The lattice walk is
    pure Python and holds the GIL, and only the batched numpy rounding runs
    concurrently, so extra workers help little. The result never depends on
    the worker count.
    """

    bound = math.sqrt(g.n) if norm_bound is None else norm_bound
    r2 = _checked_radius(basis, eps, bound, budget)

    reach = math.isqrt(r2)
    firsts = list(range(-reach, reach + 1))
    workers = max(1, min(workers, len(firsts)))
    parts = [firsts[i::workers] for i in range(workers)]

    keys: Set[bytes] = set()
    points = 0
    if workers == 1:
        keys, points = _rounded_keys(basis, eps, bound, firsts)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for part_keys, part_points in pool.map(
                lambda part: _rounded_keys(basis, eps, bound, part), parts
            ):
                keys |= part_keys
                points += part_points

    masks = sorted((_key_to_mask(k) for k in keys), key=lambda m: tuple(iter_bits(m)))
    cuts = tuple(g.v_set(m) for m in masks)
    logger.info(
        "cut family",
        extra={"net_points": points, "cuts": len(cuts), "k": basis.k, "workers": workers},
    )
    return CutFamily(cuts=cuts, eps=eps, norm_bound=bound, k=basis.k, net_points=points)


def dump_cut_family(family: CutFamily, path: Union[str, Path]) -> None:
    lines = [" ".join(str(i) for i in cut.key()) for cut in family]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


__all__ = [
    "SpectralBasis",
    "CutFamily",
    "adjacency_matrix",
    "laplacian",
    "decompose",
    "projection_residual",
    "net_size_bound",
    "lattice_point_count",
    "epsilon_net",
    "round_to_cut",
    "build_cut_family",
    "dump_cut_family",
]
