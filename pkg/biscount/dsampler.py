"""Monte Carlo estimation of 𝒟_A.

For a closed 2-linked component A, 𝒟 is the set of 2-linked B ⊆ A with
N(B) = N(A). Every B containing a small 2-linked cover A' of N(A) is in 𝒟, so
a uniform B ⊆ A hits 𝒟 with probability at least 2^-|A'|; the sample count is
sized from that lower bound with a multiplicative Chernoff bound.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence

import numpy as np

from biscount.bigraph import BipartiteGraph, VertexSet, iter_bits, mask_of
from biscount.contracting import ContractingSet
from biscount.errors import BudgetExceededError, RegimeError
from biscount.logging_setup import get_logger

logger = get_logger(__name__)

CHUNK = 1 << 15
SAMPLE_BUDGET = 100_000_000


@dataclass(frozen=True)
class SmallCover:
    a: VertexSet
    cover: VertexSet

    @property
    def size(self) -> int:
        return len(self.cover)


@dataclass(frozen=True)
class CoverCountEstimate:
    value: Fraction
    epsilon_prime: float
    rho: float
    samples_used: int
    hits: int
    cover_size: int


def _check_component(g: BipartiteGraph, a: VertexSet, *, closed: bool) -> None:
    if not a:
        raise RegimeError("component must be nonempty")
    if not g.is_two_linked_mask(a.mask):
        raise RegimeError(f"component {a.indices()} is not 2-linked")
    if closed and g.closure_mask(a.mask) != a.mask:
        raise RegimeError(f"component {a.indices()} is not closed")


def find_small_cover(g: BipartiteGraph, a: VertexSet) -> SmallCover:
    """Greedy 2-linked A' ⊆ A with N(A') = N(A).

    Starts at the smallest vertex of A and repeatedly adds the vertex 2-linked
    to the current set that covers the most of N(A) not yet covered, ties to
    the smallest index.
    """
    _check_component(g, a, closed=False)
    target = g.neighborhood_mask(a.mask)
    first = next(iter_bits(a.mask))
    cover = 1 << first
    covered = g.x_masks[first]
    reach = g.two_hop[first]
    while covered != target:
        best, gain = -1, -1
        for v in iter_bits(reach & a.mask & ~cover):
            new = (g.x_masks[v] & ~covered).bit_count()
            if new > gain:
                best, gain = v, new
        # A is 2-linked, so a candidate always exists until N(A) is covered
        cover |= 1 << best
        covered |= g.x_masks[best]
        reach |= g.two_hop[best]
    return SmallCover(a=a, cover=g.x_set(cover))


def sample_count(eps_prime: float, rho: float, s: int) -> int:
    """⌈3·ln(2/ρ)·2^s / ε'²⌉."""
    return math.ceil(3.0 * math.log(2.0 / rho) * (2.0 ** s) / (eps_prime * eps_prime))


def _local_two_linked(local: int, adjacency: Sequence[int]) -> bool:
    if not local:
        return False
    comp = local & -local
    frontier = comp
    while frontier:
        reach = 0
        for i in iter_bits(frontier):
            reach |= adjacency[i]
        frontier = reach & local & ~comp
        comp |= frontier
    return comp == local


def _row_masks(bits: np.ndarray) -> List[int]:
    packed = np.packbits(bits, axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def _count_hits(
    size: int,
    seed: int,
    key: int,
    chunk_index: int,
    nbr: np.ndarray,
    cover_local: np.ndarray,
    adjacency: Sequence[int],
) -> int:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(key, chunk_index)))
    bits = rng.integers(0, 2, size=(size, nbr.shape[0]), dtype=np.uint8).astype(bool)
    covers = (bits.astype(np.int32) @ nbr > 0).all(axis=1)
    sure = bits[:, cover_local].all(axis=1)
    hits = int(np.count_nonzero(sure))
    doubtful = covers & ~sure
    if doubtful.any():
        hits += sum(1 for m in _row_masks(bits[doubtful]) if _local_two_linked(m, adjacency))
    return hits


def estimate_component(
    g: BipartiteGraph,
    a: VertexSet,
    eps_prime: float,
    rho: float,
    seed: int,
    sample_budget: int = SAMPLE_BUDGET,
    workers: int = 1,
) -> CoverCountEstimate:
    """Relative ε'-approximation of |𝒟| with probability at least 1 - ρ.

    Chunks run on `workers` threads. Sampling and the cover test are numpy
    kernels that release the GIL, but the 2-linkage check on doubtful rows is
    pure Python, so scaling stays well below linear.
    """

    _check_component(g, a, closed=True)
    if not 0 < eps_prime <= 1:
        raise RegimeError(f"eps_prime must be in (0, 1], got {eps_prime}")
    if not 0 < rho < 1:
        raise RegimeError(f"rho must be in (0, 1), got {rho}")

    cover = find_small_cover(g, a)
    s = cover.size
    m = sample_count(eps_prime, rho, s)
    if m > sample_budget:
        raise BudgetExceededError(
            "sampler", sample_budget, m, hint=f"cover size s={s}, eps'={eps_prime}, rho={rho:.3g}"
        )

    members = a.indices()
    pos = {v: i for i, v in enumerate(members)}
    nbr = np.zeros((len(members), g.n), dtype=np.int32)
    for i, v in enumerate(members):
        nbr[i, list(g.x_adj[v])] = 1
    nbr = nbr[:, np.flatnonzero(nbr.any(axis=0))]
    adjacency = [mask_of(pos[u] for u in iter_bits(g.two_hop[v] & a.mask)) for v in members]
    cover_local = np.array([pos[v] for v in cover.cover], dtype=np.intp)

    # substreams are keyed by the component, not by worker, so any worker count agrees
    key = a.mask
    sizes = [min(CHUNK, m - start) for start in range(0, m, CHUNK)]

    def run(j: int) -> int:
        return _count_hits(sizes[j], seed, key, j, nbr, cover_local, adjacency)

    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(run, range(len(sizes))))
    else:
        hits = sum(run(j) for j in range(len(sizes)))

    if hits == 0:
        # every superset of the cover lies in 𝒟, so |𝒟| >= 2^(|A| - s)
        value = Fraction(1 << (len(members) - s))
        logger.warning(
            "no sample hit the cover family, using the superset lower bound",
            extra={"size": len(members), "s": s, "m": m, "value": float(value)},
        )
    else:
        value = Fraction(hits * (1 << len(members)), m)

    logger.info(
        "component estimate",
        extra={"size": len(members), "s": s, "m": m, "hits": hits, "value": float(value)},
    )
    return CoverCountEstimate(
        value=value,
        epsilon_prime=eps_prime,
        rho=rho,
        samples_used=m,
        hits=hits,
        cover_size=s,
    )


def estimate_DA(
    g: BipartiteGraph,
    a: ContractingSet,
    eps: float,
    rho: float,
    seed: int,
    sample_budget: int = SAMPLE_BUDGET,
    workers: int = 1,
) -> Fraction:
    """Product of per-component estimates; exactly 1 for A = ∅."""
    parts = len(a.components)
    if parts == 0:
        return Fraction(1)
    eps_prime = eps / (2 * max(parts, 1))
    value = Fraction(1)
    for comp in a.components:
        value *= estimate_component(
            g, comp, eps_prime, rho / parts, seed, sample_budget=sample_budget, workers=workers
        ).value
    return value


__all__ = [
    "SmallCover",
    "CoverCountEstimate",
    "find_small_cover",
    "sample_count",
    "estimate_component",
    "estimate_DA",
]
