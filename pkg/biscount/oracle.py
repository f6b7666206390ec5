"""Exact reference computations for desk-scale instances.

Everything here is exponential and guarded by explicit size limits. The
functions back the `verify` command and the test suite; none of them is used
by the approximation pipeline.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Sequence, Tuple

import numpy as np

from biscount.bigraph import (
    BipartiteGraph,
    VertexSet,
    cut_value,
    iter_bits,
    mask_of,
    popcount_array,
    subset_neighborhood_masks,
)
from biscount.contracting import build_family
from biscount.engine import EXACT_LIMIT, brute_force_count
from biscount.errors import SizeLimitError
from biscount.logging_setup import get_logger
from biscount.spectral import build_cut_family, decompose

logger = get_logger(__name__)

DA_LIMIT = 20
FAMILY_LIMIT = 8
XI_LIMIT = 16
IS_LIMIT = 40  # vertices, for the branching counter
SAMPLE_LIMIT = 64  # |V|, so sampled cuts fit in uint64
COVER_SAMPLES = 10_000


def exact_count(g: BipartiteGraph, limit: int = EXACT_LIMIT) -> int:
    return brute_force_count(g, limit)


def count_independent_sets(g: BipartiteGraph, limit: int = IS_LIMIT) -> int:
    """i(G) by branching on vertices of V: skip v, or take v and drop N(v)."""
    size = 2 * g.n
    if size > limit:
        raise SizeLimitError("independent_set_count", limit, size)
    nbrs = [g.x_masks[x] << g.n for x in range(g.n)] + list(g.y_masks)

    @lru_cache(maxsize=None)
    def count(alive: int) -> int:
        if not alive:
            return 1
        v = (alive & -alive).bit_length() - 1
        rest = alive & ~(1 << v)
        return count(rest) + count(rest & ~nbrs[v])

    total = count((1 << size) - 1)
    count.cache_clear()
    return total


def _two_linked_flags(local: np.ndarray, adjacency: Sequence[int]) -> np.ndarray:
    """Element-wise: is the local bitmask 2-linked under `adjacency`."""
    dtype = local.dtype.type
    comp = local & (~local + dtype(1))  # lowest set bit
    while True:
        reach = np.zeros_like(local)
        for i, adj in enumerate(adjacency):
            has = ((comp >> dtype(i)) & dtype(1)).astype(bool)
            reach[has] |= dtype(adj)
        grown = comp | (reach & local)
        if np.array_equal(grown, comp):
            break
        comp = grown
    return (comp == local) & (local != 0)


def count_covering_subsets(g: BipartiteGraph, a: VertexSet, limit: int = DA_LIMIT) -> int:
    """#{B ⊆ A : B 2-linked, N(B) = N(A)}."""
    members = a.indices()
    if len(members) > limit:
        raise SizeLimitError("exact_DA", limit, len(members))
    if not members:
        return 0
    target = g.neighborhood_mask(a.mask)
    nb = subset_neighborhood_masks(g, members)
    dtype = np.uint32 if len(members) <= 32 else np.uint64
    local = np.arange(1 << len(members), dtype=dtype)[nb == nb.dtype.type(target)]
    pos = {v: i for i, v in enumerate(members)}
    adjacency = [mask_of(pos[u] for u in iter_bits(g.two_hop[v] & a.mask)) for v in members]
    return int(np.count_nonzero(_two_linked_flags(local, adjacency)))


def exact_DA(g: BipartiteGraph, a: VertexSet, limit: int = DA_LIMIT) -> int:
    """𝒟_A: product over the 2-linked components of A; 1 for A = ∅."""
    if len(a) > limit:
        raise SizeLimitError("exact_DA", limit, len(a))
    value = 1
    for comp in g.component_masks(a.mask):
        value *= count_covering_subsets(g, g.x_set(comp), limit)
    return value


def exact_family(g: BipartiteGraph, t0: int, limit: int = FAMILY_LIMIT) -> List[VertexSet]:
    """All A ⊆ X whose 2-linked components are closed and t0-contracting."""
    if g.n > limit:
        raise SizeLimitError("exact_family", limit, g.n)
    out = []
    for a in range(1 << g.n):
        if all(
            g.closure_mask(comp) == comp
            and g.neighborhood_mask(comp).bit_count() < comp.bit_count() + t0
            for comp in g.component_masks(a)
        ):
            out.append(a)
    out.sort(key=lambda m: tuple(iter_bits(m)))
    return [g.x_set(m) for m in out]


@dataclass(frozen=True)
class Polymer:
    b: VertexSet
    neighborhood: VertexSet
    closure_size: int

    @property
    def excess(self) -> int:
        """|N(B)| - |[B]|."""
        return len(self.neighborhood) - self.closure_size


@dataclass(frozen=True)
class PolymerModelSnapshot:
    anchor: VertexSet
    region_x: VertexSet
    region_y: VertexSet
    t0: int
    polymers: Tuple[Polymer, ...] = field(repr=False)
    xi: Fraction


def _compatible_sum(polymers: Sequence[Polymer]) -> Fraction:
    """Σ over pairwise neighbourhood-disjoint subsets of Π 2^-|N(B)|."""
    nbs = [p.neighborhood.mask for p in polymers]
    weights = [Fraction(1, 1 << len(p.neighborhood)) for p in polymers]

    @lru_cache(maxsize=None)
    def total(i: int, used: int) -> Fraction:
        if i == len(nbs):
            return Fraction(1)
        skip = total(i + 1, used)
        if nbs[i] & used:
            return skip
        return skip + weights[i] * total(i + 1, used | nbs[i])

    value = total(0, 0)
    total.cache_clear()
    return value


def polymer_snapshot(
    g: BipartiteGraph, a: VertexSet, t0: int, limit: int = XI_LIMIT
) -> PolymerModelSnapshot:
    """Polymers of X_A = X∖N²(A) that are not t0-contracting, and Ξ_A."""
    n_a = g.neighborhood_mask(a.mask)
    region_x = g.full_x & ~g.x_neighborhood_mask(n_a)
    region_y = g.full_y & ~n_a
    size = region_x.bit_count()
    if size > limit:
        raise SizeLimitError("exact_xi", limit, size)

    members = list(iter_bits(region_x))
    polymers = []
    for local in range(1, 1 << size):
        b = mask_of(members[i] for i in iter_bits(local))
        if not g.is_two_linked_mask(b):
            continue
        nb = g.neighborhood_mask(b)
        closure_size = g.closure_mask(b).bit_count()
        if nb.bit_count() >= closure_size + t0:
            polymers.append(Polymer(b=g.x_set(b), neighborhood=g.y_set(nb), closure_size=closure_size))

    xi = _compatible_sum(polymers)
    return PolymerModelSnapshot(
        anchor=a,
        region_x=g.x_set(region_x),
        region_y=g.y_set(region_y),
        t0=t0,
        polymers=tuple(polymers),
        xi=xi,
    )


def exact_xi(g: BipartiteGraph, a: VertexSet, t0: int, limit: int = XI_LIMIT) -> Fraction:
    return polymer_snapshot(g, a, t0, limit).xi


def expansion_profile(snapshot: PolymerModelSnapshot) -> Dict[Tuple[int, int], int]:
    """(|N(B)|, |N(B)| - |[B]|) -> number of listed polymers."""
    return dict(Counter((len(p.neighborhood), p.excess) for p in snapshot.polymers))


@dataclass(frozen=True)
class IdentityTerm:
    a: VertexSet
    d_a: int
    weight: int
    xi: Fraction

    @property
    def value(self) -> Fraction:
        return self.d_a * self.weight * self.xi


def identity_terms(g: BipartiteGraph, t0: int) -> List[IdentityTerm]:
    """(A, 𝒟_A, 2^{|Y∖N(A)|}, Ξ_A) for every A in the exact family."""
    terms = []
    for a in exact_family(g, t0):
        weight = 1 << (g.n - g.neighborhood_mask(a.mask).bit_count())
        terms.append(IdentityTerm(a=a, d_a=exact_DA(g, a), weight=weight, xi=exact_xi(g, a, t0)))
    return terms


def identity_total(g: BipartiteGraph, t0: int) -> Fraction:
    return sum((term.value for term in identity_terms(g, t0)), Fraction(0))


def uncovered_cuts(g: BipartiteGraph, cuts: Sequence[VertexSet]) -> List[VertexSet]:
    """Every S ⊆ V that no member C of `cuts` covers.

    C covers S when |S △ C| ≤ 32t and |∇(C)| ≤ 33td, with t = max(1, ⌈|∇(S)|/d⌉).
    """
    if 2 * g.n > XI_LIMIT:
        raise SizeLimitError("cut_covering", XI_LIMIT, 2 * g.n)
    family = [(c.mask, cut_value(g, c)) for c in cuts]
    missing = []
    for s in range(1 << (2 * g.n)):
        cut = g.v_set(s)
        t = max(1, math.ceil(cut_value(g, cut) / g.d))
        if not any(
            (s ^ m).bit_count() <= 32 * t and value <= 33 * t * g.d for m, value in family
        ):
            missing.append(cut)
    return missing


def sample_uncovered_cuts(
    g: BipartiteGraph, cuts: Sequence[VertexSet], samples: int = COVER_SAMPLES, seed: int = 0
) -> List[VertexSet]:
    """Uniformly drawn S ⊆ V that no member of `cuts` covers, for graphs too big to scan."""
    size = 2 * g.n
    if size > SAMPLE_LIMIT:
        raise SizeLimitError("cut_covering", SAMPLE_LIMIT, size)
    masks = np.array([c.mask for c in cuts], dtype=np.uint64)
    values = np.array([cut_value(g, c) for c in cuts], dtype=np.int64)
    rng = np.random.default_rng(seed)
    bits = rng.integers(0, 2, size=(samples, size), dtype=np.uint8).astype(bool)
    packed = np.packbits(bits, axis=1, bitorder="little")
    missing = []
    for row in packed:
        cut = g.v_set(int.from_bytes(row.tobytes(), "little"))
        t = max(1, math.ceil(cut_value(g, cut) / g.d))
        dist = popcount_array(masks ^ np.uint64(cut.mask))
        if not np.any((dist <= 32 * t) & (values <= 33 * t * g.d)):
            missing.append(cut)
    logger.info("sampled cut covering", extra={"samples": samples, "uncovered": len(missing)})
    return missing


@dataclass
class VerifyReport:
    checks: Dict[str, bool] = field(default_factory=dict)
    details: Dict[str, str] = field(default_factory=dict)
    skipped: Dict[str, str] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def record(self, name: str, passed: bool, detail: str) -> None:
        self.checks[name] = passed
        self.details[name] = detail
        logger.info("verify check", extra={"check": name, "passed": passed, "detail": detail})

    def to_dict(self) -> Dict[str, object]:
        return {
            "ok": self.ok,
            "checks": {k: {"passed": v, "detail": self.details[k]} for k, v in self.checks.items()},
            "skipped": dict(self.skipped),
        }


def verify_graph(g: BipartiteGraph, t0: int = 1) -> VerifyReport:
    """Run every oracle comparison that fits the size limits."""
    report = VerifyReport()

    count = None
    if g.n <= EXACT_LIMIT:
        count = exact_count(g)
    else:
        report.skipped["exact_count"] = f"n={g.n} > {EXACT_LIMIT}"

    if count is not None and 2 * g.n <= IS_LIMIT:
        other = count_independent_sets(g)
        report.record("counters_agree", other == count, f"subset-sum {count}, branching {other}")
    else:
        report.skipped["counters_agree"] = "instance above the branching-counter limit"

    if g.n <= FAMILY_LIMIT:
        exact = exact_family(g, t0)
        basis = decompose(g)
        cuts = build_cut_family(g, basis)
        built = [item.a for item in build_family(g, cuts, t0)]
        report.record(
            "family_matches",
            built == exact,
            f"built {len(built)} sets, exact scan {len(exact)}",
        )
        try:
            total = identity_total(g, t0)
            report.record("identity", total == count, f"identity sum {total}, i(G) {count}")
        except SizeLimitError as exc:
            report.skipped["identity"] = str(exc)
        if 2 * g.n <= XI_LIMIT:
            missing = uncovered_cuts(g, list(cuts))
            report.record("cut_covering", not missing, f"{len(missing)} uncovered cuts")
        else:
            report.skipped["cut_covering"] = f"2n={2 * g.n} > {XI_LIMIT}"
    else:
        for name in ("family_matches", "identity", "cut_covering"):
            report.skipped[name] = f"n={g.n} > {FAMILY_LIMIT}"
    return report


__all__ = [
    "exact_count",
    "count_independent_sets",
    "count_covering_subsets",
    "exact_DA",
    "exact_family",
    "Polymer",
    "PolymerModelSnapshot",
    "polymer_snapshot",
    "exact_xi",
    "expansion_profile",
    "IdentityTerm",
    "identity_terms",
    "identity_total",
    "uncovered_cuts",
    "sample_uncovered_cuts",
    "VerifyReport",
    "verify_graph",
]
