"""Closed contracting sets near a cut, and the family 𝒜 built from them.

𝒜 is the set of A ⊆ X whose 2-linked components are each closed and
t0-contracting. It is assembled in two stages: collect 2-linked closed
t0-contracting pieces from near-cut enumerations over the cut family, then
combine pieces with pairwise disjoint neighbourhoods.

Near-cut enumeration has two exact strategies:

- lattice: walk the lattice of closed sets [P ∪ S'] from the anchor, with
  P = A' minus a union of witness neighbourhoods and S' ⊆ S_X. Every target A
  is reachable, since each v ∈ A∖A' has N(v) ⊆ N(A) and so lies in S_X, and the
  removal R = A'∖A is the union of N(y)∩A' over y ∈ N(A'∖A)∖N(A).
- scan: vectorised scan of every A ⊆ X for closed t-contracting sets, cached
  per (graph, t), then filtered by distance. Used at small n when the witness
  sets are too large for the lattice walk to stay small.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Dict, Iterable, List, Tuple, Union

import numpy as np

from biscount.bigraph import (
    BipartiteGraph,
    Part,
    VertexSet,
    iter_bits,
    popcount_array,
    subset_neighborhood_masks,
)
from biscount.errors import BudgetExceededError, PartMismatchError, RegimeError
from biscount.logging_setup import get_logger

logger = get_logger(__name__)

NEAR_CUT_CONST = 32
SUBSET_CAP = 40
CANDIDATE_BUDGET = 1_000_000
FAMILY_BUDGET = 1_000_000
SCAN_LIMIT = 22


class NearCutStrategy(str, Enum):
    auto = "auto"
    lattice = "lattice"
    scan = "scan"


def _canonical(mask: int) -> Tuple[int, ...]:
    return tuple(iter_bits(mask))


@dataclass(frozen=True)
class NearCutWitness:
    """Candidate-generating sets for one anchor cut.

    `s_y_out` holds the Y∖W' vertices with 1..ct neighbours in A'; they only
    supply removals and do not count toward `size`.
    """

    cut: VertexSet
    s_x: VertexSet
    s_y: VertexSet
    s_y_out: VertexSet

    @property
    def size(self) -> int:
        return len(self.s_x) + len(self.s_y)


@dataclass(frozen=True, eq=False)
class ContractingSet:
    """An element of 𝒜 with its neighbourhood, closure and components cached."""

    a: VertexSet
    neighborhood: VertexSet
    closure: VertexSet
    components: Tuple[VertexSet, ...]

    @classmethod
    def of(cls, g: BipartiteGraph, a_mask: int) -> "ContractingSet":
        return cls(
            a=g.x_set(a_mask),
            neighborhood=g.y_set(g.neighborhood_mask(a_mask)),
            closure=g.x_set(g.closure_mask(a_mask)),
            components=tuple(g.x_set(m) for m in g.component_masks(a_mask)),
        )

    @property
    def weight_exponent(self) -> int:
        """|Y ∖ N(A)|."""
        return self.a.universe - len(self.neighborhood)

    def slack(self, t0: int) -> int:
        """|[A]| + t0 - |N(A)|; positive iff A is t0-contracting."""
        return len(self.closure) + t0 - len(self.neighborhood)

    def key(self) -> Tuple[int, ...]:
        return self.a.key()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ContractingSet):
            return NotImplemented
        return self.a == other.a

    def __hash__(self) -> int:
        return hash(self.a)

    def __repr__(self) -> str:
        comps = ", ".join(str(c.indices()) for c in self.components)
        return f"ContractingSet({self.a.indices()}; components=[{comps}])"


def component_bound(n: int, d: int, t0: int) -> int:
    """⌊n/(d - t0)⌋."""
    if t0 >= d:
        raise RegimeError(f"component bound needs t0 < d, got t0={t0}, d={d}")
    return n // (d - t0)


def max_components(g: BipartiteGraph, t0: int) -> int:
    """Most components any A ∈ 𝒜 can have.

    A nonempty t0-contracting set has more than d - t0 vertices and the
    components of A are disjoint.
    """
    return component_bound(g.n, g.d, t0)


def near_cut_witness(g: BipartiteGraph, cut: VertexSet, t: int, c: int = NEAR_CUT_CONST) -> NearCutWitness:
    a0, w0 = g.split_cut(cut)
    ct = c * t
    s_x = 0
    for v in iter_bits(g.full_x & ~a0):
        if (g.x_masks[v] & ~w0).bit_count() <= 3 * ct:
            s_x |= 1 << v
    s_y = 0
    s_y_out = 0
    for y in range(g.n):
        inside = (g.y_masks[y] & a0).bit_count()
        if w0 >> y & 1:
            if inside <= ct:
                s_y |= 1 << y
        elif 1 <= inside <= ct:
            s_y_out |= 1 << y
    return NearCutWitness(cut=cut, s_x=g.x_set(s_x), s_y=g.y_set(s_y), s_y_out=g.y_set(s_y_out))


@lru_cache(maxsize=16)
def _closed_contracting_scan(g: BipartiteGraph, t: int) -> Tuple[Tuple[int, int], ...]:
    """(A, N(A)) for every closed t-contracting A ⊆ X."""
    n = g.n
    nb = subset_neighborhood_masks(g, range(n))
    dtype = nb.dtype.type
    idx = np.arange(1 << n, dtype=nb.dtype)
    outside = dtype(g.full_y) & ~nb
    blocked = np.zeros_like(nb)
    for y, ym in enumerate(g.y_masks):
        hit = ((outside >> dtype(y)) & dtype(1)).astype(bool)
        blocked[hit] |= dtype(ym)
    closure = dtype(g.full_x) & ~blocked
    keep = (closure == idx) & (popcount_array(nb) < popcount_array(idx) + t)
    sel = np.nonzero(keep)[0]
    logger.debug("closed-set scan", extra={"n": n, "t": t, "closed_contracting": int(sel.size)})
    return tuple((int(a), int(nb[a])) for a in sel)


def _scan_near_cut(g: BipartiteGraph, a0: int, w0: int, t: int, ct: int) -> List[int]:
    return [
        a
        for a, na in _closed_contracting_scan(g, t)
        if (a ^ a0).bit_count() <= ct and (na ^ w0).bit_count() <= ct
    ]


def _lattice_near_cut(
    g: BipartiteGraph,
    witness: NearCutWitness,
    a0: int,
    w0: int,
    t: int,
    ct: int,
    candidate_budget: int,
) -> Tuple[List[int], int]:
    states = 0

    def charge(amount: int = 1) -> None:
        nonlocal states
        states += amount
        if states > candidate_budget:
            raise BudgetExceededError(
                "near_cut",
                candidate_budget,
                states,
                hint="closed-set lattice too large for this cut",
            )

    # distinct unions of N(y) ∩ A' over witness y, capped at ct
    removals = {0}
    for y in iter_bits(witness.s_y.mask | witness.s_y_out.mask):
        r = g.y_masks[y] & a0
        if not r:
            continue
        grown = {u | r for u in removals if (u | r).bit_count() <= ct}
        fresh = grown - removals
        charge(len(fresh))
        removals |= fresh

    def pruned(s: int) -> bool:
        return (s & ~a0).bit_count() > ct or (g.neighborhood_mask(s) & ~w0).bit_count() > ct

    s_x = witness.s_x.mask
    visited = set()
    stack = []
    for r in removals:
        s = g.closure_mask(a0 & ~r)
        if s not in visited and not pruned(s):
            visited.add(s)
            stack.append(s)

    found = []
    while stack:
        s = stack.pop()
        charge()
        ns = g.neighborhood_mask(s)
        if (
            ns.bit_count() < s.bit_count() + t
            and (s ^ a0).bit_count() <= ct
            and (ns ^ w0).bit_count() <= ct
        ):
            found.append(s)
        for v in iter_bits(s_x & ~s):
            nxt = g.closure_mask(s | 1 << v)
            if nxt not in visited and not pruned(nxt):
                visited.add(nxt)
                stack.append(nxt)
    return found, states


def enumerate_near_cut(
    g: BipartiteGraph,
    cut: VertexSet,
    t: int,
    c: int = NEAR_CUT_CONST,
    subset_cap: int = SUBSET_CAP,
    candidate_budget: int = CANDIDATE_BUDGET,
    strategy: Union[NearCutStrategy, str] = NearCutStrategy.auto,
    scan_limit: int = SCAN_LIMIT,
) -> List[VertexSet]:
    """Closed t-contracting A with |A △ (C∩X)| ≤ ct and |N(A) △ (C∩Y)| ≤ ct.

    Output is canonically ordered. Raises BudgetExceededError when the witness
    sets exceed `subset_cap` on the lattice strategy or the walk exceeds
    `candidate_budget` states.
    """
    if cut.part is not Part.V:
        raise PartMismatchError("enumerate_near_cut expects a cut over V")
    if t < 1:
        raise RegimeError(f"t must be at least 1, got {t}")
    strategy = NearCutStrategy(strategy)
    a0, w0 = g.split_cut(cut)
    ct = c * t
    witness = near_cut_witness(g, cut, t, c)

    if strategy is NearCutStrategy.auto:
        if witness.size <= 2 * t or g.n > scan_limit:
            strategy = NearCutStrategy.lattice
        else:
            strategy = NearCutStrategy.scan

    states = 0
    if strategy is NearCutStrategy.scan:
        found = _scan_near_cut(g, a0, w0, t, ct)
    else:
        if witness.size > subset_cap:
            raise BudgetExceededError(
                "near_cut",
                subset_cap,
                witness.size,
                hint=f"|S_X|+|S_Y| too large; t={t} is outside t <= d/(8c) for d={g.d}",
            )
        found, states = _lattice_near_cut(g, witness, a0, w0, t, ct, candidate_budget)

    found.sort(key=_canonical)
    logger.debug(
        "near-cut enumeration",
        extra={
            "t": t,
            "strategy": strategy.value,
            "s_x": len(witness.s_x),
            "s_y": len(witness.s_y),
            "s_y_out": len(witness.s_y_out),
            "states": states,
            "results": len(found),
        },
    )
    return [g.x_set(m) for m in found]


def _is_piece(g: BipartiteGraph, mask: int, t0: int) -> bool:
    return (
        g.closure_mask(mask) == mask
        and g.neighborhood_mask(mask).bit_count() < mask.bit_count() + t0
    )


def build_family(
    g: BipartiteGraph,
    cut_family: Iterable[VertexSet],
    t0: int,
    c: int = NEAR_CUT_CONST,
    subset_cap: int = SUBSET_CAP,
    candidate_budget: int = CANDIDATE_BUDGET,
    family_budget: int = FAMILY_BUDGET,
    strategy: Union[NearCutStrategy, str] = NearCutStrategy.auto,
    scan_limit: int = SCAN_LIMIT,
) -> List[ContractingSet]:
    """The family 𝒜 for threshold t0, canonically ordered, ∅ first."""
    if t0 < 1:
        raise RegimeError(f"t0 must be at least 1, got {t0}")
    limit = max_components(g, t0) if t0 < g.d else g.n

    # Stage 1: outputs are nested in t, so one run at t = L·t0 covers ℓ = 1..L
    t = limit * t0
    pieces: Dict[int, int] = {}
    cuts = 0
    for cut in cut_family:
        cuts += 1
        for a in enumerate_near_cut(
            g, cut, t, c, subset_cap, candidate_budget, strategy, scan_limit
        ):
            for comp in g.component_masks(a.mask):
                if comp not in pieces and _is_piece(g, comp, t0):
                    pieces[comp] = g.neighborhood_mask(comp)

    # Stage 2: unions of up to L pieces with pairwise disjoint neighbourhoods
    order = sorted(pieces, key=_canonical)
    unions: List[int] = []

    def combine(start: int, union: int, covered: int, depth: int) -> None:
        unions.append(union)
        if len(unions) > family_budget:
            raise BudgetExceededError("family", family_budget, len(unions))
        if depth == limit:
            return
        for i in range(start, len(order)):
            piece = order[i]
            if pieces[piece] & covered:
                continue
            combine(i + 1, union | piece, covered | pieces[piece], depth + 1)

    combine(0, 0, 0, 0)
    unions.sort(key=_canonical)
    family = [ContractingSet.of(g, m) for m in unions]
    logger.info(
        "contracting family",
        extra={"t0": t0, "max_components": limit, "cuts": cuts, "pieces": len(order), "family": len(family)},
    )
    return family


def dump_family(family: Iterable[ContractingSet], t0: int, path: Union[str, Path]) -> None:
    """One line per A: components, |N(A)| and the contraction slack."""
    lines = []
    for item in family:
        comps = " | ".join(" ".join(map(str, comp.key())) for comp in item.components)
        lines.append(f"[{comps}] N={len(item.neighborhood)} slack={item.slack(t0)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


__all__ = [
    "NearCutStrategy",
    "NearCutWitness",
    "ContractingSet",
    "component_bound",
    "max_components",
    "near_cut_witness",
    "enumerate_near_cut",
    "build_family",
    "dump_family",
]
