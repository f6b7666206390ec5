"""Top-level counting pipeline.

count_bis routes each instance either to the exact counter or to the
approximation pipeline

    decompose -> build_cut_family -> build_family(t0) -> estimate_DA per A

and accumulates i' = Σ_A 𝒟̃_A · 2^{|Y∖N(A)|} exactly. The regime in which the
approximation guarantee applies is checked explicitly; outside it the exact
counter is used unless `enforce_regime` is off.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from decimal import ROUND_DOWN, Decimal, localcontext
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from biscount.bigraph import BipartiteGraph, popcount_array, subset_neighborhood_masks
from biscount.config import RunConfig
from biscount.contracting import build_family, component_bound
from biscount.dsampler import estimate_DA
from biscount.errors import SizeLimitError
from biscount.logging_setup import get_logger
from biscount.spectral import build_cut_family, decompose

logger = get_logger(__name__)

EXACT_LIMIT = 24
DECIMAL_DIGITS = 40
ENUMERATION_SHIFT = 8  # t0 <= d / 2^8


class Method(str, Enum):
    fpras = "fpras"
    exact_fallback = "exact-fallback"


@dataclass(frozen=True)
class T0Selection:
    t0: int
    enumeration_regime: bool
    near_cut_regime: bool


class ApproxResult(BaseModel):
    """Estimate of i(G), exact rational plus its base-2 logarithm."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    estimate: Fraction
    log2_estimate: float
    epsilon: float
    method: Method
    t0: int
    family_size: int
    threshold_rank: int
    seed: int
    wall_ms: float
    regime: Dict[str, bool]
    fallback_reason: Optional[str] = None

    def estimate_decimal(self) -> str:
        """Decimal string, truncated to 40 significant digits."""
        with localcontext() as ctx:
            ctx.prec = DECIMAL_DIGITS
            ctx.rounding = ROUND_DOWN
            value = Decimal(self.estimate.numerator) / Decimal(self.estimate.denominator)
            return format(value, "f")

    def to_dict(self, include_timing: bool = True) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "estimate": self.estimate_decimal(),
            "log2_estimate": self.log2_estimate,
            "epsilon": self.epsilon,
            "method": self.method.value,
            "t0": self.t0,
            "threshold_rank": self.threshold_rank,
            "family_size": self.family_size,
            "seed": self.seed,
            "regime": dict(self.regime),
            "fallback_reason": self.fallback_reason,
        }
        if include_timing:
            out["wall_ms"] = self.wall_ms
        return out

    def to_json(self, include_timing: bool = True) -> str:
        return json.dumps(self.to_dict(include_timing), indent=2)


def log2_fraction(value: Fraction) -> float:
    if value <= 0:
        raise ValueError("log2 of a non-positive value")
    return math.log2(value.numerator) - math.log2(value.denominator)


def select_t0(n: int, d: int, eps: float, c_const: float = 1.0, c: int = 32) -> T0Selection:
    """t0 = max(1, ⌈c_const·ln(n/ε)⌉) with its regime flags."""
    if not 0 < eps <= 1:
        raise ValueError(f"eps must be in (0, 1], got {eps}")
    t0 = max(1, math.ceil(c_const * math.log(n / eps)))
    return _selection(n, d, t0, c)


def _selection(n: int, d: int, t0: int, c: int) -> T0Selection:
    enumeration = t0 * (1 << ENUMERATION_SHIFT) <= d
    if t0 >= d:
        near_cut = False
    else:
        near_cut = component_bound(n, d, t0) * t0 * 8 * c <= d
    return T0Selection(t0=t0, enumeration_regime=enumeration, near_cut_regime=near_cut)


def accuracy_regime(n: int, d: int, eps: float, c_const: float) -> bool:
    """ε > n·exp(-d/(2^8·C)); below that bound brute force is cheap enough."""
    return eps > n * math.exp(-d / ((1 << ENUMERATION_SHIFT) * c_const))


def brute_force_count(g: BipartiteGraph, limit: int = EXACT_LIMIT) -> int:
    """i(G) = Σ_{A ⊆ X} 2^{|Y∖N(A)|}, exactly."""
    if g.n > limit:
        raise SizeLimitError("brute_force", limit, g.n, hint="n exceeds the exact-count limit")
    sizes = popcount_array(subset_neighborhood_masks(g, range(g.n)))
    counts = np.bincount(sizes, minlength=g.n + 1)
    return sum(int(c) << (g.n - k) for k, c in enumerate(counts))


def count_bis(g: BipartiteGraph, cfg: Optional[RunConfig] = None) -> ApproxResult:
    cfg = cfg or RunConfig()
    started = time.perf_counter()
    eps = min(cfg.epsilon, 1.0)
    if cfg.t0_override is not None:
        sel = _selection(g.n, g.d, cfg.t0_override, cfg.near_cut_const)
    else:
        sel = select_t0(g.n, g.d, eps, cfg.c_const, cfg.near_cut_const)
    regime = {
        "accuracy": accuracy_regime(g.n, g.d, eps, cfg.c_const),
        "enumeration": sel.enumeration_regime,
        "near_cut": sel.near_cut_regime,
    }

    reason = None
    if cfg.force_exact:
        reason = "exact count requested"
    elif g.n <= cfg.brute_force_threshold:
        reason = f"n={g.n} within brute-force threshold {cfg.brute_force_threshold}"
    elif cfg.enforce_regime and not all(regime.values()):
        failed = ", ".join(k for k, ok in regime.items() if not ok)
        reason = f"outside valid regime ({failed})"

    def finish(value: Fraction, method: Method, family_size: int, rank: int) -> ApproxResult:
        result = ApproxResult(
            estimate=value,
            log2_estimate=log2_fraction(value),
            epsilon=eps,
            method=method,
            t0=sel.t0,
            family_size=family_size,
            threshold_rank=rank,
            seed=cfg.seed,
            wall_ms=(time.perf_counter() - started) * 1000.0,
            regime=regime,
            fallback_reason=reason,
        )
        logger.info(
            "count finished",
            extra={
                "method": method.value,
                "t0": sel.t0,
                "family_size": family_size,
                "wall_ms": round(result.wall_ms, 3),
            },
        )
        return result

    if reason is not None:
        if g.n > cfg.exact_limit:
            raise SizeLimitError("exact_fallback", cfg.exact_limit, g.n, hint=reason)
        logger.info("exact fallback", extra={"reason": reason})
        return finish(Fraction(brute_force_count(g, cfg.exact_limit)), Method.exact_fallback, 0, 0)

    basis = decompose(g, cfg.eig_tol)
    cuts = build_cut_family(g, basis, budget=cfg.net_budget, workers=cfg.workers)
    family = build_family(
        g,
        cuts,
        sel.t0,
        c=cfg.near_cut_const,
        subset_cap=cfg.subset_cap,
        candidate_budget=cfg.candidate_budget,
        family_budget=cfg.family_budget,
        strategy=cfg.near_cut_strategy,
        scan_limit=cfg.scan_limit,
    )

    # union bound over the |𝒜| estimator calls leaves success probability >= 3/4
    rho = min((g.n / eps) ** -3, 1.0 / (4 * len(family)))
    total = Fraction(0)
    for a in family:
        weight = 1 << a.weight_exponent
        total += estimate_DA(
            g, a, eps, rho, cfg.seed, sample_budget=cfg.sample_budget, workers=cfg.workers
        ) * weight
    return finish(total, Method.fpras, len(family), basis.k)


__all__ = [
    "Method",
    "T0Selection",
    "ApproxResult",
    "log2_fraction",
    "select_t0",
    "accuracy_regime",
    "brute_force_count",
    "count_bis",
]
