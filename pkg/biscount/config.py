"""Run configuration.

`RunConfig` is the single source of truth for the knobs of one counting run:
accuracy, seed, the t0 constant and every budget. The CLI builds one from the
environment, an optional named profile and its own flags, in that order of
increasing precedence.
"""

from __future__ import annotations

import os
from typing import Any, Dict, Literal, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, field_validator

# BISCOUNT_* variable -> RunConfig field
ENV_FIELDS: Dict[str, str] = {
    "BISCOUNT_EPSILON": "epsilon",
    "BISCOUNT_SEED": "seed",
    "BISCOUNT_C_CONST": "c_const",
    "BISCOUNT_NET_BUDGET": "net_budget",
    "BISCOUNT_FAMILY_BUDGET": "family_budget",
    "BISCOUNT_SAMPLE_BUDGET": "sample_budget",
    "BISCOUNT_BRUTE_FORCE_THRESHOLD": "brute_force_threshold",
    "BISCOUNT_WORKERS": "workers",
}


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", validate_assignment=True)

    epsilon: float = Field(default=0.3, gt=0, description="target relative error, clamped to 1")
    seed: int = Field(default=0, ge=0)
    t0_override: Optional[int] = Field(default=None, ge=1)
    c_const: float = Field(default=1.0, gt=0, description="t0 = ceil(c_const * ln(n/eps))")
    near_cut_const: int = Field(default=32, ge=1)

    # Budgets
    net_budget: int = Field(default=10_000_000, gt=0)
    family_budget: int = Field(default=1_000_000, gt=0)
    sample_budget: int = Field(default=100_000_000, gt=0)
    subset_cap: int = Field(default=40, gt=0)
    candidate_budget: int = Field(default=1_000_000, gt=0)
    near_cut_strategy: Literal["auto", "lattice", "scan"] = "auto"
    scan_limit: int = Field(default=22, ge=0, le=26)

    # Exact fallback
    brute_force_threshold: int = Field(default=24, ge=0)
    exact_limit: int = Field(default=24, gt=0)
    enforce_regime: bool = True
    force_exact: bool = False

    workers: int = Field(default=1, ge=1)
    eig_tol: float = Field(default=1e-9, gt=0)

    @field_validator("epsilon")
    @classmethod
    def _clamp_epsilon(cls, v: float) -> float:
        return min(v, 1.0)

    @classmethod
    def from_env(cls, **overrides: Any) -> "RunConfig":
        """Defaults, then BISCOUNT_* variables (after loading .env), then `overrides`."""
        load_dotenv()
        values: Dict[str, Any] = {}
        for var, name in ENV_FIELDS.items():
            raw = os.getenv(var)
            if raw is not None and raw.strip() != "":
                values[name] = raw.strip()
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls.model_validate(values)

    def merged(self, **overrides: Any) -> "RunConfig":
        """Copy with the non-None `overrides` applied and re-validated."""
        data = self.model_dump()
        data.update({k: v for k, v in overrides.items() if v is not None})
        return RunConfig.model_validate(data)


__all__ = ["RunConfig", "ENV_FIELDS"]
