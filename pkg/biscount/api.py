"""HTTP surface: health check and a counting endpoint."""

from __future__ import annotations

from typing import List, Optional, Tuple

from fastapi import APIRouter, FastAPI, HTTPException
from pydantic import BaseModel, Field, ValidationError

from biscount.bigraph import BipartiteGraph
from biscount.config import RunConfig
from biscount.engine import count_bis
from biscount.errors import (
    BudgetExceededError,
    ConvergenceError,
    GenerationError,
    GraphInvariantError,
    PartMismatchError,
    RegimeError,
)
from biscount.logging_setup import get_logger

logger = get_logger(__name__)

router = APIRouter()


class CountRequest(BaseModel):
    n: int = Field(..., ge=1, description="vertices per part")
    d: int = Field(..., ge=1, description="regular degree")
    edges: List[Tuple[int, int]] = Field(..., description="(x, y) index pairs")
    epsilon: float = Field(default=0.3, gt=0)
    seed: int = Field(default=0, ge=0)
    t0: Optional[int] = Field(default=None, ge=1)
    exact: bool = False


@router.get("/health")
async def health():
    return {"status": "ok"}


@router.post("/count")
def count(req: CountRequest):
    try:
        g = BipartiteGraph.from_edges(req.n, req.d, req.edges)
        cfg = RunConfig.from_env().merged(
            epsilon=req.epsilon,
            seed=req.seed,
            t0_override=req.t0,
            force_exact=req.exact or None,
        )
        result = count_bis(g, cfg)
    except (GraphInvariantError, PartMismatchError, RegimeError, ValidationError) as exc:
        raise HTTPException(status_code=422, detail=str(exc)) from exc
    except (BudgetExceededError, GenerationError, ConvergenceError) as exc:
        logger.warning("count rejected", extra={"error": type(exc).__name__, "detail": str(exc)})
        raise HTTPException(status_code=413, detail=str(exc)) from exc
    return result.to_dict(include_timing=True)


def create_app() -> FastAPI:
    app = FastAPI(
        title="biscount",
        description="Counting independent sets in regular bipartite graphs",
        version="0.1.0",
    )
    app.include_router(router)
    return app


__all__ = ["router", "create_app", "CountRequest"]
