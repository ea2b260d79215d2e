"""HTTP server exposing the batched /answer protocol.

POST /answer accepts {"requests": [{instance_id, context, question,
trigger}]} and returns {"responses": [{instance_id, answer}]} with answers
as inclusive token-index spans or null.  /healthz reports 503 until the
model finished loading; schema violations are answered with 400.
"""

from __future__ import annotations

import argparse
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .engine import QAEngine, ServerConfig


class SpanModel(BaseModel):
    start: int
    end: int


class AnswerRequestModel(BaseModel):
    instance_id: str
    context: list[list[str]] = Field(min_length=1)
    question: str
    trigger: SpanModel

    def schema_violation(self) -> str | None:
        total = sum(len(s) for s in self.context)
        if total == 0:
            return f"{self.instance_id}: context has no tokens"
        if not 0 <= self.trigger.start <= self.trigger.end < total:
            return f"{self.instance_id}: trigger span out of context bounds"
        return None


class AnswerBatchModel(BaseModel):
    requests: list[AnswerRequestModel]


def create_app(config: ServerConfig) -> FastAPI:
    @asynccontextmanager
    async def lifespan(app: FastAPI):
        app.state.engine = QAEngine(config)
        yield

    app = FastAPI(title="model-bridge", lifespan=lifespan)

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.get("/healthz")
    async def healthz():
        if getattr(app.state, "engine", None) is None:
            return JSONResponse(status_code=503, content={"status": "loading"})
        return {"status": "ok", "model": config.model}

    @app.post("/answer")
    async def answer(batch: AnswerBatchModel):
        engine = getattr(app.state, "engine", None)
        if engine is None:
            return JSONResponse(status_code=503, content={"status": "loading"})
        violations = [v for req in batch.requests
                      if (v := req.schema_violation())]
        if violations:
            return JSONResponse(status_code=400, content={"detail": violations})
        responses = engine.answer_batch(
            [req.model_dump() for req in batch.requests])
        return {"responses": responses}

    return app


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="model-bridge",
        description="Serve an extractive QA model behind the /answer protocol")
    parser.add_argument("--model", required=True,
                        help="HuggingFace model id or local checkpoint path")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8765)
    parser.add_argument("--max-batch-size", type=int, default=16)
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--max-length", type=int, default=384)
    parser.add_argument("--null-threshold", type=float, default=0.0)
    args = parser.parse_args(argv)

    config = ServerConfig(
        model=args.model, port=args.port, max_batch_size=args.max_batch_size,
        device=args.device, max_length=args.max_length,
        null_threshold=args.null_threshold)

    import uvicorn
    uvicorn.run(create_app(config), host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
