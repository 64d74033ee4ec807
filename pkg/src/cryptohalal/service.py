"""HTTP API over the ruling store and classification pipeline.

The service is configured from a JSON file and built by `create_app` so
tests can run it in-process. All responses are UTF-8 JSON; scholar
endpoints require a bearer token from POST /api/auth/login.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import Depends, FastAPI, Header, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel

from .corpus import Ruling
from .featurex import FeatureVector, Lexicon, default_lexicon, load_lexicon
from .learners import TrainedModel, load_model
from .market import (
    MarketClient,
    MarketError,
    MissingApiKeyError,
    UnknownCoinError,
)
from .pipeline import UndecodableContentError, classify_query
from .rulestore import AuthError, MalformedEntryError, RuleStore, RulingDraft

DEFAULT_PAGE_LIMIT = 50


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ServiceConfig:
    store_path: str
    model_path: str
    accounts_path: Optional[str] = None
    lexicon_path: Optional[str] = None
    fixture_dir: Optional[str] = None
    api_base: Optional[str] = None
    offline: bool = False
    min_count: int = 1
    host: str = "127.0.0.1"
    port: int = 8374
    ui_dir: Optional[str] = None

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        p = Path(path)
        try:
            raw = json.loads(p.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {p}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from None
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        for required in ("store_path", "model_path"):
            if required not in raw:
                raise ConfigError(f"config missing required key {required!r}")
        base = p.parent

        def resolve(key: str):
            value = raw.get(key)
            if value is None:
                return None
            return str((base / value).resolve()) if not Path(value).is_absolute() else value

        return cls(
            store_path=resolve("store_path"),
            model_path=resolve("model_path"),
            accounts_path=resolve("accounts_path"),
            lexicon_path=resolve("lexicon_path"),
            fixture_dir=resolve("fixture_dir"),
            api_base=raw.get("api_base"),
            offline=bool(raw.get("offline", False)),
            min_count=int(raw.get("min_count", 1)),
            host=raw.get("host", "127.0.0.1"),
            port=int(raw.get("port", 8374)),
            ui_dir=resolve("ui_dir"),
        )


class LoginBody(BaseModel):
    id: str
    password: str


class ClassifyBody(BaseModel):
    query: str
    offline: Optional[bool] = None


class RulingDraftBody(BaseModel):
    verdict: str
    name: Optional[str] = None
    verdict_text: Optional[str] = None
    features: Optional[list[int]] = None


def _entry_summary(entry) -> dict:
    return {
        "ticker": entry.ticker,
        "name": entry.name,
        "verdict": entry.verdict.value,
        "verdict_text": entry.verdict_text,
        "provenance": entry.provenance,
        "revision": entry.revision,
        "updated_at": entry.updated_at,
    }


def _build_market_client(config: ServiceConfig, offline: bool) -> MarketClient:
    if offline:
        if not config.fixture_dir:
            raise MarketError("offline mode requested but no fixture_dir configured")
        return MarketClient(mode="fixture", fixture_dir=config.fixture_dir)
    kwargs = {}
    if config.api_base:
        kwargs["api_base"] = config.api_base
    return MarketClient(mode="live", **kwargs)


def create_app(
    config: ServiceConfig,
    *,
    store: RuleStore | None = None,
    model: TrainedModel | None = None,
    lexicon: Lexicon | None = None,
) -> FastAPI:
    """Build the API app; injectable store/model/lexicon for tests."""
    if store is None:
        store = RuleStore(config.store_path, config.accounts_path)
    if model is None:
        model = load_model(config.model_path)
    if lexicon is None:
        lexicon = (
            load_lexicon(config.lexicon_path) if config.lexicon_path else default_lexicon()
        )

    app = FastAPI(title="cryptohalal", docs_url=None, redoc_url=None)
    app.state.store = store
    app.state.model = model
    app.state.lexicon = lexicon
    app.state.config = config

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": "malformed body"})

    def require_scholar(authorization: Optional[str] = Header(default=None)) -> str:
        if not authorization or not authorization.startswith("Bearer "):
            raise HTTPException(status_code=401, detail="missing bearer token")
        token = authorization.removeprefix("Bearer ").strip()
        try:
            store.verify_token(token)
        except AuthError as exc:
            raise HTTPException(status_code=401, detail=str(exc))
        return token

    @app.get("/api/rulings")
    def list_rulings(offset: int = 0, limit: int = DEFAULT_PAGE_LIMIT):
        if offset < 0 or limit < 1:
            raise HTTPException(status_code=400, detail="bad pagination parameters")
        entries = store.list_all()
        page = entries[offset : offset + limit]
        next_offset = offset + len(page)
        return {
            "entries": [_entry_summary(e) for e in page],
            "total": len(entries),
            "next_offset": next_offset if next_offset < len(entries) else None,
        }

    @app.get("/api/rulings/{query}")
    def get_ruling(query: str):
        entry = store.lookup(query)
        if entry is None:
            raise HTTPException(status_code=404, detail=f"no ruling for {query!r}")
        return entry.to_dict()

    @app.post("/api/classify")
    def classify(body: ClassifyBody):
        if not body.query.strip():
            raise HTTPException(status_code=400, detail="empty query")
        offline = config.offline or bool(body.offline)
        try:
            client = _build_market_client(config, offline)
            result = classify_query(
                body.query,
                model=model,
                market_client=client,
                store=store,
                lexicon=lexicon,
                min_count=config.min_count,
            )
        except UnknownCoinError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        except UndecodableContentError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        except (MissingApiKeyError, MarketError) as exc:
            raise HTTPException(status_code=502, detail=str(exc))
        return result.to_dict()

    @app.post("/api/auth/login")
    def login(body: LoginBody):
        try:
            token, expires = store.login(body.id, body.password)
        except AuthError:
            raise HTTPException(status_code=401, detail="bad credentials")
        return {"token": token, "expires_at": expires}

    @app.put("/api/rulings/{ticker}")
    def put_ruling(ticker: str, body: RulingDraftBody, token: str = Depends(require_scholar)):
        try:
            verdict = Ruling(body.verdict)
        except ValueError:
            raise HTTPException(
                status_code=400, detail=f"verdict must be one of {[r.value for r in Ruling]}"
            )
        features = None
        if body.features is not None:
            try:
                features = FeatureVector.from_values(body.features)
            except ValueError as exc:
                raise HTTPException(status_code=400, detail=str(exc))
        draft = RulingDraft(
            ticker=ticker,
            verdict=verdict,
            name=body.name or "",
            verdict_text=body.verdict_text,
            features=features,
        )
        try:
            entry = store.upsert_scholar_ruling(token, draft)
        except AuthError as exc:
            raise HTTPException(status_code=401, detail=str(exc))
        except MalformedEntryError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return entry.to_dict()

    @app.delete("/api/rulings/{ticker}")
    def delete_ruling(
        ticker: str, provenance: str = "", token: str = Depends(require_scholar)
    ):
        if provenance != "machine":
            raise HTTPException(
                status_code=400, detail="only provenance=machine entries can be deleted"
            )
        if not store.delete_machine(ticker):
            raise HTTPException(status_code=404, detail=f"no machine entry for {ticker!r}")
        return Response(status_code=204)

    if config.ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=config.ui_dir, html=True), name="ui")

    return app


def run_service(config: ServiceConfig) -> None:
    """Run the API under uvicorn until interrupted; flush the store on exit."""
    import uvicorn

    app = create_app(config)
    try:
        uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    finally:
        app.state.store.close()
