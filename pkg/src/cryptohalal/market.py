"""Coin metadata resolution and website fetching, with a recorded-fixture
offline mode.

Live mode talks to a CoinMarketCap-compatible metadata endpoint (any
provider returning the same response shape works via ``api_base``) and
scrapes the first listed official website. Fixture mode serves recorded
responses from disk and performs zero network I/O:

    <fixture_dir>/meta/<QUERY>.json        metadata response body
    <fixture_dir>/web/<sha256(url)>.html   recorded page body
    <fixture_dir>/web/<sha256(url)>.redirect  target URL (one line)
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from urllib.parse import urlparse

from .textprep import MAX_DOCUMENT_BYTES, RawDocument

API_KEY_ENV = "CRYPTOHALAL_API_KEY"
DEFAULT_API_BASE = "https://pro-api.coinmarketcap.com"
DEFAULT_METADATA_PATH = "/v2/cryptocurrency/info"
DEFAULT_KEY_HEADER = "X-CMC_PRO_API_KEY"
MAX_REDIRECTS = 5


class MarketError(Exception):
    """Base class for metadata/fetch failures."""


class UnknownCoinError(MarketError):
    pass


class MissingApiKeyError(MarketError):
    pass


class MetadataFormatError(MarketError):
    pass


class FetchError(MarketError):
    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class RequestTimeoutError(FetchError):
    pass


class RedirectLoopError(FetchError):
    pass


class SizeCapExceededError(FetchError):
    pass


@dataclass(frozen=True)
class CoinMetadata:
    ticker: str
    name: str
    website_urls: tuple[str, ...]
    fetched_at: str


def normalize_query(query: str) -> str:
    return query.strip().upper()


def url_fixture_name(url: str) -> str:
    return hashlib.sha256(url.encode("utf-8")).hexdigest()


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _is_absolute_http(url: str) -> bool:
    parsed = urlparse(url)
    return parsed.scheme in ("http", "https") and bool(parsed.netloc)


def _parse_metadata_payload(payload, query: str) -> CoinMetadata:
    """Extract (ticker, name, websites) from a metadata response body."""
    if not isinstance(payload, dict):
        raise MetadataFormatError("metadata response is not a JSON object")
    entry = payload
    data = payload.get("data")
    if isinstance(data, dict):
        entry = data.get(query) or data.get(query.upper())
        if entry is None:
            if not data:
                raise UnknownCoinError(f"unknown coin {query!r}: empty response data")
            entry = next(iter(data.values()))
    elif isinstance(data, list):
        if not data:
            raise UnknownCoinError(f"unknown coin {query!r}: empty response data")
        entry = data[0]
    if isinstance(entry, list):
        if not entry:
            raise UnknownCoinError(f"unknown coin {query!r}: empty response data")
        entry = entry[0]
    if not isinstance(entry, dict):
        raise MetadataFormatError("metadata entry is not a JSON object")

    urls = entry.get("urls")
    if isinstance(urls, dict):
        websites = urls.get("website", [])
    else:
        websites = entry.get("website", [])
    if isinstance(websites, str):
        websites = [websites]
    if not isinstance(websites, list) or not websites:
        raise MetadataFormatError("metadata response lists no website URL")
    for url in websites:
        if not isinstance(url, str) or not _is_absolute_http(url):
            raise MetadataFormatError(f"website URL is not absolute http(s): {url!r}")

    ticker = entry.get("symbol") or query
    name = entry.get("name") or ticker
    return CoinMetadata(
        ticker=str(ticker),
        name=str(name),
        website_urls=tuple(websites),
        fetched_at=_utcnow(),
    )


@dataclass
class MarketClient:
    """Metadata + page fetcher. mode is "live" or "fixture"."""

    mode: str = "live"
    fixture_dir: str | Path | None = None
    api_base: str = DEFAULT_API_BASE
    metadata_path: str = DEFAULT_METADATA_PATH
    key_header: str = DEFAULT_KEY_HEADER
    timeout: float = 10.0
    retries: int = 2
    size_limit: int = MAX_DOCUMENT_BYTES
    # injectable for tests; exponential backoff between retries
    _sleep: callable = field(default=time.sleep, repr=False)

    def __post_init__(self) -> None:
        if self.mode not in ("live", "fixture"):
            raise ValueError(f"mode must be 'live' or 'fixture', got {self.mode!r}")
        if self.mode == "fixture" and self.fixture_dir is None:
            raise ValueError("fixture mode requires fixture_dir")

    # ------------------------------------------------------- metadata ---

    def resolve_metadata(self, query: str) -> CoinMetadata:
        """Resolve a coin name or ticker to its metadata record."""
        q = normalize_query(query)
        if not q:
            raise UnknownCoinError("empty query")
        if self.mode == "fixture":
            return self._resolve_fixture(q)
        return self._resolve_live(q)

    def _resolve_fixture(self, query: str) -> CoinMetadata:
        path = Path(self.fixture_dir) / "meta" / f"{query}.json"
        if not path.exists():
            raise UnknownCoinError(f"unknown coin {query!r}: no metadata fixture")
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise MetadataFormatError(f"fixture {path.name} is not valid JSON: {exc}")
        return _parse_metadata_payload(payload, query)

    def _resolve_live(self, query: str) -> CoinMetadata:
        api_key = os.environ.get(API_KEY_ENV, "")
        if not api_key:
            raise MissingApiKeyError(
                f"no API key: set the {API_KEY_ENV} environment variable"
            )
        import requests

        url = self.api_base.rstrip("/") + self.metadata_path
        headers = {self.key_header: api_key, "Accept": "application/json"}
        last_exc: Exception | None = None
        for attempt in range(self.retries + 1):
            if attempt:
                self._sleep(0.5 * 2 ** (attempt - 1))
            try:
                resp = requests.get(
                    url,
                    params={"symbol": query},
                    headers=headers,
                    timeout=self.timeout,
                )
            except requests.Timeout as exc:
                last_exc = RequestTimeoutError(f"metadata request timed out: {exc}")
                continue
            except requests.ConnectionError as exc:
                last_exc = FetchError(f"metadata request failed: {exc}")
                continue
            if resp.status_code >= 500:
                last_exc = FetchError(
                    f"metadata endpoint returned HTTP {resp.status_code}",
                    status=resp.status_code,
                )
                continue
            if resp.status_code >= 400:
                raise UnknownCoinError(
                    f"unknown coin {query!r}: metadata endpoint returned "
                    f"HTTP {resp.status_code}"
                )
            try:
                payload = resp.json()
            except ValueError as exc:
                raise MetadataFormatError(f"metadata response is not JSON: {exc}")
            return _parse_metadata_payload(payload, query)
        raise last_exc  # all retries exhausted

    # ----------------------------------------------------------- page ---

    def fetch_site(self, url: str) -> RawDocument:
        """Fetch a website body, following at most 5 redirects, capped at 4 MiB."""
        if not _is_absolute_http(url):
            raise FetchError(f"not an absolute http(s) URL: {url!r}")
        if self.mode == "fixture":
            return self._fetch_fixture(url)
        return self._fetch_live(url)

    def _fetch_fixture(self, url: str) -> RawDocument:
        web = Path(self.fixture_dir) / "web"
        current = url
        for _ in range(MAX_REDIRECTS + 1):
            name = url_fixture_name(current)
            body_path = web / f"{name}.html"
            if body_path.exists():
                content = body_path.read_bytes()
                if len(content) > self.size_limit:
                    raise SizeCapExceededError(
                        f"body exceeds {self.size_limit} bytes: {current}"
                    )
                return RawDocument(content=content, content_kind="html", source_url=current)
            redirect_path = web / f"{name}.redirect"
            if redirect_path.exists():
                current = redirect_path.read_text(encoding="utf-8").strip()
                if not _is_absolute_http(current):
                    raise FetchError(f"fixture redirect target is not absolute: {current!r}")
                continue
            raise FetchError(f"no fixture recorded for URL {current}")
        raise RedirectLoopError(f"more than {MAX_REDIRECTS} redirects from {url}")

    def _fetch_live(self, url: str) -> RawDocument:
        import requests

        last_exc: Exception | None = None
        for attempt in range(self.retries + 1):
            if attempt:
                self._sleep(0.5 * 2 ** (attempt - 1))
            with requests.Session() as session:
                session.max_redirects = MAX_REDIRECTS
                try:
                    resp = session.get(
                        url,
                        timeout=self.timeout,
                        stream=True,
                        headers={"User-Agent": "cryptohalal/0.1"},
                    )
                except requests.TooManyRedirects:
                    raise RedirectLoopError(
                        f"more than {MAX_REDIRECTS} redirects from {url}"
                    )
                except requests.Timeout as exc:
                    last_exc = RequestTimeoutError(f"fetch timed out: {exc}")
                    continue
                except requests.ConnectionError as exc:
                    last_exc = FetchError(f"fetch failed: {exc}")
                    continue
                if resp.status_code >= 500:
                    last_exc = FetchError(
                        f"HTTP {resp.status_code} fetching {url}", status=resp.status_code
                    )
                    continue
                if resp.status_code >= 400:
                    raise FetchError(
                        f"HTTP {resp.status_code} fetching {url}", status=resp.status_code
                    )
                chunks = []
                total = 0
                for chunk in resp.iter_content(chunk_size=65536):
                    total += len(chunk)
                    if total > self.size_limit:
                        resp.close()
                        raise SizeCapExceededError(
                            f"body exceeds {self.size_limit} bytes: {url}"
                        )
                    chunks.append(chunk)
                return RawDocument(
                    content=b"".join(chunks),
                    content_kind="html",
                    source_url=str(resp.url),
                )
        raise last_exc
