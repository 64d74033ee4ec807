import hashlib
import json

import pytest
import requests

from cryptohalal.market import (
    API_KEY_ENV,
    MAX_REDIRECTS,
    FetchError,
    MarketClient,
    MetadataFormatError,
    MissingApiKeyError,
    RedirectLoopError,
    RequestTimeoutError,
    SizeCapExceededError,
    UnknownCoinError,
    normalize_query,
    url_fixture_name,
)


def write_meta(fixture_dir, query, symbol, name, urls):
    payload = {"data": {symbol: [{"name": name, "symbol": symbol, "urls": {"website": urls}}]}}
    meta = fixture_dir / "meta"
    meta.mkdir(parents=True, exist_ok=True)
    (meta / f"{query}.json").write_text(json.dumps(payload), encoding="utf-8")


def write_page(fixture_dir, url, body: bytes):
    web = fixture_dir / "web"
    web.mkdir(parents=True, exist_ok=True)
    (web / f"{url_fixture_name(url)}.html").write_bytes(body)


def write_redirect(fixture_dir, url, target):
    web = fixture_dir / "web"
    web.mkdir(parents=True, exist_ok=True)
    (web / f"{url_fixture_name(url)}.redirect").write_text(target + "\n", encoding="utf-8")


class TestHelpers:
    def test_normalize_query(self):
        assert normalize_query("  btc ") == "BTC"
        assert normalize_query("Bitcoin") == "BITCOIN"

    def test_url_fixture_name_is_sha256(self):
        url = "https://a.example/x"
        assert url_fixture_name(url) == hashlib.sha256(url.encode()).hexdigest()


class TestFixtureResolve:
    def test_by_symbol(self, market_fixture_dir, no_network):
        client = MarketClient(mode="fixture", fixture_dir=market_fixture_dir)
        meta = client.resolve_metadata("btc")
        assert meta.ticker == "BTC"
        assert meta.name == "Bitcoin"
        assert meta.website_urls == ("https://bitcoin.example/",)

    def test_by_name_alias(self, market_fixture_dir, no_network):
        client = MarketClient(mode="fixture", fixture_dir=market_fixture_dir)
        assert client.resolve_metadata(" bitcoin ").ticker == "BTC"

    def test_unknown_coin(self, market_fixture_dir, no_network):
        client = MarketClient(mode="fixture", fixture_dir=market_fixture_dir)
        with pytest.raises(UnknownCoinError):
            client.resolve_metadata("NOPE")

    def test_metadata_shape_variants(self, tmp_path, no_network):
        client = MarketClient(mode="fixture", fixture_dir=tmp_path)
        meta_dir = tmp_path / "meta"
        meta_dir.mkdir()
        cases = {
            "FLAT": {"name": "Flat", "symbol": "FLAT", "website": "https://flat.example/"},
            "LIST": {"data": [{"name": "List", "symbol": "LIST",
                               "urls": {"website": ["https://list.example/"]}}]},
        }
        for q, payload in cases.items():
            (meta_dir / f"{q}.json").write_text(json.dumps(payload), encoding="utf-8")
        assert client.resolve_metadata("FLAT").website_urls == ("https://flat.example/",)
        assert client.resolve_metadata("LIST").name == "List"

    def test_missing_website_rejected(self, tmp_path, no_network):
        write_meta(tmp_path, "XX", "XX", "X", [])
        client = MarketClient(mode="fixture", fixture_dir=tmp_path)
        with pytest.raises(MetadataFormatError):
            client.resolve_metadata("XX")

    def test_relative_website_rejected(self, tmp_path, no_network):
        write_meta(tmp_path, "XX", "XX", "X", ["/just/a/path"])
        client = MarketClient(mode="fixture", fixture_dir=tmp_path)
        with pytest.raises(MetadataFormatError):
            client.resolve_metadata("XX")


class TestFixtureFetch:
    def test_direct_page(self, market_fixture_dir, no_network):
        client = MarketClient(mode="fixture", fixture_dir=market_fixture_dir)
        doc = client.fetch_site("https://techx.example/")
        assert b"proof of" in doc.content
        assert doc.source_url == "https://techx.example/"

    def test_missing_page(self, market_fixture_dir, no_network):
        client = MarketClient(mode="fixture", fixture_dir=market_fixture_dir)
        with pytest.raises(FetchError):
            client.fetch_site("https://unrecorded.example/")

    def test_relative_url_rejected(self, market_fixture_dir, no_network):
        client = MarketClient(mode="fixture", fixture_dir=market_fixture_dir)
        with pytest.raises(FetchError):
            client.fetch_site("ftp://techx.example/")

    def test_redirect_chain_followed(self, tmp_path, no_network):
        write_redirect(tmp_path, "https://a.example/", "https://b.example/")
        write_redirect(tmp_path, "https://b.example/", "https://c.example/")
        write_page(tmp_path, "https://c.example/", b"<p>destination</p>")
        client = MarketClient(mode="fixture", fixture_dir=tmp_path)
        doc = client.fetch_site("https://a.example/")
        assert doc.content == b"<p>destination</p>"
        assert doc.source_url == "https://c.example/"

    def test_five_redirects_allowed(self, tmp_path, no_network):
        urls = [f"https://hop{i}.example/" for i in range(MAX_REDIRECTS + 1)]
        for src, dst in zip(urls, urls[1:]):
            write_redirect(tmp_path, src, dst)
        write_page(tmp_path, urls[-1], b"ok")
        client = MarketClient(mode="fixture", fixture_dir=tmp_path)
        assert client.fetch_site(urls[0]).content == b"ok"

    def test_six_redirects_rejected(self, tmp_path, no_network):
        urls = [f"https://hop{i}.example/" for i in range(MAX_REDIRECTS + 2)]
        for src, dst in zip(urls, urls[1:]):
            write_redirect(tmp_path, src, dst)
        write_page(tmp_path, urls[-1], b"ok")
        client = MarketClient(mode="fixture", fixture_dir=tmp_path)
        with pytest.raises(RedirectLoopError):
            client.fetch_site(urls[0])

    def test_redirect_cycle_rejected(self, tmp_path, no_network):
        write_redirect(tmp_path, "https://a.example/", "https://b.example/")
        write_redirect(tmp_path, "https://b.example/", "https://a.example/")
        client = MarketClient(mode="fixture", fixture_dir=tmp_path)
        with pytest.raises(RedirectLoopError):
            client.fetch_site("https://a.example/")

    def test_size_cap(self, tmp_path, no_network):
        url = "https://big.example/"
        write_page(tmp_path, url, b"x" * (4 * 1024 * 1024 + 1))
        client = MarketClient(mode="fixture", fixture_dir=tmp_path)
        with pytest.raises(SizeCapExceededError):
            client.fetch_site(url)

    def test_exact_cap_allowed(self, tmp_path, no_network):
        url = "https://big.example/"
        write_page(tmp_path, url, b"x" * 1024)
        client = MarketClient(mode="fixture", fixture_dir=tmp_path, size_limit=1024)
        assert len(client.fetch_site(url).content) == 1024


class FakeResponse:
    def __init__(self, status_code=200, payload=None, body=b"", url=""):
        self.status_code = status_code
        self._payload = payload
        self._body = body
        self.url = url

    def json(self):
        if self._payload is None:
            raise ValueError("no json")
        return self._payload

    def iter_content(self, chunk_size):
        for i in range(0, len(self._body), chunk_size):
            yield self._body[i : i + chunk_size]

    def close(self):
        pass


class TestLiveMode:
    def test_missing_key_checked_before_network(self, monkeypatch, no_network):
        monkeypatch.delenv(API_KEY_ENV, raising=False)
        client = MarketClient(mode="live")
        with pytest.raises(MissingApiKeyError):
            client.resolve_metadata("BTC")

    def test_metadata_success_sends_key_header(self, monkeypatch):
        monkeypatch.setenv(API_KEY_ENV, "sekrit")
        seen = {}

        def fake_get(url, params=None, headers=None, timeout=None):
            seen.update(url=url, params=params, headers=headers, timeout=timeout)
            return FakeResponse(payload={
                "data": {"BTC": [{"name": "Bitcoin", "symbol": "BTC",
                                  "urls": {"website": ["https://bitcoin.example/"]}}]}
            })

        monkeypatch.setattr(requests, "get", fake_get)
        client = MarketClient(mode="live")
        meta = client.resolve_metadata("btc")
        assert meta.ticker == "BTC"
        assert seen["headers"]["X-CMC_PRO_API_KEY"] == "sekrit"
        assert seen["params"] == {"symbol": "BTC"}
        assert seen["timeout"] == 10

    def test_5xx_retries_then_succeeds(self, monkeypatch):
        monkeypatch.setenv(API_KEY_ENV, "k")
        sleeps = []
        calls = []

        def fake_get(url, **kwargs):
            calls.append(url)
            if len(calls) < 3:
                return FakeResponse(status_code=503)
            return FakeResponse(payload={
                "data": {"X": [{"name": "X", "symbol": "X",
                                "urls": {"website": ["https://x.example/"]}}]}
            })

        monkeypatch.setattr(requests, "get", fake_get)
        client = MarketClient(mode="live", _sleep=sleeps.append)
        assert client.resolve_metadata("X").ticker == "X"
        assert len(calls) == 3
        assert sleeps == [0.5, 1.0]  # exponential backoff

    def test_5xx_exhausts_retries(self, monkeypatch):
        monkeypatch.setenv(API_KEY_ENV, "k")
        monkeypatch.setattr(requests, "get", lambda url, **kw: FakeResponse(status_code=500))
        client = MarketClient(mode="live", _sleep=lambda s: None)
        with pytest.raises(FetchError):
            client.resolve_metadata("X")

    def test_4xx_is_unknown_coin_without_retry(self, monkeypatch):
        monkeypatch.setenv(API_KEY_ENV, "k")
        calls = []

        def fake_get(url, **kwargs):
            calls.append(url)
            return FakeResponse(status_code=404)

        monkeypatch.setattr(requests, "get", fake_get)
        client = MarketClient(mode="live", _sleep=lambda s: None)
        with pytest.raises(UnknownCoinError):
            client.resolve_metadata("NOPE")
        assert len(calls) == 1

    def test_timeout_retries_exhausted(self, monkeypatch):
        monkeypatch.setenv(API_KEY_ENV, "k")

        def fake_get(url, **kwargs):
            raise requests.Timeout("too slow")

        monkeypatch.setattr(requests, "get", fake_get)
        client = MarketClient(mode="live", _sleep=lambda s: None)
        with pytest.raises(RequestTimeoutError):
            client.resolve_metadata("X")
