"""Persistent ruling database with scholar and machine provenances.

Scholar entries are authoritative and can only be superseded, never
deleted through the API; machine classifications are cached with visible
provenance. Every write rewrites the snapshot file through a temp file,
fsync, and atomic rename, so a crash at any point leaves the previous
snapshot intact.
"""

from __future__ import annotations

import hashlib
import hmac
import json
import os
import secrets
import time
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

from .corpus import Ruling
from .featurex import Explanation, FeatureVector, explain

TOKEN_TTL_SECONDS = 12 * 3600

# memory-hard KDF parameters (128 * r * n bytes ~ 16 MiB at these values)
_SCRYPT = {"n": 16384, "r": 8, "p": 1, "dklen": 32}
_SCRYPT_MAXMEM = 64 * 1024 * 1024


class RuleStoreError(Exception):
    pass


class AuthError(RuleStoreError):
    pass


class MalformedEntryError(RuleStoreError):
    pass


@dataclass(frozen=True)
class RulingEntry:
    ticker: str
    name: str
    verdict: Ruling
    verdict_text: str
    provenance: str  # "scholar" | "machine"
    features: FeatureVector
    explanation: Explanation
    editor: str
    created_at: str
    updated_at: str
    revision: int

    def to_dict(self) -> dict:
        return {
            "ticker": self.ticker,
            "name": self.name,
            "verdict": self.verdict.value,
            "verdict_text": self.verdict_text,
            "provenance": self.provenance,
            "features": self.features.to_dict(),
            "explanation": self.explanation.to_dict(),
            "editor": self.editor,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
            "revision": self.revision,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RulingEntry":
        try:
            return cls(
                ticker=d["ticker"],
                name=d.get("name", ""),
                verdict=Ruling(d["verdict"]),
                verdict_text=d["verdict_text"],
                provenance=d["provenance"],
                features=FeatureVector.from_dict(d["features"]),
                explanation=Explanation.from_dict(d["explanation"]),
                editor=d["editor"],
                created_at=d["created_at"],
                updated_at=d["updated_at"],
                revision=int(d["revision"]),
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise MalformedEntryError(f"malformed ruling entry: {exc}") from None


@dataclass(frozen=True)
class RulingDraft:
    """Scholar-submitted ruling, validated before storage."""

    ticker: str
    verdict: Ruling
    name: str = ""
    verdict_text: str | None = None
    features: FeatureVector | None = None


@dataclass(frozen=True)
class ScholarAccount:
    id: str
    display_name: str
    salt: bytes
    password_hash: bytes
    created_at: str


def _hash_password(password: str, salt: bytes) -> bytes:
    return hashlib.scrypt(
        password.encode("utf-8"), salt=salt, maxmem=_SCRYPT_MAXMEM, **_SCRYPT
    )


def atomic_write_text(path: Path, text: str, crash_hook=None) -> None:
    """Write via temp file + fsync + rename so readers never see a torn file.

    crash_hook, when set, runs between the durable write and the rename;
    tests use it to simulate a crash at the most dangerous moment.
    """
    tmp = path.with_name(f"{path.name}.tmp{os.getpid()}")
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
        fh.flush()
        os.fsync(fh.fileno())
    try:
        if crash_hook is not None:
            crash_hook()
        os.replace(tmp, path)
    except BaseException:
        if tmp.exists():
            tmp.unlink()
        raise


def load_accounts(path: str | Path) -> dict[str, ScholarAccount]:
    p = Path(path)
    if not p.exists():
        return {}
    doc = json.loads(p.read_text(encoding="utf-8"))
    accounts = {}
    for item in doc.get("accounts", []):
        acct = ScholarAccount(
            id=item["id"],
            display_name=item.get("display_name", item["id"]),
            salt=bytes.fromhex(item["salt"]),
            password_hash=bytes.fromhex(item["hash"]),
            created_at=item.get("created_at", ""),
        )
        accounts[acct.id] = acct
    return accounts


def save_accounts(path: str | Path, accounts: dict[str, ScholarAccount]) -> None:
    doc = {
        "kdf": {"name": "scrypt", **_SCRYPT},
        "accounts": [
            {
                "id": a.id,
                "display_name": a.display_name,
                "salt": a.salt.hex(),
                "hash": a.password_hash.hex(),
                "created_at": a.created_at,
            }
            for a in sorted(accounts.values(), key=lambda a: a.id)
        ],
    }
    atomic_write_text(Path(path), json.dumps(doc, indent=2, sort_keys=True) + "\n")


def add_account(
    path: str | Path, scholar_id: str, display_name: str, password: str
) -> ScholarAccount:
    """Create or replace a scholar account in the accounts file."""
    if not scholar_id or not scholar_id.strip():
        raise RuleStoreError("scholar id must be non-empty")
    if len(password) < 8:
        raise RuleStoreError("password must be at least 8 characters")
    accounts = load_accounts(path)
    salt = secrets.token_bytes(16)
    acct = ScholarAccount(
        id=scholar_id.strip(),
        display_name=display_name or scholar_id,
        salt=salt,
        password_hash=_hash_password(password, salt),
        created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )
    accounts[acct.id] = acct
    save_accounts(path, accounts)
    return acct


class RuleStore:
    """File-backed ruling store; in-memory only when path is None."""

    def __init__(
        self,
        path: str | Path | None = None,
        accounts_path: str | Path | None = None,
        now_fn=time.time,
        token_ttl: float = TOKEN_TTL_SECONDS,
    ):
        self._path = Path(path) if path is not None else None
        self._accounts_path = Path(accounts_path) if accounts_path is not None else None
        self._now = now_fn
        self._token_ttl = token_ttl
        self._entries: dict[tuple[str, str], RulingEntry] = {}
        self._revisions: dict[str, int] = {}
        self._tokens: dict[str, tuple[str, float]] = {}
        self._crash_hook = None  # test-only fault injection point
        if self._path is not None and self._path.exists():
            self._load()

    # ---------------------------------------------------- persistence ---

    def _load(self) -> None:
        text = self._path.read_text(encoding="utf-8")
        for line_no, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line:
                continue
            try:
                entry = RulingEntry.from_dict(json.loads(line))
            except (json.JSONDecodeError, MalformedEntryError) as exc:
                raise MalformedEntryError(
                    f"{self._path}:{line_no}: {exc}"
                ) from None
            key = (entry.ticker.upper(), entry.provenance)
            self._entries[key] = entry
            prev = self._revisions.get(entry.ticker.upper(), 0)
            self._revisions[entry.ticker.upper()] = max(prev, entry.revision)

    def _snapshot_text(self) -> str:
        lines = []
        for key in sorted(self._entries):
            entry = self._entries[key]
            lines.append(json.dumps(entry.to_dict(), sort_keys=True, separators=(",", ":")))
        return "\n".join(lines) + ("\n" if lines else "")

    def _persist(self) -> None:
        if self._path is None:
            return
        atomic_write_text(self._path, self._snapshot_text(), crash_hook=self._crash_hook)

    def flush(self) -> None:
        self._persist()

    def close(self) -> None:
        self._persist()

    # ------------------------------------------------------------ auth ---

    def _accounts(self) -> dict[str, ScholarAccount]:
        if self._accounts_path is None:
            return {}
        return load_accounts(self._accounts_path)

    def login(self, scholar_id: str, password: str) -> tuple[str, float]:
        """Verify credentials, return (token, expires_at_epoch)."""
        accounts = self._accounts()
        acct = accounts.get(scholar_id)
        if acct is None:
            # hash anyway so unknown ids cost the same as wrong passwords
            _hash_password(password, b"\x00" * 16)
            raise AuthError("bad credentials")
        candidate = _hash_password(password, acct.salt)
        if not hmac.compare_digest(candidate, acct.password_hash):
            raise AuthError("bad credentials")
        token = secrets.token_urlsafe(32)
        expires = float(self._now()) + self._token_ttl
        self._tokens[token] = (scholar_id, expires)
        return token, expires

    def verify_token(self, token: str) -> str:
        """Return the scholar id for a live token or raise AuthError."""
        record = self._tokens.get(token)
        if record is None:
            raise AuthError("invalid token")
        scholar_id, expires = record
        if float(self._now()) >= expires:
            del self._tokens[token]
            raise AuthError("token expired")
        return scholar_id

    # --------------------------------------------------------- queries ---

    def lookup(self, query: str) -> RulingEntry | None:
        """Find by ticker or display name, scholars shadowing machine entries."""
        q = query.strip().casefold()
        if not q:
            return None
        for provenance in ("scholar", "machine"):
            entry = self._entries.get((q.upper(), provenance))
            if entry is not None:
                return entry
        for provenance in ("scholar", "machine"):
            for (_, prov), entry in sorted(self._entries.items()):
                if prov == provenance and entry.name.casefold() == q:
                    return entry
        return None

    def get(self, ticker: str, provenance: str) -> RulingEntry | None:
        return self._entries.get((ticker.strip().upper(), provenance))

    def list_all(self) -> list[RulingEntry]:
        """Current entry per ticker (scholar preferred), ticker-sorted."""
        chosen: dict[str, RulingEntry] = {}
        for (ticker, provenance), entry in self._entries.items():
            current = chosen.get(ticker)
            if current is None or (
                provenance == "scholar" and current.provenance == "machine"
            ):
                chosen[ticker] = entry
        return [chosen[t] for t in sorted(chosen)]

    def __len__(self) -> int:
        return len(self._entries)

    # ---------------------------------------------------------- writes ---

    def _timestamps(self, key: tuple[str, str]) -> tuple[str, str]:
        now_iso = datetime.fromtimestamp(float(self._now()), timezone.utc).isoformat(
            timespec="seconds"
        )
        prior = self._entries.get(key)
        created = prior.created_at if prior is not None else now_iso
        return created, now_iso

    def _next_revision(self, ticker: str) -> int:
        rev = self._revisions.get(ticker.upper(), 0) + 1
        return rev

    def upsert_scholar_ruling(self, token: str, draft: RulingDraft) -> RulingEntry:
        scholar_id = self.verify_token(token)
        ticker = draft.ticker.strip().upper()
        if not ticker:
            raise MalformedEntryError("ticker must be non-empty")
        features = draft.features or FeatureVector.from_values([0] * 18)
        verdict_text = draft.verdict_text or draft.verdict.value
        explanation = explain(
            features, draft.verdict, provenance="scholar", scholar_text=verdict_text
        )
        key = (ticker, "scholar")
        created, updated = self._timestamps(key)
        entry = RulingEntry(
            ticker=ticker,
            name=draft.name or ticker,
            verdict=draft.verdict,
            verdict_text=verdict_text,
            provenance="scholar",
            features=features,
            explanation=explanation,
            editor=scholar_id,
            created_at=created,
            updated_at=updated,
            revision=self._next_revision(ticker),
        )
        self._entries[key] = entry
        self._revisions[ticker] = entry.revision
        self._persist()
        return entry

    def cache_machine_ruling(
        self,
        *,
        ticker: str,
        name: str,
        verdict: Ruling,
        features: FeatureVector,
        explanation: Explanation,
    ) -> RulingEntry:
        """Store (or overwrite) the machine classification for a ticker."""
        ticker = ticker.strip().upper()
        if not ticker:
            raise MalformedEntryError("ticker must be non-empty")
        key = (ticker, "machine")
        created, updated = self._timestamps(key)
        entry = RulingEntry(
            ticker=ticker,
            name=name or ticker,
            verdict=verdict,
            verdict_text=explanation.verdict_text,
            provenance="machine",
            features=features,
            explanation=explanation,
            editor="system",
            created_at=created,
            updated_at=updated,
            revision=self._next_revision(ticker),
        )
        self._entries[key] = entry
        self._revisions[ticker] = entry.revision
        self._persist()
        return entry

    def delete_machine(self, ticker: str) -> bool:
        """Drop the machine cache entry; scholar entries are never deleted."""
        key = (ticker.strip().upper(), "machine")
        if key not in self._entries:
            return False
        del self._entries[key]
        self._persist()
        return True
