import json

import pytest

from cryptohalal.corpus import Ruling
from cryptohalal.featurex import FeatureVector, explain, extract
from cryptohalal.rulestore import (
    AuthError,
    MalformedEntryError,
    RuleStore,
    RuleStoreError,
    RulingDraft,
    add_account,
    atomic_write_text,
    load_accounts,
)


@pytest.fixture
def accounts(tmp_path):
    p = tmp_path / "accounts.json"
    add_account(p, "fatima", "Dr. Fatima", "correct horse battery")
    return p


@pytest.fixture
def store(tmp_path, accounts):
    s = RuleStore(tmp_path / "store.jsonl", accounts_path=accounts)
    yield s
    s.close()


def machine_entry(store, ticker="LENDX", stems=("lend", "margin")):
    fv = extract(list(stems))
    verdict = Ruling.HARAM
    return store.cache_machine_ruling(
        ticker=ticker,
        name=ticker.title(),
        verdict=verdict,
        features=fv,
        explanation=explain(fv, verdict),
    )


def login(store):
    token, _ = store.login("fatima", "correct horse battery")
    return token


class TestAccounts:
    def test_roundtrip(self, accounts):
        loaded = load_accounts(accounts)
        assert set(loaded) == {"fatima"}
        assert loaded["fatima"].display_name == "Dr. Fatima"
        assert len(loaded["fatima"].salt) == 16

    def test_replace_existing(self, accounts):
        add_account(accounts, "fatima", "F", "another password!")
        assert load_accounts(accounts)["fatima"].display_name == "F"

    def test_short_password_rejected(self, tmp_path):
        with pytest.raises(RuleStoreError):
            add_account(tmp_path / "a.json", "x", "X", "short")


class TestAuth:
    def test_login_and_verify(self, store):
        token, expires = store.login("fatima", "correct horse battery")
        assert store.verify_token(token) == "fatima"
        assert expires > 0

    def test_wrong_password(self, store):
        with pytest.raises(AuthError):
            store.login("fatima", "nope nope nope")

    def test_unknown_id_same_error(self, store):
        with pytest.raises(AuthError, match="bad credentials"):
            store.login("ghost", "correct horse battery")

    def test_garbage_token(self, store):
        with pytest.raises(AuthError):
            store.verify_token("not-a-token")

    def test_token_expiry(self, tmp_path, accounts):
        clock = [1_000_000.0]
        s = RuleStore(
            tmp_path / "s.jsonl", accounts_path=accounts, now_fn=lambda: clock[0]
        )
        token, expires = s.login("fatima", "correct horse battery")
        assert expires == 1_000_000.0 + 12 * 3600
        clock[0] += 11 * 3600
        assert s.verify_token(token) == "fatima"
        clock[0] += 2 * 3600
        with pytest.raises(AuthError, match="expired"):
            s.verify_token(token)


class TestWrites:
    def test_machine_then_scholar_revisions(self, store):
        e1 = machine_entry(store)
        assert e1.revision == 1
        assert e1.editor == "system"
        token = login(store)
        e2 = store.upsert_scholar_ruling(
            token, RulingDraft(ticker="LENDX", verdict=Ruling.HARAM)
        )
        assert e2.revision == 2
        assert e2.editor == "fatima"
        e3 = store.upsert_scholar_ruling(
            token, RulingDraft(ticker="LENDX", verdict=Ruling.HARAM, verdict_text="Haram: riba")
        )
        assert e3.revision == 3
        assert e3.created_at == e2.created_at

    def test_default_verdict_text(self, store):
        token = login(store)
        e = store.upsert_scholar_ruling(token, RulingDraft(ticker="XX", verdict=Ruling.HALAL))
        assert e.verdict_text == "Halal"
        assert e.explanation.verdict_text == "Halal"

    def test_upsert_requires_valid_token(self, store):
        with pytest.raises(AuthError):
            store.upsert_scholar_ruling("bogus", RulingDraft(ticker="XX", verdict=Ruling.HALAL))

    def test_empty_ticker_rejected(self, store):
        token = login(store)
        with pytest.raises(MalformedEntryError):
            store.upsert_scholar_ruling(token, RulingDraft(ticker="  ", verdict=Ruling.HALAL))

    def test_delete_machine(self, store):
        machine_entry(store)
        assert store.delete_machine("lendx") is True
        assert store.delete_machine("LENDX") is False
        assert store.get("LENDX", "machine") is None


class TestLookup:
    def test_by_ticker_case_insensitive(self, store):
        machine_entry(store, "LENDX")
        assert store.lookup(" lendx ").ticker == "LENDX"

    def test_by_name(self, store):
        machine_entry(store, "LENDX")
        assert store.lookup("Lendx").ticker == "LENDX"

    def test_scholar_shadows_machine(self, store):
        machine_entry(store, "LENDX")
        token = login(store)
        store.upsert_scholar_ruling(
            token, RulingDraft(ticker="LENDX", verdict=Ruling.HARAM, verdict_text="Haram: riba")
        )
        hit = store.lookup("LENDX")
        assert hit.provenance == "scholar"
        assert hit.verdict_text == "Haram: riba"
        # direct access to the shadowed machine entry still works
        assert store.get("LENDX", "machine").provenance == "machine"

    def test_miss_returns_none(self, store):
        assert store.lookup("ZZZ") is None
        assert store.lookup("") is None

    def test_list_all_shadowing_and_order(self, store):
        machine_entry(store, "BBB")
        machine_entry(store, "AAA")
        token = login(store)
        store.upsert_scholar_ruling(token, RulingDraft(ticker="BBB", verdict=Ruling.HALAL))
        entries = store.list_all()
        assert [(e.ticker, e.provenance) for e in entries] == [
            ("AAA", "machine"),
            ("BBB", "scholar"),
        ]


class TestPersistence:
    def test_reload_continues_revisions(self, tmp_path, accounts):
        path = tmp_path / "s.jsonl"
        s1 = RuleStore(path, accounts_path=accounts)
        machine_entry(s1, "LENDX")
        token, _ = s1.login("fatima", "correct horse battery")
        s1.upsert_scholar_ruling(token, RulingDraft(ticker="LENDX", verdict=Ruling.HARAM))
        s1.close()

        s2 = RuleStore(path, accounts_path=accounts)
        assert len(s2) == 2
        e = machine_entry(s2, "LENDX")
        assert e.revision == 3

    def test_snapshot_is_sorted_jsonl(self, tmp_path, accounts):
        path = tmp_path / "s.jsonl"
        s = RuleStore(path, accounts_path=accounts)
        machine_entry(s, "ZED")
        machine_entry(s, "ABC")
        s.close()
        lines = path.read_text(encoding="utf-8").splitlines()
        tickers = [json.loads(l)["ticker"] for l in lines]
        assert tickers == ["ABC", "ZED"]

    def test_malformed_line_reported_with_position(self, tmp_path):
        path = tmp_path / "s.jsonl"
        path.write_text('{"ticker": "X"}\n', encoding="utf-8")
        with pytest.raises(MalformedEntryError, match=r"s\.jsonl:1"):
            RuleStore(path)

    def test_in_memory_store_never_writes(self, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        s = RuleStore()
        machine_entry(s, "MEM")
        s.close()
        assert list(tmp_path.iterdir()) == []


class TestAtomicWrite:
    def test_plain_write(self, tmp_path):
        p = tmp_path / "out.txt"
        atomic_write_text(p, "hello\n")
        assert p.read_text() == "hello\n"
        assert list(tmp_path.iterdir()) == [p]

    def test_crash_leaves_previous_content(self, tmp_path):
        p = tmp_path / "out.txt"
        atomic_write_text(p, "v1\n")

        def boom():
            raise OSError("injected crash")

        with pytest.raises(OSError):
            atomic_write_text(p, "v2\n", crash_hook=boom)
        assert p.read_text() == "v1\n"
        assert list(tmp_path.iterdir()) == [p]  # temp file cleaned up

    def test_crash_safety_100_trials(self, tmp_path, accounts):
        """Crash every write at the fsync-to-rename window, 100 times; the
        store file must stay byte-identical and parseable throughout."""
        path = tmp_path / "s.jsonl"
        store = RuleStore(path, accounts_path=accounts)
        machine_entry(store, "BASE")
        baseline = path.read_text(encoding="utf-8")

        def boom():
            raise OSError("injected crash")

        survived_crashes = 0
        for trial in range(100):
            store._crash_hook = boom
            with pytest.raises(OSError):
                machine_entry(store, f"T{trial:03d}")
            store._crash_hook = None

            assert path.read_text(encoding="utf-8") == baseline
            reloaded = RuleStore(path, accounts_path=accounts)
            assert [e.ticker for e in reloaded.list_all()] == ["BASE"]
            leftovers = [
                f for f in tmp_path.iterdir() if f.name.startswith("s.jsonl.tmp")
            ]
            assert leftovers == []
            survived_crashes += 1
        assert survived_crashes == 100
