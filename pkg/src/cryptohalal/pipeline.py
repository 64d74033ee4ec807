"""The end-to-end classification pipeline shared by the CLI and the service.

Flow: store lookup (a scholar ruling short-circuits everything) ->
resolve metadata -> fetch the official website -> preprocess -> extract
features -> predict -> explain -> cache the machine ruling.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Ruling
from .featurex import Explanation, FeatureVector, Lexicon, default_lexicon, explain, extract
from .learners import TrainedModel, predict
from .market import MarketClient
from .rulestore import RuleStore, RulingEntry
from .textprep import preprocess


class UndecodableContentError(ValueError):
    """Raised when a fetched body is binary junk rather than text."""


@dataclass(frozen=True)
class ClassifyResult:
    ticker: str
    name: str
    verdict: Ruling
    verdict_text: str
    provenance: str
    confidence: float | None  # None when served from a scholar entry
    explanation: Explanation
    low_evidence: bool
    revision: int | None
    cached: bool  # True when answered from the store without classifying

    @property
    def high_priority_majority(self) -> bool:
        return self.explanation.high_priority_majority

    def to_dict(self) -> dict:
        return {
            "ticker": self.ticker,
            "name": self.name,
            "verdict": self.verdict.value,
            "verdict_text": self.verdict_text,
            "provenance": self.provenance,
            "confidence": self.confidence,
            "explanation": self.explanation.to_dict(),
            "high_priority_majority": self.high_priority_majority,
            "low_evidence": self.low_evidence,
            "revision": self.revision,
            "cached": self.cached,
        }


def _result_from_entry(entry: RulingEntry) -> ClassifyResult:
    return ClassifyResult(
        ticker=entry.ticker,
        name=entry.name,
        verdict=entry.verdict,
        verdict_text=entry.verdict_text,
        provenance=entry.provenance,
        confidence=None,
        explanation=entry.explanation,
        low_evidence=entry.features.all_zero,
        revision=entry.revision,
        cached=True,
    )


def classify_query(
    query: str,
    *,
    model: TrainedModel,
    market_client: MarketClient,
    store: RuleStore | None = None,
    lexicon: Lexicon | None = None,
    min_count: int = 1,
) -> ClassifyResult:
    """Classify a coin by its website text, honoring scholar rulings first.

    A stored scholar entry is returned verbatim with no network I/O.
    Cached machine entries never short-circuit: the coin is re-classified
    and the cache refreshed. Raises market errors and
    UndecodableContentError for the caller to surface.
    """
    if store is not None:
        hit = store.lookup(query)
        if hit is not None and hit.provenance == "scholar":
            return _result_from_entry(hit)

    lex = lexicon if lexicon is not None else default_lexicon()
    meta = market_client.resolve_metadata(query)
    doc = market_client.fetch_site(meta.website_urls[0])
    if b"\x00" in doc.content:
        raise UndecodableContentError(
            f"page body for {meta.ticker} is not decodable text/HTML"
        )
    stems = preprocess(doc)
    fv = extract(stems, lex, min_count=min_count)
    prediction = predict(model, fv)
    explanation = explain(fv, prediction.label, provenance="machine")

    revision = None
    if store is not None:
        entry = store.cache_machine_ruling(
            ticker=meta.ticker,
            name=meta.name,
            verdict=prediction.label,
            features=fv,
            explanation=explanation,
        )
        revision = entry.revision

    return ClassifyResult(
        ticker=meta.ticker,
        name=meta.name,
        verdict=prediction.label,
        verdict_text=explanation.verdict_text,
        provenance="machine",
        confidence=prediction.score,
        explanation=explanation,
        low_evidence=fv.all_zero,
        revision=revision,
        cached=False,
    )
