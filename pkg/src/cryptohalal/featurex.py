"""Keyword feature extraction and verdict explanations.

A lexicon maps each feature to stemmed keyword phrases; extraction marks
a feature present when any of its phrases occurs contiguously in the
stem sequence. Explanations order triggered features High before Low
before Neutral so the most compliance-relevant signals lead.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Mapping

from .corpus import FEATURE_ORDER, N_FEATURES, FeatureId, Priority, Ruling
from .porter import stem_word

MAX_PATTERN_TERMS = 4

_TERM_RE = re.compile(r"^[a-z0-9]+$")
_PRIORITY_RANK = {Priority.HIGH: 0, Priority.LOW: 1, Priority.NEUTRAL: 2}


class LexiconError(ValueError):
    """Raised for malformed lexicon files."""


@dataclass(frozen=True)
class Lexicon:
    entries: Mapping[FeatureId, tuple[tuple[str, ...], ...]]

    def patterns(self, fid: FeatureId) -> tuple[tuple[str, ...], ...]:
        return self.entries.get(fid, ())


@dataclass(frozen=True)
class PatternMatch:
    pattern: tuple[str, ...]
    count: int

    def to_dict(self) -> dict:
        return {"pattern": " ".join(self.pattern), "count": self.count}

    @classmethod
    def from_dict(cls, d: dict) -> "PatternMatch":
        return cls(pattern=tuple(d["pattern"].split()), count=int(d["count"]))


@dataclass(frozen=True)
class FeatureVector:
    """18 binary values plus, for extractor output, the matches behind each 1."""

    values: tuple[int, ...]
    evidence: Mapping[FeatureId, tuple[PatternMatch, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.values) != N_FEATURES:
            raise ValueError(f"expected {N_FEATURES} values, got {len(self.values)}")
        if any(v not in (0, 1) for v in self.values):
            raise ValueError("feature values must be 0 or 1")

    @classmethod
    def from_values(cls, values) -> "FeatureVector":
        """Vector without evidence, e.g. one entered by a scholar."""
        return cls(values=tuple(int(v) for v in values))

    def value(self, fid: FeatureId) -> int:
        return self.values[FEATURE_ORDER.index(fid)]

    @property
    def all_zero(self) -> bool:
        return not any(self.values)

    def to_dict(self) -> dict:
        return {
            "values": list(self.values),
            "evidence": {
                fid.value: [m.to_dict() for m in matches]
                for fid, matches in sorted(
                    self.evidence.items(), key=lambda kv: FEATURE_ORDER.index(kv[0])
                )
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureVector":
        evidence = {
            FeatureId(name): tuple(PatternMatch.from_dict(m) for m in matches)
            for name, matches in d.get("evidence", {}).items()
        }
        return cls(values=tuple(int(v) for v in d["values"]), evidence=evidence)


def parse_lexicon(text: str, origin: str = "<string>") -> Lexicon:
    """Parse `FeatureName: pattern[, pattern...]` lines into a Lexicon.

    Every pattern term must already be a Porter fixed point; violations
    are rejected with the stemmed form suggested.
    """
    entries: dict[FeatureId, list[tuple[str, ...]]] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise LexiconError(f"{origin}:{line_no}: expected 'FeatureName: patterns'")
        name, _, rest = line.partition(":")
        name = name.strip()
        try:
            fid = FeatureId(name)
        except ValueError:
            raise LexiconError(f"{origin}:{line_no}: unknown feature name {name!r}") from None
        patterns = entries.setdefault(fid, [])
        for chunk in rest.split(","):
            terms = tuple(chunk.split())
            if not terms:
                continue
            if len(terms) > MAX_PATTERN_TERMS:
                raise LexiconError(
                    f"{origin}:{line_no}: pattern {' '.join(terms)!r} has more than "
                    f"{MAX_PATTERN_TERMS} terms"
                )
            for term in terms:
                if not _TERM_RE.match(term):
                    raise LexiconError(
                        f"{origin}:{line_no}: pattern term {term!r} must be "
                        "lowercase alphanumeric"
                    )
                stemmed = stem_word(term)
                if stemmed != term:
                    raise LexiconError(
                        f"{origin}:{line_no}: pattern term {term!r} is not a "
                        f"stemming fixed point; use {stemmed!r}"
                    )
            patterns.append(terms)
    return Lexicon(entries={fid: tuple(pats) for fid, pats in entries.items()})


def load_lexicon(path: str | Path) -> Lexicon:
    p = Path(path)
    return parse_lexicon(p.read_text(encoding="utf-8"), origin=str(p))


@lru_cache(maxsize=1)
def default_lexicon() -> Lexicon:
    path = resources.files("cryptohalal").joinpath("data/lexicon.txt")
    return parse_lexicon(path.read_text(encoding="utf-8"), origin="data/lexicon.txt")


def _count_pattern(stems: list[str], pattern: tuple[str, ...]) -> int:
    # token-aligned overlapping occurrences, counted on a separator-joined
    # string so multi-term phrases stay a single regex search
    sep = "\x1f"
    haystack = sep + sep.join(stems) + sep
    needle = sep + sep.join(pattern) + sep
    return len(re.findall(f"(?=({re.escape(needle)}))", haystack))


def extract(stems: list[str], lexicon: Lexicon | None = None, min_count: int = 1) -> FeatureVector:
    """Mark each feature whose patterns occur at least min_count times."""
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    lex = lexicon if lexicon is not None else default_lexicon()
    values = []
    evidence: dict[FeatureId, tuple[PatternMatch, ...]] = {}
    for fid in FEATURE_ORDER:
        matches = []
        if stems:
            for pattern in lex.patterns(fid):
                count = _count_pattern(stems, pattern)
                if count >= min_count:
                    matches.append(PatternMatch(pattern=pattern, count=count))
        values.append(1 if matches else 0)
        if matches:
            evidence[fid] = tuple(matches)
    return FeatureVector(values=tuple(values), evidence=evidence)


@dataclass(frozen=True)
class TriggeredFeature:
    feature: FeatureId
    priority: Priority
    description: str
    evidence: tuple[PatternMatch, ...]

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.value,
            "priority": self.priority.value,
            "description": self.description,
            "evidence": [m.to_dict() for m in self.evidence],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TriggeredFeature":
        fid = FeatureId(d["feature"])
        return cls(
            feature=fid,
            priority=Priority(d["priority"]),
            description=d.get("description", fid.description),
            evidence=tuple(PatternMatch.from_dict(m) for m in d.get("evidence", [])),
        )


@dataclass(frozen=True)
class Explanation:
    verdict_text: str
    triggered: tuple[TriggeredFeature, ...]
    high_priority_majority: bool

    def to_dict(self) -> dict:
        return {
            "verdict_text": self.verdict_text,
            "triggered": [t.to_dict() for t in self.triggered],
            "high_priority_majority": self.high_priority_majority,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Explanation":
        return cls(
            verdict_text=d["verdict_text"],
            triggered=tuple(TriggeredFeature.from_dict(t) for t in d.get("triggered", [])),
            high_priority_majority=bool(d.get("high_priority_majority", False)),
        )


def explain(
    fv: FeatureVector,
    verdict: Ruling,
    provenance: str = "machine",
    scholar_text: str | None = None,
) -> Explanation:
    """Build the user-facing explanation for a verdict.

    Machine verdicts are hedged as "Probably ..."; scholar verdicts keep
    the scholar's own wording. The high-priority-majority flag annotates
    but never overrides the verdict.
    """
    if provenance == "machine":
        verdict_text = "Probably Haram" if verdict is Ruling.HARAM else "Probably Halal"
    else:
        verdict_text = scholar_text if scholar_text else verdict.value

    triggered = tuple(
        TriggeredFeature(
            feature=fid,
            priority=fid.priority,
            description=fid.description,
            evidence=fv.evidence.get(fid, ()),
        )
        for fid in sorted(
            (f for f in FEATURE_ORDER if fv.value(f) == 1),
            key=lambda f: (_PRIORITY_RANK[f.priority], FEATURE_ORDER.index(f)),
        )
    )
    high_set = sum(1 for f in FEATURE_ORDER if f.priority is Priority.HIGH and fv.value(f))
    return Explanation(
        verdict_text=verdict_text,
        triggered=triggered,
        high_priority_majority=high_set > 3,
    )
