"""Authoring lints for challenge sets: vocabulary frequency and brevity.

Probe sentences should stay easy for any reasonable system: every source
token frequent in the training corpus, and the whole sentence short. These
checks are advisory; they never reject a set by themselves.

The tokenizer is deliberately simple and fully specified so counts replicate
anywhere: lowercase, split on whitespace, strip punctuation from both ends of
each token. Apostrophes inside a token survive ("don't", "o'clock"); there is
no stemming or lemmatization, frequency is per surface form.
"""

from __future__ import annotations

import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Mapping

from .core import DocumentError

if TYPE_CHECKING:
    from .core import ChallengeSet

DEFAULT_MIN_COUNT = 100
DEFAULT_MAX_SOURCE_TOKENS = 15

RARE_TOKEN = "rare-token"
NONCE_TOKEN = "nonce-token"
LONG_SENTENCE = "long-sentence"


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def tokenize(text: str) -> list[str]:
    """Lowercase, split on whitespace, strip surrounding punctuation."""
    tokens = []
    for raw in text.lower().split():
        start, end = 0, len(raw)
        while start < end and _is_punct(raw[start]):
            start += 1
        while end > start and _is_punct(raw[end - 1]):
            end -= 1
        if start < end:
            tokens.append(raw[start:end])
    return tokens


@dataclass(frozen=True)
class FrequencyTable:
    """Per-token occurrence counts over some training corpus."""

    counts: Mapping[str, int]
    total: int

    def __post_init__(self):
        for token, count in self.counts.items():
            if count < 0:
                raise ValueError(f"negative count for token {token!r}")
        if self.total < 0:
            raise ValueError("negative total")

    def lookup(self, token: str) -> int:
        """Occurrence count of ``token``; absent tokens count 0."""
        return self.counts.get(token.lower(), 0)


def load_frequency_table(data: bytes | str, mode: str = "table") -> FrequencyTable:
    """Build a frequency table from ``token<TAB>count`` lines or raw text.

    ``mode`` is "table" for the tab-separated format or "corpus" to tokenize
    and count the input itself.
    """
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    if mode == "corpus":
        counts = Counter(tokenize(data))
        if not counts:
            raise DocumentError("empty corpus")
        return FrequencyTable(dict(counts), sum(counts.values()))
    if mode != "table":
        raise ValueError(f"unknown mode {mode!r} (expected 'table' or 'corpus')")

    counts: Counter[str] = Counter()
    saw_line = False
    for lineno, line in enumerate(data.splitlines(), start=1):
        if not line.strip():
            continue
        saw_line = True
        token, sep, count_text = line.partition("\t")
        if not sep or not token:
            raise DocumentError(f"expected token<TAB>count", f"line {lineno}")
        try:
            count = int(count_text)
        except ValueError:
            raise DocumentError(f"malformed count {count_text!r}", f"line {lineno}") from None
        if count < 0:
            raise DocumentError(f"negative count {count}", f"line {lineno}")
        counts[token.lower()] += count
    if not saw_line:
        raise DocumentError("empty frequency table")
    return FrequencyTable(dict(counts), sum(counts.values()))


@dataclass(frozen=True)
class LintFinding:
    """One advisory finding; ``token`` for vocabulary kinds, ``length`` for
    long-sentence."""

    item_id: str
    kind: str
    detail: str
    token: str | None = None
    length: int | None = None

    def as_line(self) -> str:
        return f"{self.item_id}: {self.kind}: {self.detail}"


@dataclass
class LintReport:
    findings: list[LintFinding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.findings

    def as_lines(self) -> list[str]:
        return [f.as_line() for f in self.findings]

    def as_dicts(self) -> list[dict]:
        out = []
        for f in self.findings:
            obj: dict[str, object] = {"item_id": f.item_id, "kind": f.kind, "detail": f.detail}
            if f.token is not None:
                obj["token"] = f.token
            if f.length is not None:
                obj["length"] = f.length
            out.append(obj)
        return out


def lint_vocabulary(
    challenge_set: "ChallengeSet",
    freq: FrequencyTable,
    min_count: int = DEFAULT_MIN_COUNT,
    exceptions: Iterable[str] = (),
) -> LintReport:
    """Flag source tokens below the frequency floor.

    Zero-count tokens are nonce-token findings regardless of ``min_count``;
    tokens with 0 < count < min_count are rare-token findings. One finding per
    (item, token), in item order then first token position. Only the source
    side is checked: the floor governs source-language word choice.
    """
    allowed = {t.lower() for t in exceptions}
    report = LintReport()
    for item in challenge_set.items:
        seen: set[str] = set()
        for token in tokenize(item.source):
            if token in seen or token in allowed:
                continue
            seen.add(token)
            count = freq.lookup(token)
            if count == 0:
                report.findings.append(LintFinding(
                    item.id, NONCE_TOKEN, f"{token!r} (0 occurrences)", token=token,
                ))
            elif count < min_count:
                report.findings.append(LintFinding(
                    item.id, RARE_TOKEN,
                    f"{token!r} ({count} occurrences, floor {min_count})",
                    token=token,
                ))
    return report


def lint_length(
    challenge_set: "ChallengeSet", max_tokens: int = DEFAULT_MAX_SOURCE_TOKENS
) -> LintReport:
    """Flag items whose tokenized source exceeds ``max_tokens``."""
    report = LintReport()
    for item in challenge_set.items:
        length = len(tokenize(item.source))
        if length > max_tokens:
            report.findings.append(LintFinding(
                item.id, LONG_SENTENCE,
                f"source has {length} tokens, limit {max_tokens}",
                length=length,
            ))
    return report
