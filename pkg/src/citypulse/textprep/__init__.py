"""Tweet preprocessing: tokenization, the cleaning steps and the two presets.

Steps before ``tokenize`` in a pipeline work on the raw string (URL spans are
left untouched); steps after it work on token lists. ``lowercase`` and
``squeeze_repeats`` are the only steps valid on both sides.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from functools import lru_cache
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

from ..errors import ConfigError, UnknownStep
from .tokenizer import Kind, Token, load_word_file, parse_word_list, tokenize, url_spans

__all__ = [
    "Kind", "Token", "tokenize", "lowercase", "squeeze_repeats", "strip_punctuation",
    "strip_entities_and_digits", "remove_stopwords_and_short", "lemmatize_plurals",
    "PipelineConfig", "PreprocessedDoc", "run_pipeline", "localize_timestamp",
    "TOPIC", "TRAVEL", "PRESETS", "STEPS",
]

_REPEAT_RE = re.compile(r"(.)\1{3,}", re.DOTALL)
_CASED_KINDS = (Kind.WORD, Kind.HASHTAG, Kind.MENTION)


def _outside_urls(text: str, fn) -> str:
    out = []
    pos = 0
    for start, end in url_spans(text):
        out.append(fn(text[pos:start]))
        out.append(text[start:end])
        pos = end
    out.append(fn(text[pos:]))
    return "".join(out)


def squeeze(s: str) -> str:
    return _REPEAT_RE.sub(r"\1\1\1", s)


def lowercase(tokens: List[Token]) -> List[Token]:
    return [Token(t.surface.lower(), t.kind) if t.kind in _CASED_KINDS else t for t in tokens]


def squeeze_repeats(tokens: List[Token]) -> List[Token]:
    """Cut every run of one character longer than three down to exactly three."""
    return [t if t.kind is Kind.URL else Token(squeeze(t.surface), t.kind) for t in tokens]


def strip_punctuation(tokens: List[Token]) -> List[Token]:
    return [t for t in tokens if t.kind not in (Kind.PUNCT, Kind.EMOTICON)]


_DROP_ENTITIES = (Kind.URL, Kind.MENTION, Kind.HASHTAG, Kind.NUMBER)


def strip_entities_and_digits(tokens: List[Token]) -> List[Token]:
    return [
        t for t in tokens
        if t.kind not in _DROP_ENTITIES and not any(ch.isdigit() for ch in t.surface)
    ]


def remove_stopwords_and_short(tokens: List[Token], config: "PipelineConfig") -> List[Token]:
    drop = config.stopwords | config.shortwords
    return [
        t for t in tokens
        if len(t.surface) >= config.min_length and t.surface.casefold() not in drop
    ]


@lru_cache(maxsize=None)
def _plural_table(lang: str):
    keep, mapped = set(), {}
    for line in load_word_file(f"plural_exceptions_{lang}.txt"):
        parts = line.split()
        if len(parts) == 2:
            mapped[parts[0]] = parts[1]
        else:
            keep.add(parts[0])
    return frozenset(keep), mapped


def _singular_en(w: str, keep, mapped) -> str:
    if w in mapped:
        return mapped[w]
    if w in keep or len(w) <= 3:
        return w
    if w.endswith("ies") and len(w) > 4:
        return w[:-3] + "y"
    if w.endswith(("sses", "shes", "ches", "xes", "zzes")):
        return w[:-2]
    if w.endswith("s") and not w.endswith(("ss", "us", "is")):
        return w[:-1]
    return w


_PT_SUFFIXES = (
    ("ões", "ão"), ("ães", "ão"), ("ais", "al"), ("éis", "el"), ("eis", "el"),
    ("óis", "ol"), ("ns", "m"), ("res", "r"), ("zes", "z"), ("ses", "s"),
)


def _singular_pt(w: str, keep, mapped) -> str:
    if w in mapped:
        return mapped[w]
    if w in keep or len(w) <= 3:
        return w
    for suffix, repl in _PT_SUFFIXES:
        if w.endswith(suffix) and len(w) > len(suffix) + 1:
            return w[: -len(suffix)] + repl
    if w.endswith("s"):
        return w[:-1]
    return w


_SINGULARIZERS = {"en": _singular_en, "pt": _singular_pt}


def singularize(word: str, lang: str) -> str:
    rule = _SINGULARIZERS.get(lang)
    if rule is None:
        return word
    keep, mapped = _plural_table(lang)
    # iterate to a fixed point so the step is idempotent on odd inputs ("ssesses");
    # a clitic "'s" is not a plural, and stripping it would leave a dangling apostrophe
    for _ in range(len(word)):
        if word.endswith(("'s", "’s")):
            break
        nxt = rule(word, keep, mapped)
        if nxt == word:
            break
        word = nxt
    return word
    keep, mapped = _plural_table(lang)
    # iterate to a fixed point so the step is idempotent on odd inputs ("ssesses")
    for _ in range(len(word)):
        nxt = rule(word, keep, mapped)
        if nxt == word:
            break
        word = nxt
    return word


def lemmatize_plurals(tokens: List[Token], lang: str) -> List[Token]:
    return [Token(singularize(t.surface, lang), t.kind) if t.kind is Kind.WORD else t for t in tokens]


STEPS = (
    "lowercase", "squeeze_repeats", "tokenize", "strip_punctuation",
    "strip_entities_and_digits", "remove_stopwords_and_short", "lemmatize_plurals",
)
_TEXT_STEPS = {"lowercase", "squeeze_repeats"}

TOPIC = (
    "lowercase", "squeeze_repeats", "tokenize", "strip_punctuation",
    "strip_entities_and_digits", "remove_stopwords_and_short", "lemmatize_plurals",
)
TRAVEL = ("lowercase", "squeeze_repeats", "tokenize", "strip_entities_and_digits",
          "remove_stopwords_and_short")
PRESETS = {"topic": TOPIC, "travel": TRAVEL}


@lru_cache(maxsize=None)
def bundled_words(name: str) -> FrozenSet[str]:
    return frozenset(w.casefold() for w in load_word_file(name))


def read_word_list(path) -> FrozenSet[str]:
    with open(path, encoding="utf-8") as fh:
        return frozenset(w.casefold() for w in parse_word_list(fh.read()))


@dataclass(frozen=True)
class PipelineConfig:
    steps: Tuple[str, ...]
    lang: str = "en"
    stopwords: FrozenSet[str] = frozenset()
    shortwords: FrozenSet[str] = frozenset()
    min_length: int = 2

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        seen_tokenize = False
        for step in self.steps:
            if step not in STEPS:
                raise UnknownStep(step)
            if step == "tokenize":
                seen_tokenize = True
            elif not seen_tokenize and step not in _TEXT_STEPS and "tokenize" in self.steps:
                raise ConfigError(f"step {step!r} must come after tokenize")
        if self.min_length < 0:
            raise ConfigError("min_length must be non-negative")

    @classmethod
    def preset(cls, name: str, lang: str = "en", stopwords=None, shortwords=None,
               min_length: int = 2) -> "PipelineConfig":
        """A named preset with the bundled word lists for ``lang`` unless overridden."""
        try:
            steps = PRESETS[name]
        except KeyError:
            raise UnknownStep(f"unknown preset {name!r}") from None
        if stopwords is None:
            try:
                stopwords = bundled_words(f"stopwords_{lang}.txt")
            except FileNotFoundError:
                raise ConfigError(f"no bundled stop-word list for language {lang!r}") from None
        if shortwords is None:
            shortwords = bundled_words("shortwords.txt")
        return cls(steps, lang, frozenset(w.casefold() for w in stopwords),
                   frozenset(w.casefold() for w in shortwords), min_length)


@dataclass(frozen=True)
class PreprocessedDoc:
    tokens: Tuple[str, ...]
    source_id: str = ""


def apply_token_step(step: str, tokens: List[Token], config: PipelineConfig) -> List[Token]:
    if step == "lowercase":
        return lowercase(tokens)
    if step == "squeeze_repeats":
        return squeeze_repeats(tokens)
    if step == "strip_punctuation":
        return strip_punctuation(tokens)
    if step == "strip_entities_and_digits":
        return strip_entities_and_digits(tokens)
    if step == "remove_stopwords_and_short":
        return remove_stopwords_and_short(tokens, config)
    if step == "lemmatize_plurals":
        return lemmatize_plurals(tokens, config.lang)
    raise UnknownStep(step)


def run_tokens(text: str, config: PipelineConfig) -> List[Token]:
    tokens: Optional[List[Token]] = None
    for step in config.steps:
        if step == "tokenize":
            if tokens is None:
                tokens = tokenize(text)
        elif tokens is None:
            if step == "lowercase":
                text = _outside_urls(text, str.lower)
            elif step == "squeeze_repeats":
                text = _outside_urls(text, squeeze)
            else:
                tokens = apply_token_step(step, tokenize(text), config)
        else:
            tokens = apply_token_step(step, tokens, config)
    return tokens if tokens is not None else tokenize(text)


def run_pipeline(text: str, config: PipelineConfig, source_id: str = "") -> PreprocessedDoc:
    return PreprocessedDoc(tuple(t.surface for t in run_tokens(text, config)), source_id)


def localize_timestamp(utc: datetime, offset_minutes: int) -> datetime:
    """Shift a UTC timestamp into a fixed-offset local zone (no DST)."""
    if utc.tzinfo is None:
        utc = utc.replace(tzinfo=timezone.utc)
    return utc.astimezone(timezone(timedelta(minutes=offset_minutes)))
