"""Tweet-aware tokenizer.

A rule cascade tried at each non-space position, first match wins:
URL, emoticon, mention, hashtag, number, word, symbol glyph, punctuation run.
Every non-whitespace character ends up in exactly one token, so joining the
surfaces reproduces the input minus its whitespace.
"""

from __future__ import annotations

import enum
import re
import unicodedata
from functools import lru_cache
from importlib import resources
from typing import List, NamedTuple


class Kind(enum.Enum):
    WORD = "Word"
    HASHTAG = "Hashtag"
    MENTION = "Mention"
    URL = "Url"
    EMOTICON = "Emoticon"
    NUMBER = "Number"
    PUNCT = "Punct"


class Token(NamedTuple):
    surface: str
    kind: Kind

    def __str__(self):
        return f"{self.surface}/{self.kind.value}"


URL_RE = re.compile(r"(?:https?://|www\.)[^\s]+", re.IGNORECASE)
# trailing characters that almost always close the sentence rather than the URL
URL_TRAILING = ".,;:!?)]}'\"…"
MENTION_RE = re.compile(r"@\w+")
HASHTAG_RE = re.compile(r"#\w+")
NUMBER_RE = re.compile(r"\d+(?:[.,:/]\d+)*(?!\w)")
WORD_RE = re.compile(r"\w+(?:['’]\w+)*")
SPACE_RE = re.compile(r"\s+")


def load_word_file(name: str) -> List[str]:
    """Read a bundled one-entry-per-line file, skipping blanks and ``#`` comments."""
    text = resources.files("citypulse.textprep").joinpath("data", name).read_text("utf-8")
    return parse_word_list(text)


def parse_word_list(text: str) -> List[str]:
    out = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(line)
    return out


@lru_cache(maxsize=None)
def _emoticon_re():
    patterns = sorted(set(load_word_file("emoticons.txt")), key=lambda p: (-len(p), p))
    return re.compile("|".join(re.escape(p) for p in patterns), re.IGNORECASE)


def _is_glyph(ch: str) -> bool:
    return unicodedata.category(ch) == "So"


def _is_regional(ch: str) -> bool:
    return "\U0001f1e6" <= ch <= "\U0001f1ff"


def _glyph_end(text: str, i: int) -> int:
    # keep variation selectors, skin-tone modifiers and ZWJ sequences attached
    j = i + 1
    n = len(text)
    if _is_regional(text[i]) and j < n and _is_regional(text[j]):
        return j + 1  # flag: a pair of regional indicators
    while j < n:
        c = text[j]
        if c in "\ufe0f\ufe0e" or "\U0001f3fb" <= c <= "\U0001f3ff":
            j += 1
        elif c == "\u200d" and j + 1 < n and _is_glyph(text[j + 1]):
            j += 2
        else:
            break
    return j


def _match_url(text, i):
    m = URL_RE.match(text, i)
    if not m:
        return None
    end = m.end()
    while end > i and text[end - 1] in URL_TRAILING:
        end -= 1
    return end if end > i + 4 else None


def _match_emoticon(text, i):
    m = _emoticon_re().match(text, i)
    if not m:
        return None
    end = m.end()
    if end < len(text) and text[end].isalnum():
        return None
    if text[i].isalnum() and i > 0 and text[i - 1].isalnum():
        return None
    return end


def _scan(text: str):
    """Yield ``(start, end, kind)`` for every token, left to right."""
    i = 0
    n = len(text)
    while i < n:
        m = SPACE_RE.match(text, i)
        if m:
            i = m.end()
            continue
        end = _match_url(text, i)
        if end:
            yield i, end, Kind.URL
            i = end
            continue
        end = _match_emoticon(text, i)
        if end:
            yield i, end, Kind.EMOTICON
            i = end
            continue
        for regex, kind in ((MENTION_RE, Kind.MENTION), (HASHTAG_RE, Kind.HASHTAG),
                            (NUMBER_RE, Kind.NUMBER), (WORD_RE, Kind.WORD)):
            m = regex.match(text, i)
            if m:
                yield i, m.end(), kind
                i = m.end()
                break
        else:
            ch = text[i]
            if _is_glyph(ch):
                end = _glyph_end(text, i)
                yield i, end, Kind.EMOTICON
            else:
                # run of one repeated punctuation character: "..." and "!!" stay apart
                end = i + 1
                while end < n and text[end] == ch:
                    end += 1
                yield i, end, Kind.PUNCT
            i = end


def tokenize(text: str) -> List[Token]:
    return [Token(text[a:b], kind) for a, b, kind in _scan(text)]


def url_spans(text: str):
    """``(start, end)`` of every URL the tokenizer would emit."""
    return [(a, b) for a, b, kind in _scan(text) if kind is Kind.URL]
