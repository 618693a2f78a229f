"""Travel-term search: whole-token, case-insensitive lookup of mode terms."""

from __future__ import annotations

from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

from ..textprep.tokenizer import Kind, tokenize

TRAVEL_TERMS: Dict[str, Dict[str, List[str]]] = {
    "pt": {
        "bike": ["bicicleta", "moto"],
        "bus": ["onibus", "ônibus"],
        "car": ["carro"],
        "taxi": ["taxi", "táxi"],
        "train": ["metro", "metrô", "trem"],
        "walk": ["caminhar"],
    },
    "en": {
        "bike": ["bicycle", "bike"],
        "bus": ["bus"],
        "car": ["car"],
        "taxi": ["taxi", "cab"],
        "train": ["metro", "train", "subway"],
        "walk": ["walk"],
    },
}


def term_index(table: Mapping[str, Sequence[str]]) -> Dict[str, List[str]]:
    """term (casefolded) -> sorted list of modes it belongs to."""
    index: Dict[str, List[str]] = {}
    for mode, terms in table.items():
        for t in terms:
            index.setdefault(t.casefold(), [])
            if mode not in index[t.casefold()]:
                index[t.casefold()].append(mode)
    return {k: sorted(v) for k, v in index.items()}


def match_modes(text: str, index: Mapping[str, Sequence[str]]) -> List[str]:
    """Modes whose terms appear as whole word tokens in ``text``.

    Substrings never match ("carros" is not "carro"); hashtags and mentions
    are not words either.
    """
    found = set()
    for tok in tokenize(text):
        if tok.kind is Kind.WORD:
            found.update(index.get(tok.surface.casefold(), ()))
    return sorted(found)


def travel_term_search(items: Iterable[Tuple[str, str]],
                       table: Mapping[str, Sequence[str]]) -> Dict[str, List[str]]:
    """``{id: modes}`` for every ``(id, text)`` with at least one match, input order kept."""
    index = term_index(table)
    out = {}
    for rid, text in items:
        modes = match_modes(text, index)
        if modes:
            out[rid] = modes
    return out
