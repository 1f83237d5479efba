"""Shared text helpers: question normalization and lexical tokens.

The whole retrieval stack (ranking, extraction confidence, entry matching,
cache keys) works on the same token view of text, so the rules live in one
place: lowercase, possessives stripped, light plural folding, stopwords
dropped.
"""

from __future__ import annotations

import re

_WORD_RE = re.compile(r"[a-z0-9][a-z0-9@.\-']*")

# Function words that carry no lexical signal for matching syllabus questions.
STOPWORDS = frozenset(
    """
    a an and any are as at be been by can could did do does for from had has
    have how i if in into is it its may might must my no not of on or our s
    shall should so that the their them there these they this those to upon
    us was we were what when where which who whom whose why will with would
    you your
    """.split()
)


def _fold(token: str) -> str:
    """Strip possessives and fold trivial plurals so 'exams' matches 'exam'."""
    token = token.strip("'.-")
    if token.endswith("'s"):
        token = token[:-2]
    elif token.endswith("s'"):
        token = token[:-1]
    if len(token) > 3:
        if token.endswith("ies"):
            token = token[:-3] + "y"
        elif token.endswith("s") and not token.endswith("ss") and not token.endswith("us"):
            token = token[:-1]
    return token


def tokenize(text: str) -> list[str]:
    """All folded tokens of *text*, in order, stopwords included."""
    return [_fold(m.group(0)) for m in _WORD_RE.finditer(text.lower())]


def content_tokens(text: str) -> set[str]:
    """The set of folded non-stopword tokens of *text*.

    Stopwords are filtered before folding; otherwise words like "this"
    would fold to "thi" and slip past the list.
    """
    out: set[str] = set()
    for match in _WORD_RE.finditer(text.lower()):
        raw = match.group(0)
        if raw in STOPWORDS:
            continue
        folded = _fold(raw)
        if folded and folded not in STOPWORDS:
            out.add(folded)
    return out


def normalize_question(text: str) -> str:
    """Canonical form used for cache keys and exact question lookup.

    Lowercase, punctuation stripped, whitespace collapsed.
    """
    lowered = text.lower()
    stripped = re.sub(r"[^a-z0-9\s]", "", lowered)
    return re.sub(r"\s+", " ", stripped).strip()


def overlap_score(query: str, document: str) -> float:
    """Query-normalized token overlap in [0, 1].

    Adding a query term that the document contains can never lower the
    document's score under this definition.
    """
    q = content_tokens(query)
    if not q:
        return 0.0
    d = content_tokens(document)
    return len(q & d) / len(q)


def jaccard(a: str, b: str) -> float:
    """Jaccard similarity of the content-token sets of two strings."""
    ta, tb = content_tokens(a), content_tokens(b)
    if not ta or not tb:
        return 0.0
    return len(ta & tb) / len(ta | tb)
