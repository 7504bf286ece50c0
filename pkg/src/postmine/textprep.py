"""Noisy short-text normalization.

The stages, applied in order by ``preprocess``:

1. ``tokenize`` -- regex tokenizer that keeps emoticons, censored words,
   acronyms, numbers/dates and apostrophe words intact as single tokens,
   and substitutes the designated tags ``<url>``, ``<email>`` and
   ``<user>`` for links, addresses and mentions.  Everything is
   lowercased.  Hashtags survive as single word tokens with their ``#``.
2. ``correct_spelling`` -- dictionary abbreviation expansion plus
   elongation squeezing ("reallyyy" -> "really"): a letter run of three
   or more repeats is shortened to two and then to one copy until the
   candidate is a known word.
3. ``segment`` -- Viterbi word segmentation of hashtag bodies under a
   unigram/bigram language model with stupid-backoff-style weighting.

All operations are pure given an immutable dictionary and language
model, so corpus-level preprocessing can fan out per document.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Mapping, Sequence, TextIO

from .errors import DataError

TAG_URL = "<url>"
TAG_EMAIL = "<email>"
TAG_USER = "<user>"
DESIGNATED_TAGS = (TAG_URL, TAG_EMAIL, TAG_USER)

# Weight applied when a bigram is absent and we back off to the smoothed
# unigram probability.
BACKOFF_WEIGHT = 0.4


class TokenKind(Enum):
    WORD = "word"
    EMOTICON = "emoticon"
    CENSORED = "censored"
    TAG = "tag"
    HASHTAG_SEGMENTED = "hashtag_segmented"
    PUNCT = "punct"


@dataclass(frozen=True)
class Token:
    surface: str
    kind: TokenKind

    def __post_init__(self) -> None:
        if not self.surface:
            raise ValueError("empty token surface")
        if self.kind is TokenKind.TAG and self.surface not in DESIGNATED_TAGS:
            raise ValueError(f"kind TAG reserved for designated tags, got {self.surface!r}")


def _data_lines(name: str) -> list[str]:
    text = resources.files("postmine.data").joinpath(name).read_text("utf-8")
    return [line.strip() for line in text.splitlines()
            if line.strip() and not line.startswith("#")]


def bundled_emoticons() -> tuple[str, ...]:
    return tuple(_data_lines("emoticons.txt"))


def bundled_stopwords() -> frozenset[str]:
    return frozenset(_data_lines("stopwords.txt")) | frozenset(DESIGNATED_TAGS)


def bundled_censored() -> frozenset[str]:
    return frozenset(_data_lines("censored.txt"))


# Unicode emoji blocks treated as single-token emoticons.
_EMOJI_CLASS = (
    "[\U0001F300-\U0001F5FF\U0001F600-\U0001F64F\U0001F680-\U0001F6FF"
    "\U0001F900-\U0001F9FF\U0001FA70-\U0001FAFF☀-➿⬀-⯿]"
)

_MASK_CHARS = r"\*\$%@"


def _build_token_re() -> re.Pattern[str]:
    tags = "|".join(re.escape(t) for t in DESIGNATED_TAGS)
    emoticons = "|".join(
        re.escape(e) for e in sorted(bundled_emoticons(), key=len, reverse=True)
    )
    parts = [
        ("tag", tags),
        ("url", r"https?://[^\s<>]+|www\.[^\s<>]+"),
        ("email", r"[a-z0-9][\w.+\-]*@[\w\-]+\.[\w.\-]*[a-z0-9]"),
        ("mention", r"@\w+"),
        ("hashtag", r"\#\w+"),
        ("emoticon", f"{emoticons}|{_EMOJI_CLASS}"),
        ("censored", rf"[a-z]+[{_MASK_CHARS}]+[a-z0-9]*|[{_MASK_CHARS}]+[a-z]+"),
        ("acronym", r"(?:[a-z]\.){2,}"),
        ("number", r"[+\-]?\$?\d+(?:[.,:/\-]\d+)*%?"),
        ("word", r"\w+(?:['’\-]\w+)*"),
        ("ellipsis", r"\.{2,}|…"),
        ("punct", r"\S"),
    ]
    return re.compile("|".join(f"(?P<{n}>{p})" for n, p in parts), re.IGNORECASE)


_TOKEN_RE = _build_token_re()

_GROUP_KINDS = {
    "hashtag": TokenKind.WORD,
    "emoticon": TokenKind.EMOTICON,
    "censored": TokenKind.CENSORED,
    "acronym": TokenKind.WORD,
    "number": TokenKind.WORD,
    "word": TokenKind.WORD,
    "ellipsis": TokenKind.PUNCT,
    "punct": TokenKind.PUNCT,
}

_GROUP_TAGS = {"url": TAG_URL, "email": TAG_EMAIL, "mention": TAG_USER}


def tokenize(text: str) -> list[Token]:
    """Split raw text into lowercased tokens.

    Total and deterministic; empty input gives an empty list.  The
    concatenated surfaces of non-tag, non-emoticon tokens preserve every
    alphanumeric character of the corresponding input portions.
    """
    tokens: list[Token] = []
    for match in _TOKEN_RE.finditer(text):
        group = match.lastgroup
        surface = match.group()
        if group == "tag":
            tokens.append(Token(surface.lower(), TokenKind.TAG))
        elif group in _GROUP_TAGS:
            tokens.append(Token(_GROUP_TAGS[group], TokenKind.TAG))
        else:
            tokens.append(Token(surface.lower(), _GROUP_KINDS[group]))
    return tokens


@dataclass(frozen=True)
class CorrectionDictionary:
    """Abbreviation expansions, censored-word surfaces and known words.

    Every expansion must consist of known words, and no abbreviation key
    may itself be a known word; together these keep ``preprocess``
    idempotent on its own output.
    """

    abbreviations: Mapping[str, str]
    censored: frozenset[str] = frozenset()
    valid_words: frozenset[str] = frozenset()


def load_correction_dictionary(
    abbreviations: str | Path | TextIO,
    wordlist: str | Path | TextIO,
    censored: str | Path | TextIO | None = None,
) -> CorrectionDictionary:
    """Load the correction dictionary from its file parts.

    ``abbreviations`` is tab-delimited (abbreviation TAB expansion),
    ``wordlist`` one valid word per line, ``censored`` (optional, else
    the bundled list) one surface per line.
    """
    words = frozenset(w.strip().lower() for w in _read_lines(wordlist) if w.strip())
    abbrev: dict[str, str] = {}
    for lineno, line in enumerate(_read_lines(abbreviations), start=1):
        if not line.strip():
            continue
        parts = line.rstrip("\n").split("\t")
        if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
            raise DataError(f"abbreviations line {lineno}: expected 'key<TAB>expansion'")
        key = parts[0].strip().lower()
        expansion = " ".join(parts[1].split()).lower()
        if key in abbrev:
            raise DataError(f"abbreviations line {lineno}: duplicate key {key!r}")
        if key in words:
            raise DataError(f"abbreviations line {lineno}: key {key!r} is itself a valid word")
        bad = [w for w in expansion.split() if w not in words]
        if bad:
            raise DataError(
                f"abbreviations line {lineno}: expansion word(s) not in wordlist: "
                + ", ".join(bad)
            )
        abbrev[key] = expansion
    censored_set = (
        frozenset(w.strip().lower() for w in _read_lines(censored) if w.strip())
        if censored is not None else bundled_censored()
    )
    return CorrectionDictionary(abbrev, censored_set, words)


def _read_lines(source: str | Path | TextIO) -> list[str]:
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as handle:
            return handle.read().splitlines()
    return source.read().splitlines()


_ELONGATION_RE = re.compile(r"([^\W\d_])\1{2,}")


def _squeeze_elongation(surface: str, valid_words: frozenset[str]) -> str | None:
    runs = list(_ELONGATION_RE.finditer(surface))
    if not runs:
        return None
    # Try two repeats before one for every run, leftmost run varying
    # slowest, and accept the first known word.
    for repeats in itertools.product((2, 1), repeat=len(runs)):
        out = []
        cursor = 0
        for run, count in zip(runs, repeats):
            out.append(surface[cursor:run.start()])
            out.append(run.group(1) * count)
            cursor = run.end()
        out.append(surface[cursor:])
        candidate = "".join(out)
        if candidate in valid_words:
            return candidate
    return None


def correct_spelling(token: Token, dictionary: CorrectionDictionary) -> list[Token]:
    """Expand abbreviations and squeeze elongations on one word token.

    Unknown tokens pass through unchanged; non-word tokens are returned
    as-is.  Abbreviation expansion may produce several tokens.
    """
    if token.kind is not TokenKind.WORD:
        return [token]
    surface = token.surface
    expansion = dictionary.abbreviations.get(surface)
    if expansion is not None:
        return [Token(w, TokenKind.WORD) for w in expansion.split()]
    if surface in dictionary.valid_words:
        return [token]
    squeezed = _squeeze_elongation(surface, dictionary.valid_words)
    if squeezed is not None:
        return [Token(squeezed, TokenKind.WORD)]
    return [token]


@dataclass(frozen=True)
class LanguageModel:
    """Unigram/bigram counts backing the hashtag segmenter."""

    unigram_counts: Mapping[str, int]
    bigram_counts: Mapping[tuple[str, str], int]
    total_unigrams: int

    @classmethod
    def from_counts(
        cls,
        unigrams: Mapping[str, int],
        bigrams: Mapping[tuple[str, str], int] | None = None,
    ) -> "LanguageModel":
        bigrams = dict(bigrams or {})
        for word, count in unigrams.items():
            if count <= 0:
                raise DataError(f"nonpositive unigram count for {word!r}")
        for (w1, w2), count in bigrams.items():
            if count <= 0:
                raise DataError(f"nonpositive bigram count for {(w1, w2)!r}")
            if w1 not in unigrams or w2 not in unigrams:
                raise DataError(f"bigram ({w1!r}, {w2!r}) has a word missing from unigrams")
        return cls(dict(unigrams), bigrams, sum(unigrams.values()))


def load_language_model(source: str | Path | TextIO) -> LanguageModel:
    """Read the tab-delimited model file with UNIGRAM and BIGRAM sections."""
    lines = _read_lines(source)
    unigrams: dict[str, int] = {}
    bigrams: dict[tuple[str, str], int] = {}
    section: str | None = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line.strip():
            continue
        if line.strip() in ("UNIGRAM", "BIGRAM"):
            section = line.strip()
            continue
        parts = line.split("\t")
        try:
            if section == "UNIGRAM":
                if len(parts) != 2:
                    raise ValueError("expected 'word<TAB>count'")
                unigrams[parts[0].lower()] = int(parts[1])
            elif section == "BIGRAM":
                if len(parts) != 3:
                    raise ValueError("expected 'word1<TAB>word2<TAB>count'")
                bigrams[(parts[0].lower(), parts[1].lower())] = int(parts[2])
            else:
                raise ValueError("line before any UNIGRAM/BIGRAM section header")
        except ValueError as exc:
            raise DataError(f"language model line {lineno}: {exc}") from None
    if not unigrams:
        raise DataError("language model has no unigrams")
    return LanguageModel.from_counts(unigrams, bigrams)


def transition_score(lm: LanguageModel, prev: str | None, word: str) -> float:
    """Log score of ``word`` following ``prev`` (None at the start).

    Bigram relative frequency when the pair is known; otherwise backoff
    to the add-one-smoothed unigram probability discounted by 0.4;
    otherwise a length-scaled out-of-vocabulary penalty
    log(eps) - len(word) * log(10) with eps = 1 / total unigram count.
    """
    if prev is not None:
        pair_count = lm.bigram_counts.get((prev, word))
        if pair_count:
            return math.log(pair_count / lm.unigram_counts[prev])
    count = lm.unigram_counts.get(word)
    if count is not None:
        smoothed = (count + 1) / (lm.total_unigrams + len(lm.unigram_counts))
        return math.log(BACKOFF_WEIGHT * smoothed)
    eps = 1.0 / lm.total_unigrams
    return math.log(eps) - len(word) * math.log(10.0)


def segment(body: str, lm: LanguageModel) -> list[str]:
    """Viterbi split of an unspaced hashtag body into words.

    Maximizes the left-to-right sum of ``transition_score`` over all
    2^(len-1) segmentations; exact score ties go to the
    lexicographically smallest word sequence.  The output concatenates
    back to the input body.
    """
    if not body:
        return []
    n = len(body)
    # best[(start, end)]: highest-scoring segmentation of body[:end]
    # whose last word is body[start:end], as (score, words).
    best: dict[tuple[int, int], tuple[float, tuple[str, ...]]] = {}
    for end in range(1, n + 1):
        for start in range(end):
            word = body[start:end]
            if start == 0:
                entry = (transition_score(lm, None, word), (word,))
            else:
                entry = None
                for prev_start in range(start):
                    prev_score, prev_words = best[(prev_start, start)]
                    score = prev_score + transition_score(lm, body[prev_start:start], word)
                    if entry is None or score > entry[0] or (
                        score == entry[0] and prev_words + (word,) < entry[1]
                    ):
                        entry = (score, prev_words + (word,))
                assert entry is not None
            best[(start, end)] = entry
    winner = None
    for start in range(n):
        score, words = best[(start, n)]
        if winner is None or score > winner[0] or (score == winner[0] and words < winner[1]):
            winner = (score, words)
    assert winner is not None
    return list(winner[1])


_HASHTAG_BODY_RE = re.compile(r"[^0-9a-z]")


def preprocess(
    text: str, dictionary: CorrectionDictionary, lm: LanguageModel
) -> list[Token]:
    """Tokenize, correct and hashtag-segment one post's text."""
    out: list[Token] = []
    for token in tokenize(text):
        if token.kind is TokenKind.WORD and token.surface.startswith("#"):
            body = _HASHTAG_BODY_RE.sub("", token.surface[1:])
            out.extend(
                Token(word, TokenKind.HASHTAG_SEGMENTED)
                for word in segment(body, lm)
            )
        elif token.kind is TokenKind.WORD:
            if token.surface in dictionary.censored:
                out.append(Token(token.surface, TokenKind.CENSORED))
            else:
                out.extend(correct_spelling(token, dictionary))
        else:
            out.append(token)
    return out


def render(tokens: Sequence[Token]) -> str:
    """Space-join token surfaces (the inverse-ish of tokenize, for
    idempotence checks and artifact dumps)."""
    return " ".join(t.surface for t in tokens)
