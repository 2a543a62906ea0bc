"""Word neighbourhoods and weights from windowed co-occurrence in a corpus.

Positions inside a document are ``1..M`` with distance ``|x - y|``. For a
word ``v`` and window ``r``, the neighbourhood ``N_v[r]`` holds every word
occurring within ``r`` positions of an occurrence of ``v``, and the weight
``d[r](v, w)`` adds up ``|x - y|`` over all occurrence pairs ``x`` of ``v``
and ``y`` of ``w`` with ``|x - y| <= r``, over all documents.
"""

import bisect
import json
import math
import numbers
import os
import re
from collections import Counter
from dataclasses import dataclass

from .exceptions import DomainError, EmptyInputError
from .patch import WeightedRaySystem

_TOKEN = re.compile(r"[^\W_]+(?:'[^\W_]+)*", re.UNICODE)


def tokenize(text):
    """Case-folded runs of letters/digits; punctuation and whitespace separate tokens."""
    return _TOKEN.findall(text.casefold())


@dataclass(frozen=True)
class Corpus:
    """Documents as tuples of token strings."""

    documents: tuple

    def __post_init__(self):
        docs = tuple(tuple(doc) for doc in self.documents)
        if not docs:
            raise EmptyInputError("corpus has no documents")
        if any(len(doc) == 0 for doc in docs):
            raise EmptyInputError("documents must contain at least one token")
        object.__setattr__(self, "documents", docs)

    @classmethod
    def from_texts(cls, texts, tokenizer=tokenize):
        return cls(tuple(t for t in (tokenizer(text) for text in texts) if t))

    @classmethod
    def from_directory(cls, path, tokenizer=tokenize):
        """One UTF-8 text file per document, read in file-name order."""
        names = sorted(f for f in os.listdir(path) if os.path.isfile(os.path.join(path, f)))
        texts = []
        for name in names:
            with open(os.path.join(path, name), encoding="utf-8") as fh:
                texts.append(fh.read())
        return cls.from_texts(texts, tokenizer)

    @classmethod
    def from_jsonl(cls, source):
        """JSON lines ``{"tokens": [...]}``."""
        if hasattr(source, "read"):
            text = source.read()
        else:
            with open(source, encoding="utf-8") as fh:
                text = fh.read()
        docs = [json.loads(line)["tokens"] for line in text.splitlines() if line.strip()]
        return cls(tuple(d for d in docs if d))

    @property
    def total_length(self):
        return sum(len(d) for d in self.documents)


@dataclass(frozen=True)
class VocabMap:
    """Token-to-word map; tokens missing from ``token_to_word`` were dropped."""

    token_to_word: dict
    words: tuple

    def word_index(self):
        return {w: i for i, w in enumerate(self.words)}

    def to_json(self):
        return {"words": list(self.words), "token_to_word": dict(sorted(self.token_to_word.items()))}


def build_vocab(corpus, stop_threshold=1.0, rare_threshold=1, merge_rules=None):
    """Quotient tokens to a vocabulary.

    ``merge_rules`` (token -> token) is applied first. Words making up more
    than ``stop_threshold`` of all positions, or occurring fewer than
    ``rare_threshold`` times, are dropped.

    Raises
    ------
    EmptyInputError
        Nothing survives the thresholds.
    """
    if not 0.0 <= stop_threshold <= 1.0:
        raise DomainError("stop_threshold is a fraction in [0, 1]")
    if rare_threshold < 0:
        raise DomainError("rare_threshold must be non-negative")
    merge_rules = dict(merge_rules or {})
    counts = Counter(merge_rules.get(tok, tok) for doc in corpus.documents for tok in doc)
    total = sum(counts.values())
    keep = {w for w, c in counts.items() if c / total <= stop_threshold and c >= rare_threshold}
    if not keep:
        raise EmptyInputError("vocabulary is empty after applying thresholds")
    tokens = {tok for doc in corpus.documents for tok in doc}
    mapping = {tok: merge_rules.get(tok, tok) for tok in tokens if merge_rules.get(tok, tok) in keep}
    return VocabMap(mapping, tuple(sorted(keep)))


@dataclass(frozen=True)
class FibreIndex:
    """Sorted 1-based positions of every word in every document.

    Tokens dropped by the vocabulary are removed before positions are
    numbered, so the fibres of each document partition ``1..M_i``.
    """

    words: tuple
    lengths: tuple
    fibres: tuple  # per document: {word_id: tuple of positions}

    @classmethod
    def build(cls, corpus, vocab=None):
        if vocab is None:
            vocab = build_vocab(corpus)
        index = vocab.word_index()
        fibres, lengths = [], []
        for doc in corpus.documents:
            kept = [index[vocab.token_to_word[t]] for t in doc if t in vocab.token_to_word]
            if not kept:
                continue
            per = {}
            for pos, wid in enumerate(kept, start=1):
                per.setdefault(wid, []).append(pos)
            fibres.append({w: tuple(p) for w, p in per.items()})
            lengths.append(len(kept))
        if not fibres:
            raise EmptyInputError("no document keeps any vocabulary word")
        return cls(vocab.words, tuple(lengths), tuple(fibres))

    @property
    def n_words(self):
        return len(self.words)

    def word_id(self, word):
        if isinstance(word, numbers.Integral):
            if not 0 <= word < len(self.words):
                raise DomainError(f"unknown word id {word}")
            return word
        try:
            return self.words.index(word)
        except ValueError:
            raise DomainError(f"unknown word {word!r}") from None

    def to_json(self):
        return {
            "words": list(self.words),
            "documents": [
                {"length": m, "fibres": {self.words[w]: list(p) for w, p in sorted(f.items())}}
                for m, f in zip(self.lengths, self.fibres)
            ],
        }


def neighborhood_r(index, v, r):
    """Word ids within ``r`` positions of some occurrence of ``v`` (``v`` included)."""
    v = index.word_id(v)
    if r < 0:
        raise DomainError("window radius must be non-negative")
    out = {v}
    for per in index.fibres:
        spots = per.get(v)
        if not spots:
            continue
        for w, positions in per.items():
            if w in out:
                continue
            for x in spots:
                j = bisect.bisect_left(positions, x - r)
                if j < len(positions) and positions[j] <= x + r:
                    out.add(w)
                    break
    return frozenset(out)


def weight_r(index, v, w, r):
    """Sum of ``|x - y|`` over occurrences ``x`` of ``v``, ``y`` of ``w`` with ``|x - y| <= r``."""
    v, w = index.word_id(v), index.word_id(w)
    total = 0
    for per in index.fibres:
        xs, ys = per.get(v), per.get(w)
        if not xs or not ys:
            continue
        prefix = [0]
        for y in ys:
            prefix.append(prefix[-1] + y)
        for x in xs:
            lo = bisect.bisect_left(ys, x - r)
            mid = bisect.bisect_left(ys, x)
            hi = bisect.bisect_right(ys, x + r)
            below = x * (mid - lo) - (prefix[mid] - prefix[lo])
            above = (prefix[hi] - prefix[mid]) - x * (hi - mid)
            total += below + above
    return float(total)


_TRANSFORMS = {
    None: lambda v: v,
    "identity": lambda v: v,
    "exp": lambda v: math.exp(-v) or math.ulp(0.0),
    "inverse": lambda v: 1.0 / v,
}


def word_ray_system(index, r, transform=None):
    """Rays ``(v, w, weight)`` for ``w`` in ``N_v[r]`` other than ``v``.

    The weight is ``d[r](v, w)`` itself unless ``transform`` is ``"exp"``
    (``exp(-d)``) or ``"inverse"`` (``1/d``). Both are decreasing, so
    frequent close co-occurrence then means small distance.
    """
    if transform not in _TRANSFORMS:
        raise DomainError(f"unknown transform {transform!r}")
    if r < 0:
        raise DomainError("window radius must be non-negative")
    f = _TRANSFORMS[transform]
    sums = {}
    for per in index.fibres:
        at = {}
        for wid, positions in per.items():
            for p in positions:
                at[p] = wid
        for x, v in at.items():
            for y in range(x + 1, x + r + 1):
                w = at.get(y)
                if w is None or w == v:
                    continue
                sums[(v, w)] = sums.get((v, w), 0) + (y - x)
                sums[(w, v)] = sums.get((w, v), 0) + (y - x)
    rays = tuple((v, w, f(float(total))) for (v, w), total in sorted(sums.items()) if total > 0)
    return WeightedRaySystem(index.n_words, rays)


__all__ = [
    "Corpus",
    "FibreIndex",
    "VocabMap",
    "build_vocab",
    "neighborhood_r",
    "tokenize",
    "weight_r",
    "word_ray_system",
]
