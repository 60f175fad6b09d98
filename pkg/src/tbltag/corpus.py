"""Tagged corpora: parsing, lexicons, baseline tagging, accuracy.

A corpus is a list of sentences, each a list of tokens carrying the gold
tag (``truth``) and the working tag (``current``).  Training mutates only
``current`` and the per-token ``dep`` link; ``truth`` and words are fixed
after parsing.
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass

# Reserved pseudo-tag returned for positions outside the sentence.  It may
# appear in rule contexts but never as a token tag, a rule's source/target,
# or a lexicon entry.
BOUNDARY = sys.intern("<B>")

# (sentence index, token index)
Site = tuple[int, int]

_ITEM_RE = re.compile(r"\S+")


class ParseError(ValueError):
    """Malformed corpus text.  Carries 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(slots=True)
class Token:
    word: str
    truth: str | None
    current: str | None = None
    dep: object | None = None  # most recent DependencyNode, None until changed


class Corpus:
    """Sentences of tokens.  Equality compares words and tags, not dep links."""

    __slots__ = ("sentences", "n_tokens")

    def __init__(self, sentences: list[list[Token]]):
        self.sentences = sentences
        self.n_tokens = sum(len(s) for s in sentences)

    def sites(self):
        """Yield every (sentence, token) site in corpus order."""
        for si, sent in enumerate(self.sentences):
            for ti in range(len(sent)):
                yield (si, ti)

    def token(self, site: Site) -> Token:
        si, ti = site
        if not (0 <= si < len(self.sentences)):
            raise IndexError(f"sentence index {si} out of range")
        sent = self.sentences[si]
        if not (0 <= ti < len(sent)):
            raise IndexError(f"token index {ti} out of range in sentence {si}")
        return sent[ti]

    def clone(self) -> "Corpus":
        """Fresh copy with current reset to truth and dep links cleared."""
        return Corpus(
            [[Token(t.word, t.truth, t.truth) for t in sent] for sent in self.sentences]
        )

    def __eq__(self, other):
        if not isinstance(other, Corpus):
            return NotImplemented
        return [
            [(t.word, t.truth, t.current) for t in s] for s in self.sentences
        ] == [[(t.word, t.truth, t.current) for t in s] for s in other.sentences]

    def __len__(self):
        return len(self.sentences)

    def __repr__(self):
        return f"Corpus({len(self.sentences)} sentences, {self.n_tokens} tokens)"


def parse_corpus(text: str, tagged: bool = True) -> Corpus:
    """Parse one-sentence-per-line text of whitespace-separated items.

    Tagged items are ``word/TAG`` where the tag is everything after the
    last slash, so words may contain slashes.  With ``tagged=False`` items
    are bare words and truth is left unset.  Blank lines are skipped.
    """
    sentences = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        tokens = []
        for m in _ITEM_RE.finditer(line):
            item = m.group()
            col = m.start() + 1
            if not tagged:
                word = sys.intern(item)
                tokens.append(Token(word, None, None))
                continue
            cut = item.rfind("/")
            if cut < 0:
                raise ParseError(f"item {item!r} has no '/TAG' part", lineno, col)
            word, tag = item[:cut], item[cut + 1 :]
            if not word:
                raise ParseError(f"item {item!r} has an empty word", lineno, col)
            if not tag:
                raise ParseError(f"item {item!r} has an empty tag", lineno, col)
            if tag == BOUNDARY:
                raise ParseError(
                    f"tag {BOUNDARY!r} is reserved for sentence boundaries", lineno, col
                )
            word = sys.intern(word)
            tag = sys.intern(tag)
            tokens.append(Token(word, tag, tag))
        if tokens:
            sentences.append(tokens)
    return Corpus(sentences)


def serialize_corpus(corpus: Corpus, which: str = "truth") -> str:
    """Render a corpus back to text, one sentence per line, single spaces.

    ``which`` selects the tag written: "truth" or "current".
    """
    if which not in ("truth", "current"):
        raise ValueError(f"which must be 'truth' or 'current', got {which!r}")
    lines = []
    for sent in corpus.sentences:
        parts = []
        for tok in sent:
            tag = tok.truth if which == "truth" else tok.current
            if tag is None:
                raise ValueError(f"token {tok.word!r} has no {which} tag to serialize")
            parts.append(f"{tok.word}/{tag}")
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n" if lines else ""


class Lexicon:
    """Word -> tag frequency table with a default for unknown words.

    ``most_frequent`` breaks count ties by the lexicographically smallest
    tag symbol so baseline tagging is deterministic.
    """

    def __init__(self, default_tag: str, counts: dict[str, dict[str, int]] | None = None):
        if not default_tag:
            raise ValueError("default_tag must be non-empty")
        if default_tag == BOUNDARY:
            raise ValueError(f"default_tag may not be the reserved {BOUNDARY!r}")
        self.default_tag = sys.intern(default_tag)
        self.counts: dict[str, dict[str, int]] = counts if counts is not None else {}
        self._best: dict[str, str] = {}

    def add(self, word: str, tag: str, n: int = 1) -> None:
        by_tag = self.counts.setdefault(word, {})
        by_tag[tag] = by_tag.get(tag, 0) + n
        self._best.pop(word, None)

    def most_frequent(self, word: str) -> str:
        best = self._best.get(word)
        if best is not None:
            return best
        by_tag = self.counts.get(word)
        if not by_tag:
            return self.default_tag
        best = min(by_tag, key=lambda t: (-by_tag[t], t))
        self._best[word] = best
        return best

    def __contains__(self, word: str) -> bool:
        return word in self.counts

    def tags(self) -> set[str]:
        """All tag symbols in the table plus the default."""
        out = {self.default_tag}
        for by_tag in self.counts.values():
            out.update(by_tag)
        return out


def build_lexicon(corpus: Corpus, default_tag: str) -> Lexicon:
    """Count truth tags per word over the whole corpus."""
    lex = Lexicon(default_tag)
    for sent in corpus.sentences:
        for tok in sent:
            if tok.truth is None:
                raise ValueError("cannot build a lexicon from an untagged corpus")
            lex.add(tok.word, tok.truth)
    return lex


def baseline_assign(corpus: Corpus, lexicon: Lexicon) -> int:
    """Set every token's current tag to its lexicon-most-frequent tag.

    Clears dep links.  Returns the number of tokens whose current tag
    disagrees with truth (0 for untagged corpora).  Idempotent.
    """
    errors = 0
    mf = lexicon.most_frequent
    for sent in corpus.sentences:
        for tok in sent:
            tok.current = mf(tok.word)
            tok.dep = None
            if tok.truth is not None and tok.current != tok.truth:
                errors += 1
    return errors


def tag_at(corpus: Corpus, site: Site, offset: int) -> str:
    """Current tag at site+offset, or BOUNDARY outside the sentence."""
    si, ti = site
    if not (0 <= si < len(corpus.sentences)):
        raise IndexError(f"sentence index {si} out of range")
    sent = corpus.sentences[si]
    if not (0 <= ti < len(sent)):
        raise IndexError(f"token index {ti} out of range in sentence {si}")
    j = ti + offset
    if 0 <= j < len(sent):
        return sent[j].current
    return BOUNDARY


def error_count(corpus: Corpus) -> int:
    """Tokens whose current tag disagrees with a present truth tag."""
    return sum(
        1
        for sent in corpus.sentences
        for tok in sent
        if tok.truth is not None and tok.current != tok.truth
    )


def accuracy(corpus: Corpus) -> float:
    """Fraction of tokens with current == truth; 1.0 for an empty corpus.

    Plain IEEE double division, so 2 correct of 3 compares equal to the
    Python expression ``2 / 3``.
    """
    if corpus.n_tokens == 0:
        return 1.0
    return (corpus.n_tokens - error_count(corpus)) / corpus.n_tokens
