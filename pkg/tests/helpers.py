"""Shared builders for the test suite."""

from tbltag.corpus import Corpus, Lexicon, baseline_assign, parse_corpus


def corpus_of(text: str) -> Corpus:
    return parse_corpus(text)


def lex_of(mapping: dict[str, str], default: str) -> Lexicon:
    """Lexicon with one observation per (word, tag) pair."""
    lex = Lexicon(default)
    for word, tag in mapping.items():
        lex.add(word, tag)
    return lex


def baselined(text: str, mapping: dict[str, str], default: str) -> Corpus:
    corpus = parse_corpus(text)
    baseline_assign(corpus, lex_of(mapping, default))
    return corpus


# The two-rule toy: baseline tags both "can" MD, one context rule fixes both.
TOY_TEXT = "the/DT can/NN holds/VBZ the/DT can/NN ./.\n"
TOY_LEX = {"the": "DT", "can": "MD", "holds": "VBZ", ".": "."}
