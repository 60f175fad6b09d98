"""Applying trained models and measuring accuracy curves."""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Corpus, accuracy, baseline_assign
from .rules import apply_rule
from .training import Model


def tag(model: Model, corpus: Corpus) -> Corpus:
    """Baseline-tag the corpus, then apply the model's rules in order.

    Mutates and returns the given corpus; current tags are overwritten,
    truth tags (when present) are untouched.  Replaying a model over its
    own training corpus reproduces the trainer's final tags exactly.
    """
    baseline_assign(corpus, model.lexicon)
    for rule in model.rules:
        apply_rule(rule, corpus)
    return corpus


@dataclass(slots=True)
class Curve:
    """Accuracy after each pass; pass 0 is the baseline."""

    points: list[tuple[int, float, float | None]]

    def final(self) -> tuple[int, float, float | None]:
        return self.points[-1]

    def to_tsv(self) -> str:
        with_test = any(p[2] is not None for p in self.points)
        header = "pass\ttrain_acc\ttest_acc" if with_test else "pass\ttrain_acc"
        lines = [header]
        for pass_no, train_acc, test_acc in self.points:
            row = f"{pass_no}\t{train_acc!r}"
            if with_test:
                row += f"\t{test_acc!r}"
            lines.append(row)
        return "\n".join(lines) + "\n"


def _masked_accuracy(tokens) -> float:
    if not tokens:
        return 1.0
    return sum(1 for t in tokens if t.current == t.truth) / len(tokens)


def evaluate_curve(
    model: Model,
    train_corpus: Corpus,
    test_corpus: Corpus | None = None,
    errored_only: bool = False,
) -> Curve:
    """Accuracy after every rule in one sweep over each corpus.

    The rules are applied once in sequence, measuring after each, rather
    than replaying the whole prefix per point.  Mutates the corpora it is
    given.  With ``errored_only`` accuracy is measured over only the
    tokens the baseline got wrong, isolating how much of the originally
    wrong material the rules repair.
    """
    corpora = [train_corpus] + ([test_corpus] if test_corpus is not None else [])
    masks: list = []
    for c in corpora:
        baseline_assign(c, model.lexicon)
        if errored_only:
            masks.append(
                [t for sent in c.sentences for t in sent if t.truth is not None and t.current != t.truth]
            )

    def measure(i: int) -> float:
        return _masked_accuracy(masks[i]) if errored_only else accuracy(corpora[i])

    def point(pass_no: int):
        train_acc = measure(0)
        test_acc = measure(1) if test_corpus is not None else None
        return (pass_no, train_acc, test_acc)

    points = [point(0)]
    for pass_no, rule in enumerate(model.rules, start=1):
        for c in corpora:
            apply_rule(rule, c)
        points.append(point(pass_no))
    return Curve(points)
