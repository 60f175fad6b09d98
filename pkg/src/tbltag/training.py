"""Shared training machinery: configuration, selection, traces, model files.

Both trainers (the per-pass rescanning one and the incremental one) select
rules the same way, emit the same trace records, and produce the same
Model, so a given corpus, config, and seed yield identical results from
either engine.
"""

from __future__ import annotations

import random
import sys
from dataclasses import dataclass, field
from enum import Enum

from . import dependency
from .corpus import BOUNDARY, Corpus, Lexicon, Site
from .rules import (
    DEFAULT_TEMPLATES,
    Rule,
    RuleScore,
    Template,
    decode_rule,
    display_rule,
    parse_template_spec,
    render_template_spec,
)

MODEL_FORMAT = "tblmodel"
MODEL_VERSION = 1


class ModelFormatError(ValueError):
    """A model file does not follow the expected layout."""


class Strategy(Enum):
    """How the next rule is picked each pass."""

    GREEDY = "greedy"  # highest net score, ties to smallest canonical form
    RANDOM = "random"  # seeded uniform draw among net-positive rules


@dataclass(frozen=True, slots=True)
class TrainerConfig:
    templates: tuple[Template, ...] = DEFAULT_TEMPLATES
    threshold: int = 2
    strategy: Strategy = Strategy.GREEDY
    rng_seed: int = 0
    max_passes: int | None = None
    record_deps: bool = False
    audit: bool = False

    def __post_init__(self):
        if self.threshold < 1:
            raise ValueError(f"threshold must be >= 1, got {self.threshold}")
        if not self.templates:
            raise ValueError("at least one template is required")
        if self.max_passes is not None and self.max_passes < 0:
            raise ValueError(f"max_passes must be >= 0, got {self.max_passes}")

    @property
    def max_span(self) -> int:
        return max(t.span for t in self.templates)


@dataclass(frozen=True, slots=True)
class TraceRecord:
    """One selected rule with its score at selection time."""

    pass_no: int
    rule: Rule
    pos: int
    neg: int
    neut: int
    train_accuracy_after: float


@dataclass(slots=True)
class Model:
    """Baseline lexicon plus the learned rule sequence, in order."""

    lexicon: Lexicon
    rules: list[Rule]
    config: TrainerConfig = field(default_factory=TrainerConfig)

    @property
    def default_tag(self) -> str:
        return self.lexicon.default_tag

    @property
    def record_deps(self) -> bool:
        return self.config.record_deps

    def tagset(self) -> list[str]:
        """Sorted tags known to the model: lexicon, default, and rule tags."""
        tags = self.lexicon.tags()
        for rule in self.rules:
            tags.add(rule.frm)
            tags.add(rule.to)
            for _, t in rule.ctx:
                if t != BOUNDARY:
                    tags.add(t)
        return sorted(tags)


def select(scored, config: TrainerConfig, rng: random.Random):
    """Pick the next rule from (rule, score-like) pairs, or None to stop.

    Greedy: the highest net score wins, ties broken by the smallest
    canonical encoding; returns None below the threshold.  Random: a
    seeded uniform draw over rules with net score >= 1, ignoring the
    threshold; returns None when no rule is net-positive.
    """
    if config.strategy is Strategy.GREEDY:
        best_rule = None
        best_sc = None
        best_score = None
        for rule, sc in scored:
            s = sc.pos - sc.neg
            if (
                best_score is None
                or s > best_score
                or (s == best_score and rule.canonical < best_rule.canonical)
            ):
                best_rule, best_sc, best_score = rule, sc, s
        if best_rule is None or best_score < config.threshold:
            return None
        return best_rule, RuleScore(best_sc.pos, best_sc.neg, best_sc.neut)
    eligible = [(r, sc) for r, sc in scored if sc.pos - sc.neg >= 1]
    if not eligible:
        return None
    eligible.sort(key=lambda pair: pair[0].canonical)
    rule, sc = eligible[rng.randrange(len(eligible))]
    return rule, RuleScore(sc.pos, sc.neg, sc.neut)


def apply_at_sites(corpus: Corpus, rule: Rule, sites: list[Site], pass_no: int, record_deps: bool) -> None:
    """Rewrite the given sites, recording dependency nodes first."""
    if record_deps:
        dependency.record_pass(corpus, sites, rule, pass_no)
    to = rule.to
    sentences = corpus.sentences
    for si, ti in sites:
        sentences[si][ti].current = to


# --- trace and curve rendering ----------------------------------------------


def trace_tsv(records) -> str:
    """Tab-separated trace, one selected rule per line."""
    lines = ["pass\trule_canonical\trule_display\tpos\tneg\tneut\ttrain_acc"]
    for r in records:
        lines.append(
            f"{r.pass_no}\t{r.rule.canonical}\t{display_rule(r.rule)}"
            f"\t{r.pos}\t{r.neg}\t{r.neut}\t{r.train_accuracy_after!r}"
        )
    return "\n".join(lines) + "\n"


# --- model files -------------------------------------------------------------


def config_pairs(config: TrainerConfig) -> list[tuple[str, str]]:
    """Stable key/value view of a config, templates in spec grammar."""
    return [
        ("templates", render_template_spec(config.templates)),
        ("threshold", str(config.threshold)),
        ("strategy", config.strategy.value),
        ("seed", str(config.rng_seed)),
        ("max-passes", "" if config.max_passes is None else str(config.max_passes)),
        ("deps", "1" if config.record_deps else "0"),
    ]


def save_model(model: Model, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_model(model))


def format_model(model: Model) -> str:
    """Render a model to its versioned plain-text form.

    Layout: version line, training settings, default tag, tagset, lexicon
    counts (words sorted, tags sorted within a word), then the learned
    rules one canonical encoding per line in application order.  The
    engine that produced the model is deliberately not recorded; both
    engines must produce byte-identical files.
    """
    lines = [f"{MODEL_FORMAT} {MODEL_VERSION}"]
    for key, value in config_pairs(model.config):
        lines.append(f"{key} {value}")
    lines.append(f"default-tag {model.lexicon.default_tag}")
    tags = model.tagset()
    lines.append(f"tags {len(tags)} {' '.join(tags)}".rstrip())
    words = sorted(model.lexicon.counts)
    lines.append(f"lexicon {len(words)}")
    for word in words:
        by_tag = model.lexicon.counts[word]
        parts = [word]
        for tag in sorted(by_tag):
            parts.append(tag)
            parts.append(str(by_tag[tag]))
        lines.append(" ".join(parts))
    lines.append(f"rules {len(model.rules)}")
    for rule in model.rules:
        lines.append(rule.canonical)
    return "\n".join(lines) + "\n"


def load_model(path: str) -> Model:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


def _take(lines, what: str) -> str:
    if not lines:
        raise ModelFormatError(f"unexpected end of model file, wanted {what}")
    return lines.pop()


def _int(text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ModelFormatError(f"expected an integer {what}, got {text!r}") from None


def parse_model(text: str) -> Model:
    lines = text.splitlines()
    lines.reverse()  # pop() from the front
    version = _take(lines, "version line")
    parts = version.split()
    if len(parts) != 2 or parts[0] != MODEL_FORMAT:
        raise ModelFormatError(f"not a {MODEL_FORMAT} file: {version!r}")
    if parts[1] != str(MODEL_VERSION):
        raise ModelFormatError(f"unsupported {MODEL_FORMAT} version {parts[1]!r}")

    settings = {}
    for key in ("templates", "threshold", "strategy", "seed", "max-passes", "deps"):
        line = _take(lines, f"{key} line")
        name, _, value = line.partition(" ")
        if name != key:
            raise ModelFormatError(f"expected {key!r} line, got {line!r}")
        settings[key] = value
    try:
        config = TrainerConfig(
            templates=parse_template_spec(settings["templates"], window=sys.maxsize),
            threshold=int(settings["threshold"]),
            strategy=Strategy(settings["strategy"]),
            rng_seed=int(settings["seed"]),
            max_passes=int(settings["max-passes"]) if settings["max-passes"] else None,
            record_deps=settings["deps"] == "1",
        )
    except ValueError as exc:
        raise ModelFormatError(f"bad training settings: {exc}") from None

    line = _take(lines, "default-tag line")
    name, _, default_tag = line.partition(" ")
    if name != "default-tag" or not default_tag:
        raise ModelFormatError(f"expected 'default-tag TAG', got {line!r}")

    line = _take(lines, "tags line")
    parts = line.split()
    if not parts or parts[0] != "tags" or len(parts) < 2:
        raise ModelFormatError(f"expected 'tags N ...', got {line!r}")
    if len(parts) - 2 != _int(parts[1], "tag count"):
        raise ModelFormatError(f"tags line announces {parts[1]} tags, has {len(parts) - 2}")

    line = _take(lines, "lexicon line")
    parts = line.split()
    if len(parts) != 2 or parts[0] != "lexicon":
        raise ModelFormatError(f"expected 'lexicon N', got {line!r}")
    lexicon = Lexicon(default_tag)
    for _ in range(_int(parts[1], "lexicon size")):
        entry = _take(lines, "lexicon entry").split()
        if len(entry) < 3 or len(entry) % 2 == 0:
            raise ModelFormatError(f"malformed lexicon entry {' '.join(entry)!r}")
        word = entry[0]
        for i in range(1, len(entry), 2):
            try:
                lexicon.add(word, entry[i], int(entry[i + 1]))
            except ValueError:
                raise ModelFormatError(
                    f"bad count in lexicon entry for {word!r}"
                ) from None

    line = _take(lines, "rules line")
    parts = line.split()
    if len(parts) != 2 or parts[0] != "rules":
        raise ModelFormatError(f"expected 'rules N', got {line!r}")
    rules = []
    for _ in range(_int(parts[1], "rule count")):
        encoded = _take(lines, "rule line")
        try:
            rules.append(decode_rule(encoded))
        except ValueError as exc:
            raise ModelFormatError(str(exc)) from None
    if any(line.strip() for line in lines):
        raise ModelFormatError("trailing content after the rules section")
    return Model(lexicon, rules, config)
