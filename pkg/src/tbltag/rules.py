"""Contextual rewrite rules and their templates.

A rule rewrites a token's current tag ``frm -> to`` when the current tags
at fixed relative offsets match the rule's context.  Rules are generated
by instantiating templates (sets of nonzero offsets) at mistagged sites.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .corpus import BOUNDARY, Corpus, Site

# Empty slot marker in the aligned five-slot rendering.
_SLOT_EMPTY = "—"

DEFAULT_WINDOW = 5


class DecodeError(ValueError):
    """A rule string does not parse back to a valid rule."""


@dataclass(frozen=True, slots=True)
class Template:
    """Distinct nonzero offsets a rule's context constrains, ascending."""

    positions: tuple[int, ...]

    def __init__(self, positions, window: int = DEFAULT_WINDOW):
        pos = tuple(sorted(positions))
        if not pos:
            raise ValueError("template needs at least one position")
        if 0 in pos:
            raise ValueError("offset 0 is the rewrite site itself, not context")
        if len(set(pos)) != len(pos):
            raise ValueError(f"duplicate positions in {pos}")
        bad = [p for p in pos if abs(p) > window]
        if bad:
            raise ValueError(f"positions {bad} outside window +/-{window}")
        object.__setattr__(self, "positions", pos)

    @property
    def span(self) -> int:
        return max(abs(p) for p in self.positions)

    def __repr__(self):
        return f"Template({self.positions})"


DEFAULT_TEMPLATE_SPEC = "-1; -2; -2,-1; +1; +2; +1,+2; -1,+1"


def parse_template_spec(spec: str, window: int = DEFAULT_WINDOW) -> tuple[Template, ...]:
    """Parse ``-1; -2,-1; +1`` style text: groups split on ';', offsets on ','."""
    templates = []
    for group in spec.split(";"):
        group = group.strip()
        if not group:
            raise ValueError(f"empty template group in {spec!r}")
        try:
            positions = tuple(int(p.strip()) for p in group.split(","))
        except ValueError:
            raise ValueError(f"non-integer offset in template group {group!r}") from None
        templates.append(Template(positions, window=window))
    if not templates:
        raise ValueError("template spec is empty")
    return tuple(templates)


def render_template_spec(templates) -> str:
    return "; ".join(
        ",".join(f"{p:+d}" if p > 0 else str(p) for p in t.positions) for t in templates
    )


DEFAULT_TEMPLATES = parse_template_spec(DEFAULT_TEMPLATE_SPEC)


class Rule:
    """Rewrite ``frm -> to`` guarded by (offset, tag) context pairs.

    Value semantics: two rules with the same source, target, and context
    compare and hash equal regardless of how they were built.
    """

    __slots__ = ("frm", "to", "ctx", "_hash", "_canon")

    def __init__(self, frm: str, to: str, ctx):
        ctx = tuple(sorted(ctx))
        if frm == to:
            raise ValueError(f"rule must change the tag, got {frm!r} -> {to!r}")
        if frm == BOUNDARY or to == BOUNDARY:
            raise ValueError(f"{BOUNDARY!r} cannot be rewritten or assigned")
        if not frm or not to:
            raise ValueError("rule tags must be non-empty")
        if not ctx:
            raise ValueError("rule context must be non-empty")
        offsets = [o for o, _ in ctx]
        if 0 in offsets:
            raise ValueError("context offset 0 is invalid")
        if len(set(offsets)) != len(offsets):
            raise ValueError(f"duplicate context offsets in {ctx}")
        for _, tag in ctx:
            if not tag:
                raise ValueError("context tags must be non-empty")
        self.frm = frm
        self.to = to
        self.ctx = ctx
        self._hash = hash((frm, to, ctx))
        self._canon = None

    @property
    def positions(self) -> tuple[int, ...]:
        return tuple(o for o, _ in self.ctx)

    @property
    def template(self) -> Template:
        return Template(self.positions, window=self.span)

    @property
    def span(self) -> int:
        return max(abs(o) for o, _ in self.ctx)

    @property
    def canonical(self) -> str:
        c = self._canon
        if c is None:
            c = encode_rule(self)
            self._canon = c
        return c

    def __eq__(self, other):
        if not isinstance(other, Rule):
            return NotImplemented
        return self.frm == other.frm and self.to == other.to and self.ctx == other.ctx

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Rule({self.canonical!r})"


class Effect(Enum):
    """What applying a rule at one site would do to that site."""

    POSITIVE = "positive"  # matched, fixes the tag
    NEGATIVE = "negative"  # matched, breaks a correct tag
    NEUTRAL = "neutral"  # matched, wrong before and wrong after
    NO_MATCH = "no_match"


@dataclass(frozen=True, slots=True)
class RuleScore:
    """Counts of match effects over a corpus; net score is pos - neg."""

    pos: int = 0
    neg: int = 0
    neut: int = 0

    @property
    def score(self) -> int:
        return self.pos - self.neg


def instantiate(template: Template, corpus: Corpus, site: Site) -> Rule | None:
    """Rule fixing the error at site, or None if the site is correct.

    The rule's source is the site's current tag, its target the truth tag,
    and its context the current tags observed at the template's offsets.
    """
    si, ti = site
    sent = corpus.sentences[si]
    tok = sent[ti]
    if tok.truth is None or tok.current == tok.truth:
        return None
    n = len(sent)
    ctx = tuple(
        (off, sent[ti + off].current if 0 <= ti + off < n else BOUNDARY)
        for off in template.positions
    )
    return Rule(tok.current, tok.truth, ctx)


def matches(rule: Rule, corpus: Corpus, site: Site) -> bool:
    """True when the site's current tag and context satisfy the rule."""
    si, ti = site
    sent = corpus.sentences[si]
    if sent[ti].current != rule.frm:
        return False
    n = len(sent)
    for off, tag in rule.ctx:
        j = ti + off
        got = sent[j].current if 0 <= j < n else BOUNDARY
        if got != tag:
            return False
    return True


def classify_effect(rule: Rule, corpus: Corpus, site: Site) -> Effect:
    if not matches(rule, corpus, site):
        return Effect.NO_MATCH
    truth = corpus.sentences[site[0]][site[1]].truth
    if truth == rule.to:
        return Effect.POSITIVE
    if truth == rule.frm:
        return Effect.NEGATIVE
    return Effect.NEUTRAL


def score_rule(rule: Rule, corpus: Corpus) -> RuleScore:
    """Tally the rule's effects over every site of the corpus."""
    pos = neg = neut = 0
    frm, to, ctx = rule.frm, rule.to, rule.ctx
    for sent in corpus.sentences:
        n = len(sent)
        for ti in range(n):
            if sent[ti].current != frm:
                continue
            ok = True
            for off, tag in ctx:
                j = ti + off
                got = sent[j].current if 0 <= j < n else BOUNDARY
                if got != tag:
                    ok = False
                    break
            if not ok:
                continue
            truth = sent[ti].truth
            if truth == to:
                pos += 1
            elif truth == frm:
                neg += 1
            else:
                neut += 1
    return RuleScore(pos, neg, neut)


def find_sites(rule: Rule, corpus: Corpus) -> list[Site]:
    """All sites the rule matches, in corpus order, against current tags."""
    out = []
    frm, ctx = rule.frm, rule.ctx
    for si, sent in enumerate(corpus.sentences):
        n = len(sent)
        for ti in range(n):
            if sent[ti].current != frm:
                continue
            ok = True
            for off, tag in ctx:
                j = ti + off
                got = sent[j].current if 0 <= j < n else BOUNDARY
                if got != tag:
                    ok = False
                    break
            if ok:
                out.append((si, ti))
    return out


def apply_rule(rule: Rule, corpus: Corpus) -> list[Site]:
    """Rewrite every matching site and return the sites changed.

    The match set is computed against the state before any rewriting, so
    overlapping matches all fire even when one changes another's context.
    """
    sites = find_sites(rule, corpus)
    to = rule.to
    sentences = corpus.sentences
    for si, ti in sites:
        sentences[si][ti].current = to
    return sites


# --- text encodings ---------------------------------------------------------

# Context items are "offset:TAG" joined by commas.  Tags never contain
# whitespace (corpus format guarantees it) but may contain ':' or ',', so
# items are split at comma-then-integer-then-colon boundaries only.
_CTX_ITEM_RE = re.compile(r"(-?\d+):(.*?)(?=,-?\d+:|$)")


def encode_rule(rule: Rule) -> str:
    """Canonical one-line form ``frm>to @ off:TAG,off:TAG`` offsets ascending."""
    ctx = ",".join(f"{off}:{tag}" for off, tag in rule.ctx)
    return f"{rule.frm}>{rule.to} @ {ctx}"


def decode_rule(text: str) -> Rule:
    """Inverse of encode_rule; raises DecodeError on malformed input."""
    head, sep, ctx_text = text.partition(" @ ")
    if not sep:
        raise DecodeError(f"missing ' @ ' separator in {text!r}")
    frm, sep, to = head.partition(">")
    if not sep:
        raise DecodeError(f"missing '>' in rule head {head!r}")
    items = []
    pos = 0
    for m in _CTX_ITEM_RE.finditer(ctx_text):
        if m.start() != pos:
            raise DecodeError(f"malformed context {ctx_text!r} near offset {pos}")
        items.append((int(m.group(1)), m.group(2)))
        pos = m.end()
        if pos < len(ctx_text) and ctx_text[pos] == ",":
            pos += 1
    if pos != len(ctx_text) or not items:
        raise DecodeError(f"malformed context {ctx_text!r}")
    try:
        return Rule(frm, to, items)
    except ValueError as exc:
        raise DecodeError(f"invalid rule {text!r}: {exc}") from None


def render_slots(rule: Rule) -> str:
    """Aligned five-slot view for short-span rules: -2 -1 frm/to +1 +2."""
    if rule.span > 2:
        raise ValueError(f"span {rule.span} does not fit the five-slot layout")
    ctx = dict(rule.ctx)
    slots = [
        ctx.get(-2, _SLOT_EMPTY),
        ctx.get(-1, _SLOT_EMPTY),
        f"{rule.frm}/{rule.to}",
        ctx.get(1, _SLOT_EMPTY),
        ctx.get(2, _SLOT_EMPTY),
    ]
    return " ".join(slots)


def display_rule(rule: Rule) -> str:
    """Five-slot view when it fits, canonical form otherwise."""
    return render_slots(rule) if rule.span <= 2 else rule.canonical
