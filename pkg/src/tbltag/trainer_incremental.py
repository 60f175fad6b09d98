"""Incremental trainer: keep every rule's score and match sites live.

Instead of rescanning the corpus every pass, this trainer indexes all
rules that ever had a positive site, linked bidirectionally to the sites
they match.  Applying a rule only disturbs matches within the largest
template span of a changed site, so links and scores are repaired by
re-deriving just those neighborhoods.  Rules surfacing there for the
first time are collected and scored in one batched sweep.  Rules whose
scores fall to zero or below stay in the table; they may become useful
again and their links stay current either way.
"""

from __future__ import annotations

import random

from . import dependency
from .corpus import BOUNDARY, Corpus, Lexicon, Site, baseline_assign, error_count
from .rules import Rule, RuleScore
from .training import Model, TraceRecord, TrainerConfig, select


class AuditError(AssertionError):
    """The live index disagrees with a from-scratch recount."""


class RuleRecord:
    """A rule's live effect counts and the sites it currently matches."""

    __slots__ = ("rule", "pos", "neg", "neut", "sites")

    def __init__(self, rule: Rule):
        self.rule = rule
        self.pos = 0
        self.neg = 0
        self.neut = 0
        self.sites: set[Site] = set()

    @property
    def score(self) -> int:
        return self.pos - self.neg

    def snapshot(self) -> RuleScore:
        return RuleScore(self.pos, self.neg, self.neut)

    def __repr__(self):
        return (
            f"RuleRecord({self.rule.canonical!r}, pos={self.pos}, "
            f"neg={self.neg}, neut={self.neut}, sites={len(self.sites)})"
        )


class TrainerIndex:
    """Rule table plus per-site rule links, kept exact between passes."""

    __slots__ = (
        "templates",
        "psets",
        "table",
        "groups",
        "site_rules",
        "sites_by_tag",
        "site_id",
        "max_span",
        "links_total",
        "last_unseen_added",
        "last_sites_rechecked",
    )

    def __init__(self, templates):
        self.templates = tuple(templates)
        psets = []
        for t in self.templates:
            if t.positions not in psets:
                psets.append(t.positions)
        self.psets: list[tuple[int, ...]] = psets
        self.max_span = max(t.span for t in self.templates)
        self.table: dict[Rule, RuleRecord] = {}
        # (pset index, source tag, observed context tags) -> records; this
        # lets one observation at a site find every table rule matching it.
        self.groups: dict[tuple, list[RuleRecord]] = {}
        self.site_rules: dict[Site, set[RuleRecord]] = {}
        self.sites_by_tag: dict[str, set[Site]] = {}
        self.site_id: list[list[Site]] = []
        self.links_total = 0
        self.last_unseen_added = 0
        self.last_sites_rechecked = 0

    def _group_key(self, rule: Rule) -> tuple:
        pi = self.psets.index(rule.positions)
        return (pi, rule.frm, tuple(t for _, t in rule.ctx))

    def _add_rule(self, rule: Rule) -> RuleRecord:
        rec = RuleRecord(rule)
        self.table[rule] = rec
        self.groups.setdefault(self._group_key(rule), []).append(rec)
        return rec

    def _link(self, rec: RuleRecord, site: Site, truth) -> None:
        rec.sites.add(site)
        rules = self.site_rules.get(site)
        if rules is None:
            self.site_rules[site] = {rec}
        else:
            rules.add(rec)
        self.links_total += 1
        if truth == rec.rule.to:
            rec.pos += 1
        elif truth == rec.rule.frm:
            rec.neg += 1
        else:
            rec.neut += 1

    def _untally(self, rec: RuleRecord, truth) -> None:
        self.links_total -= 1
        if truth == rec.rule.to:
            rec.pos -= 1
        elif truth == rec.rule.frm:
            rec.neg -= 1
        else:
            rec.neut -= 1


def init_index(corpus: Corpus, templates) -> TrainerIndex:
    """Build the table from scratch against the corpus's current tags.

    Two sweeps: instantiate a record for every rule that would fix some
    mistagged site, then link each record to every site it matches and
    tally the effect there.  Scores come out equal to a fresh
    enumerate_candidates over the same corpus.
    """
    index = TrainerIndex(templates)
    index.site_id = [
        [(si, ti) for ti in range(len(sent))] for si, sent in enumerate(corpus.sentences)
    ]
    psets = index.psets

    for si, sent in enumerate(corpus.sentences):
        n = len(sent)
        for ti in range(n):
            tok = sent[ti]
            cur = tok.current
            truth = tok.truth
            if cur == truth or truth is None:
                continue
            for pset in psets:
                ctx = tuple(
                    (off, sent[ti + off].current if 0 <= ti + off < n else BOUNDARY)
                    for off in pset
                )
                rule = Rule(cur, truth, ctx)
                if rule not in index.table:
                    index._add_rule(rule)

    groups = index.groups
    sites_by_tag = index.sites_by_tag
    for si, sent in enumerate(corpus.sentences):
        n = len(sent)
        row = index.site_id[si]
        for ti in range(n):
            tok = sent[ti]
            cur = tok.current
            site = row[ti]
            bucket = sites_by_tag.get(cur)
            if bucket is None:
                sites_by_tag[cur] = {site}
            else:
                bucket.add(site)
            truth = tok.truth
            for pi, pset in enumerate(psets):
                ctx_tags = tuple(
                    sent[ti + off].current if 0 <= ti + off < n else BOUNDARY
                    for off in pset
                )
                grp = groups.get((pi, cur, ctx_tags))
                if grp:
                    for rec in grp:
                        index._link(rec, site, truth)
    return index


def apply_and_update(
    index: TrainerIndex,
    corpus: Corpus,
    rule: Rule,
    pass_no: int = 0,
    record_deps: bool = False,
) -> list[Site]:
    """Apply a table rule at its linked sites and repair the index.

    The site list is snapshotted up front, so later changes never alter
    the match set mid-pass.  After rewriting, every site within the
    largest template span of a change (same sentence) has its matching
    rule set re-derived: stale links are dropped, new links added, and
    each affected score adjusted by the effect class of the link's site.
    Mistagged neighborhood sites may instantiate rules the table has
    never seen; those are added and scored in one batched sweep over the
    sites currently holding their source tag.  Returns the changed sites
    in corpus order.
    """
    rec = index.table.get(rule)
    if rec is None:
        raise KeyError(f"rule {rule.canonical!r} is not in the trainer index")
    sites = sorted(rec.sites)

    if record_deps:
        dependency.record_pass(corpus, sites, rule, pass_no)

    to = rule.to
    sentences = corpus.sentences
    sites_by_tag = index.sites_by_tag
    for site in sites:
        si, ti = site
        tok = sentences[si][ti]
        sites_by_tag[tok.current].discard(site)
        tok.current = to
        bucket = sites_by_tag.get(to)
        if bucket is None:
            sites_by_tag[to] = {site}
        else:
            bucket.add(site)

    # Deduplicated neighborhood: every same-sentence site within max_span
    # of a change, the changed sites themselves included.
    max_span = index.max_span
    neighborhood: dict[Site, None] = {}
    for si, ti in sites:
        row = index.site_id[si]
        lo = ti - max_span
        if lo < 0:
            lo = 0
        hi = ti + max_span + 1
        if hi > len(row):
            hi = len(row)
        for tj in range(lo, hi):
            neighborhood[row[tj]] = None

    table = index.table
    groups = index.groups
    psets = index.psets
    site_rules = index.site_rules
    templates = index.templates
    unseen: dict[Rule, None] = {}

    for site in neighborhood:
        si, ti = site
        sent = sentences[si]
        n = len(sent)
        tok = sent[ti]
        cur = tok.current
        truth = tok.truth

        new_set: set[RuleRecord] = set()
        for pi, pset in enumerate(psets):
            ctx_tags = tuple(
                sent[ti + off].current if 0 <= ti + off < n else BOUNDARY
                for off in pset
            )
            grp = groups.get((pi, cur, ctx_tags))
            if grp:
                new_set.update(grp)

        old_set = site_rules.get(site)
        if old_set:
            for gone in old_set - new_set:
                gone.sites.discard(site)
                index._untally(gone, truth)
            for came in new_set - old_set:
                came.sites.add(site)
                index.links_total += 1
                if truth == came.rule.to:
                    came.pos += 1
                elif truth == came.rule.frm:
                    came.neg += 1
                else:
                    came.neut += 1
        else:
            for came in new_set:
                came.sites.add(site)
                index.links_total += 1
                if truth == came.rule.to:
                    came.pos += 1
                elif truth == came.rule.frm:
                    came.neg += 1
                else:
                    came.neut += 1
        if new_set:
            site_rules[site] = new_set
        elif old_set is not None:
            del site_rules[site]

        if truth is not None and cur != truth:
            for t in templates:
                ctx = tuple(
                    (off, sent[ti + off].current if 0 <= ti + off < n else BOUNDARY)
                    for off in t.positions
                )
                fix = Rule(cur, truth, ctx)
                if fix not in table:
                    unseen[fix] = None

    # Newly seen rules: add them, then score each against just the sites
    # whose current tag is its source; this finds exactly the sites a
    # whole-corpus sweep would, since a match requires that tag.
    for new_rule in unseen:
        new_rec = index._add_rule(new_rule)
        bucket = sites_by_tag.get(new_rule.frm)
        if not bucket:
            continue
        ctx = new_rule.ctx
        for site in bucket:
            si, ti = site
            sent = sentences[si]
            n = len(sent)
            ok = True
            for off, tag in ctx:
                j = ti + off
                got = sent[j].current if 0 <= j < n else BOUNDARY
                if got != tag:
                    ok = False
                    break
            if ok:
                index._link(new_rec, site, sent[ti].truth)

    index.last_unseen_added = len(unseen)
    index.last_sites_rechecked = len(neighborhood)
    return sites


def verify_index(index: TrainerIndex, corpus: Corpus) -> None:
    """Recount every table rule from the corpus and compare to the index.

    Brute force on purpose: match sets are re-derived with nothing but
    the corpus tags, then checked against stored links, scores, per-site
    rule sets, the tag buckets, and the link total.  Raises AuditError
    on the first discrepancy.
    """
    by_cur: dict[str, list[Site]] = {}
    for si, sent in enumerate(corpus.sentences):
        for ti, tok in enumerate(sent):
            by_cur.setdefault(tok.current, []).append((si, ti))

    want_by_tag = {tag: set(sites) for tag, sites in by_cur.items()}
    have_by_tag = {tag: b for tag, b in index.sites_by_tag.items() if b}
    if want_by_tag != have_by_tag:
        raise AuditError("sites_by_tag disagrees with the corpus")

    links_seen = 0
    want_site_rules: dict[Site, set] = {}
    for rule, rec in index.table.items():
        want_sites = set()
        pos = neg = neut = 0
        ctx = rule.ctx
        for site in by_cur.get(rule.frm, ()):
            si, ti = site
            sent = corpus.sentences[si]
            n = len(sent)
            ok = True
            for off, tag in ctx:
                j = ti + off
                got = sent[j].current if 0 <= j < n else BOUNDARY
                if got != tag:
                    ok = False
                    break
            if not ok:
                continue
            want_sites.add(site)
            truth = sent[ti].truth
            if truth == rule.to:
                pos += 1
            elif truth == rule.frm:
                neg += 1
            else:
                neut += 1
        if want_sites != rec.sites:
            raise AuditError(
                f"{rule.canonical!r}: stored sites {sorted(rec.sites)} != "
                f"recounted {sorted(want_sites)}"
            )
        if (pos, neg, neut) != (rec.pos, rec.neg, rec.neut):
            raise AuditError(
                f"{rule.canonical!r}: stored score ({rec.pos},{rec.neg},{rec.neut})"
                f" != recounted ({pos},{neg},{neut})"
            )
        links_seen += len(want_sites)
        for site in want_sites:
            want_site_rules.setdefault(site, set()).add(rec)

    have_site_rules = {s: rules for s, rules in index.site_rules.items() if rules}
    if want_site_rules != have_site_rules:
        raise AuditError("per-site rule links disagree with the recount")
    if links_seen != index.links_total:
        raise AuditError(f"links_total {index.links_total} != recounted {links_seen}")


def train_incremental(
    corpus: Corpus,
    lexicon: Lexicon,
    config: TrainerConfig | None = None,
    audit_log: list[str] | None = None,
):
    """Train on a gold corpus; returns (model, trace, curve).

    Output-equivalent to train_naive under the same config and seed.
    With config.audit the index is recounted after setup and every pass.
    audit_log, when given, receives one tab-separated line per pass:
    pass, rules_in_table, links_total, unseen_rules_added,
    sites_rechecked.
    """
    if config is None:
        config = TrainerConfig()
    errors = baseline_assign(corpus, lexicon)
    n = corpus.n_tokens
    rng = random.Random(config.rng_seed)
    index = init_index(corpus, config.templates)
    if config.audit:
        verify_index(index, corpus)

    learned: list[Rule] = []
    trace: list[TraceRecord] = []
    acc = 1.0 if n == 0 else (n - errors) / n
    curve: list[tuple[int, float]] = [(0, acc)]
    while config.max_passes is None or len(learned) < config.max_passes:
        picked = select(index.table.items(), config, rng)
        if picked is None:
            break
        rule, sc = picked
        pass_no = len(learned) + 1
        apply_and_update(index, corpus, rule, pass_no, config.record_deps)
        # Matches were classified before the rewrite, so the error count
        # moves by exactly the net score.
        errors -= sc.score
        acc = 1.0 if n == 0 else (n - errors) / n
        learned.append(rule)
        trace.append(TraceRecord(pass_no, rule, sc.pos, sc.neg, sc.neut, acc))
        curve.append((pass_no, acc))
        if config.audit:
            verify_index(index, corpus)
            actual = error_count(corpus)
            if errors != actual:
                raise AuditError(
                    f"tracked error count {errors} != recount {actual} after pass {pass_no}"
                )
        if audit_log is not None:
            audit_log.append(
                f"{pass_no}\t{len(index.table)}\t{index.links_total}"
                f"\t{index.last_unseen_added}\t{index.last_sites_rechecked}"
            )
    return Model(lexicon, learned, config), trace, curve
