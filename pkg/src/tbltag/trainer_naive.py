"""Reference trainer: re-derive and re-score every candidate each pass.

Slow but simple, this is the semantic baseline the incremental trainer
must match exactly.  Each pass enumerates the rules that would fix some
currently mistagged site, scores them all over the whole corpus, applies
the selected one, and starts over.
"""

from __future__ import annotations

import random

from .corpus import BOUNDARY, Corpus, Lexicon, baseline_assign, error_count
from .rules import Rule, RuleScore, find_sites
from .training import Model, TraceRecord, TrainerConfig, apply_at_sites, select


def _distinct_position_sets(templates) -> list[tuple[int, ...]]:
    out = []
    for t in templates:
        if t.positions not in out:
            out.append(t.positions)
    return out


def enumerate_candidates(corpus: Corpus, templates) -> dict[Rule, RuleScore]:
    """All rules instantiable at currently mistagged sites, fully scored.

    Scores equal score_rule for every returned rule; candidates generated
    at several sites are merged into one entry.  Every candidate has
    pos >= 1 because its generating site is a positive match.
    """
    psets = _distinct_position_sets(templates)

    # Scan 1: instantiate at error sites, dedup by rule value.
    tallies: dict[Rule, list[int]] = {}
    groups: dict[tuple, list[Rule]] = {}
    for sent in corpus.sentences:
        n = len(sent)
        for ti in range(n):
            tok = sent[ti]
            cur = tok.current
            truth = tok.truth
            if cur == truth or truth is None:
                continue
            for pi, pset in enumerate(psets):
                ctx_tags = tuple(
                    sent[ti + off].current if 0 <= ti + off < n else BOUNDARY
                    for off in pset
                )
                rule = Rule(cur, truth, tuple(zip(pset, ctx_tags)))
                if rule not in tallies:
                    tallies[rule] = [0, 0, 0]
                    groups.setdefault((pi, cur, ctx_tags), []).append(rule)

    if not tallies:
        return {}

    # Scan 2: tally every candidate's effects in one sweep by matching the
    # observed (positions, current, context) key against the group table.
    for sent in corpus.sentences:
        n = len(sent)
        for ti in range(n):
            tok = sent[ti]
            cur = tok.current
            truth = tok.truth
            for pi, pset in enumerate(psets):
                ctx_tags = tuple(
                    sent[ti + off].current if 0 <= ti + off < n else BOUNDARY
                    for off in pset
                )
                grp = groups.get((pi, cur, ctx_tags))
                if not grp:
                    continue
                for rule in grp:
                    t = tallies[rule]
                    if truth == rule.to:
                        t[0] += 1
                    elif truth == cur:
                        t[1] += 1
                    else:
                        t[2] += 1

    return {rule: RuleScore(*t) for rule, t in tallies.items()}


def train_naive(corpus: Corpus, lexicon: Lexicon, config: TrainerConfig | None = None):
    """Train on a gold corpus; returns (model, trace, curve).

    The corpus is left baseline-tagged then rewritten by the learned rules
    in order; the curve starts at pass 0 with the baseline accuracy.
    """
    if config is None:
        config = TrainerConfig()
    baseline_assign(corpus, lexicon)
    n = corpus.n_tokens
    rng = random.Random(config.rng_seed)

    def acc() -> float:
        return 1.0 if n == 0 else (n - error_count(corpus)) / n

    learned: list[Rule] = []
    trace: list[TraceRecord] = []
    curve: list[tuple[int, float]] = [(0, acc())]
    while config.max_passes is None or len(learned) < config.max_passes:
        candidates = enumerate_candidates(corpus, config.templates)
        picked = select(candidates.items(), config, rng)
        if picked is None:
            break
        rule, sc = picked
        pass_no = len(learned) + 1
        sites = find_sites(rule, corpus)
        apply_at_sites(corpus, rule, sites, pass_no, config.record_deps)
        learned.append(rule)
        a = acc()
        trace.append(TraceRecord(pass_no, rule, sc.pos, sc.neg, sc.neut, a))
        curve.append((pass_no, a))
    return Model(lexicon, learned, config), trace, curve
