"""Rule-application dependency structures.

Every tag change gets an immutable node naming the rule and the training
pass.  A node's children are the previous node at the same site (offset 0)
and the nodes at the rule's context offsets, all read as they stood before
the pass began.  A token's dep link always points at the most recent node,
so the final links form per-site trees (really DAGs, since a node can be
shared by several parents) whose shapes show how rules fed each other.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import Corpus, Site
from .rules import Rule, display_rule


class RecordingDisabledError(RuntimeError):
    """A dependency report was requested for a model trained without one."""


class DependencyNode:
    """One tag change: a rule, the pass it fired in, and what it built on."""

    __slots__ = ("rule", "pass_no", "children")

    def __init__(self, rule: Rule, pass_no: int, children: dict[int, "DependencyNode"]):
        for off, child in children.items():
            if child.pass_no >= pass_no:
                raise ValueError(
                    f"child at offset {off} from pass {child.pass_no} cannot "
                    f"precede a pass-{pass_no} node"
                )
        self.rule = rule
        self.pass_no = pass_no
        self.children = children

    def node_count(self) -> int:
        """Number of distinct nodes reachable from this one, itself included."""
        seen = set()
        stack = [self]
        while stack:
            node = stack.pop()
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.extend(node.children.values())
        return len(seen)

    def __repr__(self):
        return f"DependencyNode({self.rule.canonical!r}, pass={self.pass_no})"


def record_pass(corpus: Corpus, sites: list[Site], rule: Rule, pass_no: int) -> list[DependencyNode]:
    """Create and install nodes for all sites one rule changes in one pass.

    Child links are gathered for every site before any node is installed,
    so sites changed together see each other's previous nodes, never the
    new ones.  Call before the tags themselves are rewritten.
    """
    offsets = [off for off, _ in rule.ctx]
    gathered = []
    for si, ti in sites:
        sent = corpus.sentences[si]
        children: dict[int, DependencyNode] = {}
        prior = sent[ti].dep
        if prior is not None:
            children[0] = prior
        for off in offsets:
            j = ti + off
            if 0 <= j < len(sent):
                neighbor = sent[j].dep
                if neighbor is not None:
                    children[off] = neighbor
        gathered.append(children)
    nodes = []
    for (si, ti), children in zip(sites, gathered):
        node = DependencyNode(rule, pass_no, children)
        corpus.sentences[si][ti].dep = node
        nodes.append(node)
    return nodes


def record_application(corpus: Corpus, site: Site, rule: Rule, pass_no: int) -> DependencyNode:
    """Single-site convenience wrapper around record_pass."""
    return record_pass(corpus, [site], rule, pass_no)[0]


def canonical_key(node: DependencyNode, include_pass: bool = True, _memo=None) -> str:
    """Deterministic serialization of a tree's shape, rules, and offsets.

    Two structurally identical trees get equal keys; shared subtrees are
    not distinguished from equal copies.  Pass numbers are part of the key
    unless ``include_pass`` is false.
    """
    if _memo is None:
        _memo = {}
    key = _memo.get(id(node))
    if key is not None:
        return key
    inner = ",".join(
        f"{off}:{canonical_key(child, include_pass, _memo)}"
        for off, child in sorted(node.children.items())
    )
    head = node.rule.canonical
    if include_pass:
        head = f"{head}|{node.pass_no}"
    key = f"{head}({inner})"
    _memo[id(node)] = key
    return key


def render_tree(node: DependencyNode) -> list[str]:
    """Flatten a tree to lines ``offset: rule (pass)`` in pass order.

    Offsets are cumulative relative to the root's site; the root is always
    the last line since children strictly precede their parents in pass
    order.  Shared nodes reached at the same cumulative offset print once.
    """
    entries = []
    seen = set()

    def walk(n: DependencyNode, cum: int):
        if (id(n), cum) in seen:
            return
        seen.add((id(n), cum))
        entries.append((n.pass_no, cum, n.rule))
        for off, child in n.children.items():
            walk(child, cum + off)

    walk(node, 0)
    entries.sort(key=lambda e: (e[0], e[1]))
    return [
        f"{off:+d}: {display_rule(rule)} ({pass_no})" if off else f"0: {display_rule(rule)} ({pass_no})"
        for pass_no, off, rule in entries
    ]


@dataclass(slots=True)
class TreeClass:
    """All final site trees sharing one canonical key."""

    key: str
    count: int
    representative: DependencyNode


def collect_classes(corpus: Corpus, include_pass: bool = True) -> list[TreeClass]:
    """Group final per-site trees by canonical key.

    Sorted by descending count, then ascending key.  Counts sum to the
    number of sites whose tag was changed at least once.
    """
    memo: dict[int, str] = {}
    classes: dict[str, TreeClass] = {}
    for sent in corpus.sentences:
        for tok in sent:
            node = tok.dep
            if node is None:
                continue
            key = canonical_key(node, include_pass, memo)
            tc = classes.get(key)
            if tc is None:
                classes[key] = TreeClass(key, 1, node)
            else:
                tc.count += 1
    return sorted(classes.values(), key=lambda tc: (-tc.count, tc.key))


def dependency_report(corpus: Corpus, model=None, include_pass: bool = True) -> str:
    """Text report: change counts, leverage, and every tree class.

    ``model``, when given, must have been trained with dependency
    recording enabled; otherwise the corpus carries no dep links and the
    report would be silently empty.
    """
    if model is not None and not model.record_deps:
        raise RecordingDisabledError(
            "model was trained without dependency recording; retrain with it enabled"
        )
    classes = collect_classes(corpus, include_pass)
    changed = sum(tc.count for tc in classes)
    multi = sum(
        tc.count for tc in classes if tc.representative.node_count() > 1
    )
    leverage = multi / changed if changed else 0.0
    lines = [
        f"sites-changed\t{changed}",
        f"multi-node-sites\t{multi}",
        f"leverage\t{leverage!r}",
    ]
    for tc in classes:
        lines.append("")
        lines.append(f"x{tc.count}")
        lines.extend(render_tree(tc.representative))
    return "\n".join(lines) + "\n"
