"""Tree rearrangement machinery: consistency, equivalence, and splitting.

Splitting takes a subtree and a test x and rebuilds the subtree with x at
its root, splicing out every node made redundant on each side.  It
preserves which class each query reaches, which is what the tests here
pin down.  All functions treat trees as immutable values; rebuilt trees
share untouched subtrees with the original.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .errors import ValidationError
from .model import (
    EQUAL,
    Instance,
    Internal,
    Leaf,
    Outcome,
    Test,
    _yes_mask,
    verify_tree,
)

Node = Union[Leaf, Internal]


def outcomes_consistent(o1: Outcome, o2: Outcome, instance: Instance) -> bool:
    """True iff some query in Q satisfies both outcomes.

    Naive linear scan; this is the normative definition against which the
    closed-form variant below is checked.
    """
    return any(o1.admits(q) and o2.admits(q) for q in range(instance.n))


def _admitted_interval(o: Outcome, n: int):
    """The ranks admitted by an outcome, as (lo, hi, excluded-or-None)."""
    k = o.test.key
    if o.test.kind == EQUAL:
        if o.yes:
            return k, k, None
        return 0, n - 1, k
    if o.yes:
        return 0, k - 1, None
    return k, n - 1, None


def outcomes_consistent_fast(o1: Outcome, o2: Outcome, instance: Instance) -> bool:
    """Interval-arithmetic version of outcomes_consistent; O(1)."""
    n = instance.n
    lo1, hi1, ex1 = _admitted_interval(o1, n)
    lo2, hi2, ex2 = _admitted_interval(o2, n)
    lo, hi = max(lo1, lo2), min(hi1, hi2)
    if lo > hi:
        return False
    size = hi - lo + 1
    excluded = {x for x in (ex1, ex2) if x is not None and lo <= x <= hi}
    return size > len(excluded)


def tests_equivalent(t1: Test, t2: Test, instance: Instance) -> bool:
    """True iff the tests agree on every query, or disagree on every query."""
    full = (1 << instance.n) - 1
    y1 = _yes_mask(t1, instance.n)
    y2 = _yes_mask(t2, instance.n)
    return y1 == y2 or y1 == full ^ y2


def check_laminarity(instance: Instance) -> tuple[bool, Optional[str]]:
    """Validate the outcome structure of every pair of distinct legal tests.

    For a non-equivalent pair, exactly one of the four outcome pairs must
    be inconsistent; for an equivalent pair, each outcome of one test must
    be consistent with exactly one outcome of the other.  Returns
    (True, None), or (False, description) for the first violating pair.
    """
    from .model import legal_tests

    tests = legal_tests(instance)
    for i, t1 in enumerate(tests):
        for t2 in tests[i + 1 :]:
            pairs = [
                (Outcome(t1, a), Outcome(t2, b))
                for a in (True, False)
                for b in (True, False)
            ]
            flags = [outcomes_consistent(o1, o2, instance) for o1, o2 in pairs]
            if tests_equivalent(t1, t2, instance):
                # yes/no of t1 must match distinct outcomes of t2.
                ok = (
                    flags[0] + flags[1] == 1
                    and flags[2] + flags[3] == 1
                    and flags[0] != flags[2]
                )
                if not ok:
                    return False, f"equivalent pair {t1} / {t2}: flags {flags}"
            elif sum(flags) != 3:
                return False, f"pair {t1} / {t2}: {4 - sum(flags)} inconsistent pairs"
    return True, None


@dataclass(frozen=True)
class PathDescriptor:
    """A maximal downward path whose outcomes are consistent with both
    outcomes of a reference test.

    ``steps`` holds (node, outcome taken) for every node the path leaves;
    ``terminal`` is where it stops: a leaf, or a node whose test is
    equivalent to the reference test.
    """

    steps: tuple[tuple[Internal, Outcome], ...]
    terminal: Node

    @property
    def nodes(self) -> tuple[Node, ...]:
        return tuple(n for n, _ in self.steps) + (self.terminal,)


def _require_irreducible(tree: Node, instance: Instance) -> None:
    report = verify_tree(tree, instance)
    if not report.irreducible:
        raise ValidationError("tree is not irreducible")


def _find(tree: Node, u: Node) -> Optional[list[tuple[Internal, bool]]]:
    """Path from the root to node u (located by identity), as
    (ancestor, took-yes-branch) pairs; None if u is not in the tree."""
    stack = [(tree, [])]
    while stack:
        node, path = stack.pop()
        if node is u:
            return path
        if isinstance(node, Internal):
            stack.append((node.no, path + [(node, False)]))
            stack.append((node.yes, path + [(node, True)]))
    return None


def x_consistent_path(
    tree: Node, u: Node, x: Test, instance: Instance
) -> PathDescriptor:
    """The unique maximal path from u whose outcomes are all consistent
    with both outcomes of x.

    Ends at a leaf, or at the descendant doing a test equivalent to x.
    The tree must be irreducible (otherwise the path need not be unique).
    """
    if not x.is_legal(instance):
        raise ValidationError(f"test {x} is not legal for this instance")
    _require_irreducible(tree, instance)
    if _find(tree, u) is None:
        raise ValidationError("node u is not in the tree")

    x_yes, x_no = Outcome(x, True), Outcome(x, False)
    steps: list[tuple[Internal, Outcome]] = []
    cur = u
    while isinstance(cur, Internal) and not tests_equivalent(cur.test, x, instance):
        taken = None
        for branch in (True, False):
            o = Outcome(cur.test, branch)
            if outcomes_consistent(o, x_yes, instance) and outcomes_consistent(
                o, x_no, instance
            ):
                taken = o
                break
        if taken is None:  # cannot happen for legal non-equivalent tests
            break
        steps.append((cur, taken))
        cur = cur.yes if taken.yes else cur.no
    return PathDescriptor(tuple(steps), cur)


def _one_side(path: PathDescriptor, alpha: Outcome, instance: Instance) -> Node:
    """One copy of the split subtree: the original with every node whose
    departing outcome is inconsistent with alpha spliced out."""
    terminal = path.terminal
    if isinstance(terminal, Internal):
        # Equivalent to x: keep the child whose edge alpha-queries follow.
        yes_edge = Outcome(terminal.test, True)
        if outcomes_consistent(yes_edge, alpha, instance):
            built = terminal.yes
        else:
            built = terminal.no
    else:
        built = terminal  # the terminal leaf survives in both copies
    for node, taken in reversed(path.steps):
        off = Outcome(node.test, not taken.yes)
        if outcomes_consistent(off, alpha, instance):
            if taken.yes:
                built = Internal(node.test, built, node.no)
            else:
                built = Internal(node.test, node.yes, built)
        # else: node is spliced out of this copy; `built` stands in for it.
    return built


def split_subtree(tree: Node, u: Node, x: Test, instance: Instance) -> Node:
    """Replace the subtree rooted at u with its splitting around x.

    The new subtree has root test x whose yes/no children are the two
    pruned copies of the original subtree.  Every query that reached u
    still reaches (a copy of) the same leaf; the result may well not be
    irreducible.
    """
    path = x_consistent_path(tree, u, x, instance)  # validates preconditions
    replacement = Internal(
        x,
        _one_side(path, Outcome(x, True), instance),
        _one_side(path, Outcome(x, False), instance),
    )
    spine = _find(tree, u)
    built = replacement
    for node, took_yes in reversed(spine):
        if took_yes:
            built = Internal(node.test, built, node.no)
        else:
            built = Internal(node.test, node.yes, built)
    return built


def prune_empty_branches(tree: Node, instance: Instance) -> Node:
    """Contract away every branch reached by no query.

    Complements split_subtree, whose output can park a leaf copy on an
    empty branch.  Does not attempt any further reduction.
    """
    full = (1 << instance.n) - 1

    def rec(node: Node, mask: int) -> Node:
        if isinstance(node, Leaf):
            return node
        ymask = mask & _yes_mask(node.test, instance.n)
        nmask = mask & ~ymask
        if ymask == 0:
            return rec(node.no, nmask)
        if nmask == 0:
            return rec(node.yes, ymask)
        yes, no = rec(node.yes, ymask), rec(node.no, nmask)
        if yes is node.yes and no is node.no:
            return node
        return Internal(node.test, yes, no)

    return rec(tree, full)
