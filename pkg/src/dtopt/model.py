"""Instances, tests, and decision trees for weighted comparison-based dispatch.

An instance holds ``n`` integer query values in strictly increasing order, a
nonnegative integer weight per query, a key flag per query (only flagged
values may appear in tests), and a family of possibly overlapping classes
that together cover every query.  Internally every query is identified by
its *rank*: its position in value order.  All operations in this package
speak ranks; values appear only at construction time and in the text
formats.

A decision tree routes a query downward with two kinds of binary tests on a
key ``k``: "is the query < k" (legal only when k is not the minimum value)
and "is the query = k".  Each leaf names a class, and the tree is correct
when every query ends at a leaf whose class contains it.  The cost of a tree
is the weighted sum of search-path lengths.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .errors import CostOverflowError, MalformedTreeError, ValidationError

INT64_MAX = 2**63 - 1

LESS = "<"
EQUAL = "="

_ID_FORBIDDEN = set("()") | set(" \t\r\n\f\v")


def _rank_by_weight(weights):
    # Position in the (weight ascending, value ascending) order.  Values are
    # strictly increasing with rank, so the value tiebreak is the index.
    order = sorted(range(len(weights)), key=lambda q: (weights[q], q))
    rank = [0] * len(weights)
    for pos, q in enumerate(order):
        rank[q] = pos
    return tuple(rank)


class Instance:
    """Immutable problem instance.

    Parameters
    ----------
    values : iterable of int
        Query values, strictly increasing.
    weights : iterable of int
        One nonnegative 64-bit weight per query.
    is_key : iterable of bool
        One flag per query; true where the value may be used in tests.
    classes : iterable of (str, iterable of int)
        ``(class_id, member_values)`` pairs.  Members are given as values
        and stored as ranks.  Classes may overlap; every query must belong
        to at least one class.

    Attributes
    ----------
    n : number of queries.
    m : total number of class memberships.
    weight_rank : tuple of int
        Rank of each query in the (weight, value) ascending order; the
        "heavier than" relation used throughout is on these ranks.
    key_ranks : tuple of int
        Ranks of the key queries, ascending.
    classes : tuple of (str, frozenset of int)
        Class ids with member *ranks*.
    classes_of : tuple of tuple of int
        For each rank, the indices of the classes containing it.
    """

    def __init__(self, values, weights, is_key, classes):
        self.values = tuple(int(v) for v in values)
        self.weights = tuple(int(w) for w in weights)
        self.is_key = tuple(bool(k) for k in is_key)
        n = len(self.values)
        if n == 0:
            raise ValidationError("instance needs at least one query")
        if len(self.weights) != n or len(self.is_key) != n:
            raise ValidationError("values, weights and is_key lengths differ")
        for a, b in zip(self.values, self.values[1:]):
            if a >= b:
                raise ValidationError(
                    f"query values must be strictly increasing ({a} then {b})"
                )
        for w in self.weights:
            if w < 0:
                raise ValidationError(f"negative weight {w}")
            if w > INT64_MAX:
                raise ValidationError(f"weight {w} exceeds the 64-bit range")
        total = sum(self.weights)
        if total * n > INT64_MAX:
            # Any tree the solver builds has depth < n, so this load-time
            # bound is what guarantees cost sums stay inside 64 bits.
            raise ValidationError("sum(weights) * n exceeds the 64-bit budget")
        self.total_weight = total
        self.n = n
        self.value_to_rank = {v: q for q, v in enumerate(self.values)}

        seen_ids = set()
        built = []
        for cid, members in classes:
            cid = str(cid)
            if not cid or any(ch in _ID_FORBIDDEN for ch in cid):
                raise ValidationError(
                    f"class id {cid!r} must be nonempty without whitespace or parens"
                )
            if cid in seen_ids:
                raise ValidationError(f"duplicate class id {cid!r}")
            seen_ids.add(cid)
            ranks = set()
            for v in members:
                v = int(v)
                if v not in self.value_to_rank:
                    raise ValidationError(f"class {cid!r} member {v} is not a query value")
                ranks.add(self.value_to_rank[v])
            built.append((cid, frozenset(ranks)))
        self.classes = tuple(built)
        self.m = sum(len(c) for _, c in self.classes)

        covered = [[] for _ in range(n)]
        for ci, (_, members) in enumerate(self.classes):
            for q in members:
                covered[q].append(ci)
        for q, owners in enumerate(covered):
            if not owners:
                raise ValidationError(
                    f"query value {self.values[q]} belongs to no class"
                )
        self.classes_of = tuple(tuple(owners) for owners in covered)

        self.weight_rank = _rank_by_weight(self.weights)
        self.key_ranks = tuple(q for q in range(n) if self.is_key[q])

    def class_index(self, class_id):
        """Index of *class_id*, or None."""
        for ci, (cid, _) in enumerate(self.classes):
            if cid == class_id:
                return ci
        return None

    def rank_of(self, value):
        """Rank of a query value; raises KeyError for unknown values."""
        return self.value_to_rank[value]

    def __repr__(self):
        return f"Instance(n={self.n}, keys={len(self.key_ranks)}, classes={len(self.classes)})"


def derive_weight_rank(instance):
    """Recompute the weight ranks from the instance weights.

    Equal weights are broken by ascending value, so ranks form a
    permutation of 0..n-1 and every query comparison by weight is strict.
    """
    return _rank_by_weight(instance.weights)


@dataclass(frozen=True)
class Test:
    """A comparison against a key, identified by the key's rank."""

    __test__ = False  # keep pytest from collecting this as a test case

    kind: str  # LESS or EQUAL
    key: int

    def __post_init__(self):
        if self.kind not in (LESS, EQUAL):
            raise ValueError(f"unknown test kind {self.kind!r}")

    def is_legal(self, instance):
        """Keys must be flagged; a less-than key must exceed min Q."""
        q = self.key
        if not 0 <= q < instance.n or not instance.is_key[q]:
            return False
        return self.kind == EQUAL or q >= 1


@dataclass(frozen=True)
class Outcome:
    """One branch of a test: the yes side or the no side."""

    test: Test
    yes: bool

    def admits(self, q):
        """Does query rank *q* take this branch?"""
        if self.test.kind == LESS:
            return (q < self.test.key) == self.yes
        return (q == self.test.key) == self.yes


@dataclass(frozen=True)
class Leaf:
    class_id: str


@dataclass(frozen=True)
class Internal:
    test: Test
    yes: "DecisionTree"
    no: "DecisionTree"


DecisionTree = Union[Leaf, Internal]


def legal_tests(instance):
    """All legal tests, deterministically ordered (less-than first)."""
    out = [Test(LESS, k) for k in instance.key_ranks if k >= 1]
    out.extend(Test(EQUAL, k) for k in instance.key_ranks)
    return out


def _check_node_legal(node, instance, path):
    if isinstance(node, Leaf):
        if instance.class_index(node.class_id) is None:
            raise MalformedTreeError(
                f"leaf at {_fmt_path(path)} names unknown class {node.class_id!r}"
            )
    else:
        if not node.test.is_legal(instance):
            raise MalformedTreeError(
                f"test at {_fmt_path(path)} is illegal: "
                f"{node.test.kind}{instance.values[node.test.key] if 0 <= node.test.key < instance.n else node.test.key}"
            )


def _fmt_path(path):
    return "/" + "/".join(path) if path else "root"


@dataclass(frozen=True)
class SearchResult:
    class_id: str
    depth: int
    path: tuple


def search(tree, instance, q):
    """Route query rank *q* through the tree.

    Returns the leaf's class id, the number of tests evaluated, and the
    sequence of outcomes taken.  Only values in the instance are
    searchable; callers resolve values to ranks first.
    """
    if not 0 <= q < instance.n:
        raise ValueError(f"query rank {q} out of range")
    node = tree
    steps = []
    path = ()
    while isinstance(node, Internal):
        _check_node_legal(node, instance, path)
        yes = Outcome(node.test, True).admits(q)
        steps.append(Outcome(node.test, yes))
        path = path + ("yes" if yes else "no",)
        node = node.yes if yes else node.no
    _check_node_legal(node, instance, path)
    return SearchResult(node.class_id, len(steps), tuple(steps))


def _iter_nodes(tree, instance):
    """Yield (path, node, query bitmask) for every node, checking legality."""
    full = (1 << instance.n) - 1
    stack = [((), tree, full)]
    while stack:
        path, node, mask = stack.pop()
        _check_node_legal(node, instance, path)
        yield path, node, mask
        if isinstance(node, Internal):
            k = node.test.key
            if node.test.kind == LESS:
                yes_mask = mask & ((1 << k) - 1)
            else:
                yes_mask = mask & (1 << k)
            stack.append((path + ("no",), node.no, mask & ~yes_mask))
            stack.append((path + ("yes",), node.yes, yes_mask))


def _mask_weight(mask, weights):
    total = 0
    while mask:
        low = mask & -mask
        total += weights[low.bit_length() - 1]
        mask &= mask - 1
    return total


def _mask_ranks(mask):
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask &= mask - 1
    return tuple(out)


def tree_cost(tree, instance):
    """Total weighted search-path length, checked against the 64-bit bound.

    Works for arbitrary well-formed trees, including non-irreducible ones
    whose depth exceeds n; raises CostOverflowError past 2**63 - 1.
    """
    cost = 0
    for _, node, mask in _iter_nodes(tree, instance):
        if isinstance(node, Internal):
            cost += _mask_weight(mask, instance.weights)
            if cost > INT64_MAX:
                raise CostOverflowError("tree cost exceeds the 64-bit range")
    return cost


@dataclass
class VerifyReport:
    correct: bool
    cost: int
    irreducible: bool
    admissible: bool
    heaviest_first: bool
    node_queries: dict
    violations: list = field(default_factory=list)
    equivalent_pairs: list = field(default_factory=list)


def _yes_mask(test, n):
    if test.kind == LESS:
        return (1 << test.key) - 1
    return 1 << test.key


def verify_tree(tree, instance):
    """Audit a tree against an instance.

    The report carries the correctness verdict, the checked cost, the set
    of query ranks reaching every node, and three independent flags:
    irreducible (every node reached, no internal node coverable by one
    class), admissible (every node's query set is admissible), and
    heaviest-first (every equality node tests the heaviest key reaching
    it).  Structural problems (unknown classes, illegal tests) raise
    MalformedTreeError instead of being reported.
    """
    from .signatures import is_admissible  # local import: signatures builds on this module

    report = VerifyReport(
        correct=True,
        cost=0,
        irreducible=True,
        admissible=True,
        heaviest_first=True,
        node_queries={},
    )
    wr = instance.weight_rank
    internal_nodes = []
    cost = 0
    for path, node, mask in _iter_nodes(tree, instance):
        ranks = _mask_ranks(mask)
        report.node_queries[path] = ranks
        if not mask:
            report.irreducible = False
            report.violations.append(f"node {_fmt_path(path)}: no query reaches it")
        if is_internal := isinstance(node, Internal):
            internal_nodes.append((path, node))
            cost += _mask_weight(mask, instance.weights)
            if cost > INT64_MAX:
                raise CostOverflowError("tree cost exceeds the 64-bit range")
        admissible, _ = is_admissible(ranks, instance)
        if not admissible:
            report.admissible = False
        if is_internal:
            if any(set(ranks) <= members for _, members in instance.classes):
                report.irreducible = False
                report.violations.append(
                    f"node {_fmt_path(path)}: queries fit one class but the node tests"
                )
            if node.test.kind == EQUAL:
                keys = [q for q in ranks if instance.is_key[q]]
                heaviest = max(keys, key=lambda q: wr[q], default=None)
                if node.test.key != heaviest:
                    report.heaviest_first = False
            continue
        members = instance.classes[instance.class_index(node.class_id)][1]
        if not set(ranks) <= members:
            report.correct = False
            report.violations.append(
                f"leaf {_fmt_path(path)}: queries outside class {node.class_id!r}"
            )
    report.cost = cost

    # Property of irreducible trees: no two nodes carry equivalent tests.
    full = (1 << instance.n) - 1
    for i in range(len(internal_nodes)):
        pi, ni = internal_nodes[i]
        yi = _yes_mask(ni.test, instance.n)
        for j in range(i + 1, len(internal_nodes)):
            pj, nj = internal_nodes[j]
            yj = _yes_mask(nj.test, instance.n)
            if yi == yj or yi == full ^ yj:
                report.equivalent_pairs.append((pi, pj))
    if report.irreducible and report.equivalent_pairs:
        report.violations.append(
            "irreducible tree carries equivalent tests at "
            + ", ".join(f"{_fmt_path(a)}~{_fmt_path(b)}" for a, b in report.equivalent_pairs)
        )
    return report


def check_feasibility(instance):
    """Decide whether any correct tree exists.

    Feasible iff every query belongs to some class and every maximal run
    of consecutive keyless queries fits inside a single class: tests can
    only cut at keys, so such a run always travels to one leaf together.
    Returns ``(True, None)`` or ``(False, witness)`` where the witness is
    ``("uncovered_query", rank)`` or ``("keyless_run", (ranks...))``.
    """
    for q in range(instance.n):
        if not instance.classes_of[q]:
            return False, ("uncovered_query", q)
    start = None
    for q in range(instance.n + 1):
        if q < instance.n and not instance.is_key[q]:
            if start is None:
                start = q
            continue
        if start is not None:
            run = set(range(start, q))
            if not any(run <= members for _, members in instance.classes):
                return False, ("keyless_run", tuple(sorted(run)))
            start = None
    return True, None
