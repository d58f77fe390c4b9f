"""Exponential-time reference solver: plain recurrence over query subsets.

No admissibility, no signatures: every nonempty subset reachable from Q by
test splits is memoized directly, keyed by bitmask.  Capped at n <= 20 and
deliberately unoptimized — this module is the ground truth the polynomial
solver is validated against, so it shares only the test-legality rules
with the rest of the package.
"""

from __future__ import annotations

import math

from .model import EQUAL, Internal, Leaf, legal_tests

INF = math.inf
MAX_ORACLE_N = 20


class _Table:
    def __init__(self, instance):
        if instance.n > MAX_ORACLE_N:
            raise ValueError(
                f"subset oracle is capped at n <= {MAX_ORACLE_N} (got {instance.n})"
            )
        self.instance = instance
        self.class_masks = [
            sum(1 << q for q in members) for _, members in instance.classes
        ]
        # (yes-side bitmask over Q, test) for every legal test.
        self.tests = []
        for t in legal_tests(instance):
            if t.kind == EQUAL:
                yes = 1 << t.key
            else:
                yes = (1 << t.key) - 1
            self.tests.append((yes, t))
        self.memo = {}

    def leaf_class(self, mask):
        for ci, cmask in enumerate(self.class_masks):
            if mask & ~cmask == 0:
                return ci
        return None

    def weight(self, mask):
        total = 0
        w = self.instance.weights
        while mask:
            low = mask & -mask
            total += w[low.bit_length() - 1]
            mask &= mask - 1
        return total

    def cost(self, mask):
        if mask == 0:
            return INF
        hit = self.memo.get(mask)
        if hit is not None:
            return hit[0]
        if self.leaf_class(mask) is not None:
            self.memo[mask] = (0, None)
            return 0
        best = INF
        best_test = None
        for yes_mask, t in self.tests:
            yes = mask & yes_mask
            if yes == 0 or yes == mask:
                continue
            sub = self.cost(yes) + self.cost(mask & ~yes_mask)
            if sub < best:
                best = sub
                best_test = t
        total = self.weight(mask) + best if best < INF else INF
        self.memo[mask] = (total, best_test)
        return total

    def tree(self, mask):
        self.cost(mask)
        _, t = self.memo[mask]
        if t is None:
            ci = self.leaf_class(mask)
            return Leaf(self.instance.classes[ci][0])
        if t.kind == EQUAL:
            yes_mask = 1 << t.key
        else:
            yes_mask = (1 << t.key) - 1
        return Internal(t, self.tree(mask & yes_mask), self.tree(mask & ~yes_mask))


def subset_dp_cost(instance, R=None):
    """Exact minimum tree cost for subset R (default: all of Q), or inf.

    Cost of the empty set is defined as inf; a set inside some class
    costs 0; otherwise w(R) plus the best split over allowed tests with
    both sides nonempty.
    """
    table = _Table(instance)
    if R is None:
        mask = (1 << instance.n) - 1
    else:
        mask = 0
        for q in R:
            if not 0 <= q < instance.n:
                raise ValueError(f"query rank {q} out of range")
            mask |= 1 << q
    return table.cost(mask)


def subset_dp_tree(instance):
    """An optimal tree for the full query set, or None when infeasible."""
    table = _Table(instance)
    mask = (1 << instance.n) - 1
    if table.cost(mask) == INF:
        return None
    return table.tree(mask)
