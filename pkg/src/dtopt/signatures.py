"""Signatures of admissible query sets and the subproblem dictionary.

A set R of queries that can reach some tree node is summarized by its
signature tau(R) = (min R, max R, k*, light holes): k* is the heaviest key
in R under the weight-rank order (None when R has no key), a hole is an
interval value missing from R, and a hole is *light* when its weight rank
is strictly below k*'s.  R is admissible when it is nonempty, every hole
is a key, the heavy holes are exactly the interval keys heavier than k*
(together: tau-inverse(tau(R)) == R), and the light-hole set is empty or
equals the b heaviest interval keys (b <= 3) that are lighter than k* and
lie outside some class containing k*.

Admissible sets are in bijection with their signatures, so the solver's
dictionary is keyed by a packed signature: four small integers plus at
most three hole ranks, folded into one machine-sized int.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .errors import ResourceLimitError

DEFAULT_MAX_RECORDS = 50_000_000

# Memoization sentinels stored in AdmissibleDictionary.memo (costs are >= 0).
UNSOLVED = -1
INFEASIBLE = -2


class Signature(NamedTuple):
    lo: int
    hi: int
    kstar: Optional[int]  # rank of the heaviest key, None when R has no key
    holes: tuple  # light-hole ranks, ascending


def _sig_of_sorted(ranks, instance):
    # ranks must be nonempty, sorted ascending, duplicate-free.
    wr = instance.weight_rank
    is_key = instance.is_key
    kstar = None
    best = -1
    for q in ranks:
        if is_key[q] and wr[q] > best:
            best = wr[q]
            kstar = q
    lo, hi = ranks[0], ranks[-1]
    holes = []
    if kstar is not None and hi - lo + 1 > len(ranks):
        pos = 0
        for q in range(lo, hi + 1):
            if pos < len(ranks) and ranks[pos] == q:
                pos += 1
            elif wr[q] < best:
                holes.append(q)
    return Signature(lo, hi, kstar, tuple(holes))


def signature_of(R, instance):
    """tau(R) for a nonempty query set (any iterable of ranks)."""
    ranks = sorted(set(R))
    if not ranks:
        raise ValueError("signature_of needs a nonempty set")
    if ranks[0] < 0 or ranks[-1] >= instance.n:
        raise ValueError("query rank out of range")
    return _sig_of_sorted(ranks, instance)


def canonicalize(t, instance):
    """Drop recorded holes that are not strictly lighter than k*.

    Such entries are redundant: tau-inverse already removes every interval
    key heavier than k*, so the canonical and raw signatures denote the
    same set.  Idempotent.
    """
    if not t.holes:
        return t
    if t.kstar is None:
        return t._replace(holes=())
    wr = instance.weight_rank
    wk = wr[t.kstar]
    kept = tuple(sorted({h for h in t.holes if wr[h] < wk}))
    return t if kept == t.holes else t._replace(holes=kept)


def set_of_signature(t, instance):
    """tau-inverse: the unique candidate set for signature *t*, or None.

    Builds [lo, hi] minus the interval keys heavier than k* minus the
    recorded holes, then accepts only if the result is nonempty and its
    own signature round-trips to canonicalize(t).
    """
    n = instance.n
    if not (0 <= t.lo <= t.hi < n):
        return None
    if t.kstar is not None and not (0 <= t.kstar < n):
        return None
    if any(not (0 <= h < n) for h in t.holes):
        return None
    tc = canonicalize(t, instance)
    wr = instance.weight_rank
    is_key = instance.is_key
    wk = wr[tc.kstar] if tc.kstar is not None else -1
    holes = set(tc.holes)
    out = [
        q
        for q in range(tc.lo, tc.hi + 1)
        if not (is_key[q] and wr[q] > wk) and q not in holes
    ]
    if not out or out[0] != tc.lo or out[-1] != tc.hi:
        return None
    if _sig_of_sorted(out, instance) != tc:
        return None
    return tuple(out)


def _heaviest(ranks, wr, b):
    """The b heaviest ranks of *ranks* (all of them when b >= len)."""
    return sorted(ranks, key=lambda q: wr[q], reverse=True)[:b]


def is_admissible(R, instance):
    """Admissibility of a query set, with a witness for the light holes.

    Returns ``(True, None)`` when the light-hole set is empty,
    ``(True, (b, class_id))`` when it equals the b heaviest eligible keys
    outside that class, and ``(False, None)`` otherwise.
    """
    ranks = tuple(sorted(set(R)))
    if not ranks:
        return False, None
    t = _sig_of_sorted(ranks, instance)
    if len(t.holes) > 3:
        return False, None
    if set_of_signature(t, instance) != ranks:
        return False, None
    if not t.holes:
        return True, None
    wr = instance.weight_rank
    k = t.kstar
    wk = wr[k]
    holes = set(t.holes)
    for ci in instance.classes_of[k]:
        cid, members = instance.classes[ci]
        eligible = [
            q
            for q in instance.key_ranks
            if t.lo <= q <= t.hi and wr[q] < wk and q not in members
        ]
        for b in (1, 2, 3):
            if set(_heaviest(eligible, wr, b)) == holes:
                return True, (b, cid)
    return False, None


@dataclass
class SubproblemRecord:
    """Read-only view of one dictionary entry."""

    signature: Signature
    is_leaf: bool
    witness_class: Optional[str]
    cost: Optional[int]  # None while unsolved, math.inf when infeasible
    best_test: Optional[object]


class AdmissibleDictionary:
    """All admissible sets of an instance, keyed by packed signature.

    Parallel lists hold per-record state: ``memo`` (cost, or UNSOLVED /
    INFEASIBLE sentinels), ``best`` (packed argmin test: rank*2, +1 for
    equality; -1 when none), and ``leaf_witness`` (class index, -1 when
    the set fits no class).  One solve() call owns a dictionary
    exclusively; the finished structure is read-shareable.
    """

    def __init__(self, instance, max_records=None):
        self.instance = instance
        self.base = instance.n + 1
        self.max_records = DEFAULT_MAX_RECORDS if max_records is None else max_records
        self._index = {}
        self.packed = []
        self.memo = []
        self.best = []
        self.leaf_witness = []
        self.pass1_count = 0
        self.pass2_count = 0

    def __len__(self):
        return len(self.packed)

    def pack(self, lo, hi, kk, holes):
        # kk is kstar+1 with 0 for "no key"; holes ascending, padded with 0.
        B = self.base
        key = ((lo * B + hi) * B + kk) * B + (holes[0] + 1 if len(holes) > 0 else 0)
        key = key * B + (holes[1] + 1 if len(holes) > 1 else 0)
        return key * B + (holes[2] + 1 if len(holes) > 2 else 0)

    def unpack(self, key):
        B = self.base
        key, s3 = divmod(key, B)
        key, s2 = divmod(key, B)
        key, s1 = divmod(key, B)
        key, kk = divmod(key, B)
        lo, hi = divmod(key, B)
        holes = tuple(s - 1 for s in (s1, s2, s3) if s)
        return Signature(lo, hi, kk - 1 if kk else None, holes)

    def _add(self, key):
        if key not in self._index:
            if len(self.packed) >= self.max_records:
                raise ResourceLimitError(
                    f"subproblem dictionary exceeds {self.max_records} records"
                )
            self._index[key] = len(self.packed)
            self.packed.append(key)
            self.memo.append(UNSOLVED)
            self.best.append(-1)
            self.leaf_witness.append(-1)
            return True
        return False

    def index_of(self, t):
        """Record index for a Signature (canonicalized first), or -1."""
        t = canonicalize(t, self.instance)
        if len(t.holes) > 3:
            return -1
        kk = 0 if t.kstar is None else t.kstar + 1
        return self._index.get(self.pack(t.lo, t.hi, kk, t.holes), -1)

    def __contains__(self, t):
        return self.index_of(t) >= 0

    def signature_at(self, idx):
        return self.unpack(self.packed[idx])

    def signatures(self):
        return [self.unpack(key) for key in self.packed]

    def record(self, t):
        """SubproblemRecord view for a signature, or None."""
        from .solver import _unpack_test  # local: avoid import cycle

        idx = self.index_of(t)
        if idx < 0:
            return None
        memo = self.memo[idx]
        if memo == UNSOLVED:
            cost = None
        elif memo == INFEASIBLE:
            cost = float("inf")
        else:
            cost = memo
        wit = self.leaf_witness[idx]
        return SubproblemRecord(
            signature=self.signature_at(idx),
            is_leaf=wit >= 0,
            witness_class=self.instance.classes[wit][0] if wit >= 0 else None,
            cost=cost,
            best_test=_unpack_test(self.best[idx]),
        )


def enumerate_admissible(instance, include_light_holes=True, max_records=None):
    """Build the dictionary of every admissible set's signature.

    Pass 1 enumerates empty-light-hole signatures (lo, hi, k): valid
    exactly when k lies in [lo, hi] (or is None with no constraint) and
    neither endpoint is a key heavier than k.  Pass 2 ranges over
    (lo, hi, k, b, class containing k) and records the b heaviest interval
    keys lighter than k outside the class as the light holes, with the
    same endpoint rule plus "no endpoint may be a hole".  Both passes
    apply validity tests in O(1) per tuple, so the build is output- plus
    O(n^2 + n*m)-bounded.  ``include_light_holes=False`` stops after
    pass 1 (the restricted solve mode).
    """
    n = instance.n
    wr = instance.weight_rank
    is_key = instance.is_key
    d = AdmissibleDictionary(instance, max_records=max_records)
    B = d.base

    # Pass 1: k ranges over keys; valid (lo, hi) are exactly the pairs of
    # eligible endpoints on each side of k.
    for k in instance.key_ranks:
        wk = wr[k]
        kk = k + 1
        los = [q for q in range(k + 1) if not is_key[q] or wr[q] <= wk]
        his = [q for q in range(k, n) if not is_key[q] or wr[q] <= wk]
        for lo in los:
            for hi in his:
                d._add(((lo * B + hi) * B + kk) * B * B * B)
    # k = None: the set is every non-key in [lo, hi]; endpoints non-key.
    nonkeys = [q for q in range(n) if not is_key[q]]
    for i, lo in enumerate(nonkeys):
        for hi in nonkeys[i:]:
            d._add(((lo * B + hi) * B + 0) * B * B * B)
    d.pass1_count = len(d)

    if include_light_holes:
        for cid, members in instance.classes:
            for k in sorted(members):
                if not is_key[k]:
                    continue
                wk = wr[k]
                kk = k + 1
                for lo in range(k + 1):
                    if is_key[lo] and wr[lo] > wk:
                        continue
                    top = []  # up to 3 (weight rank, rank), heaviest first
                    for hi in range(lo, n):
                        if is_key[hi] and wr[hi] < wk and hi not in members:
                            if len(top) < 3 or wr[hi] > top[-1][0]:
                                top.append((wr[hi], hi))
                                top.sort(reverse=True)
                                del top[3:]
                        if hi < k:
                            continue
                        if is_key[hi] and wr[hi] > wk:
                            continue
                        for b in range(1, len(top) + 1):
                            picked = top[:b]
                            if any(q == lo or q == hi for _, q in picked):
                                continue
                            holes = sorted(q for _, q in picked)
                            d._add(d.pack(lo, hi, kk, holes))
        d.pass2_count = len(d) - d.pass1_count
    return d


def identify_leaves(d, instance):
    """Mark every record whose set fits inside a class; leaves cost 0.

    Records sharing a triple (lo, hi, k) differ only in their light holes
    H, and R = R0 \\ H where R0 is the triple's hole-free set.  R fits in
    class c exactly when R0 \\ c is a subset of H, so for each triple we
    list the small differences R0 \\ c (only classes containing lo
    qualify, and only differences of size <= 3 can match) and probe every
    subset of each record's holes against that list.
    """
    groups = {}
    for idx, key in enumerate(d.packed):
        t = d.signature_at(idx)
        groups.setdefault((t.lo, t.hi, t.kstar), []).append((idx, t.holes))
    for (lo, hi, kstar), rows in groups.items():
        r0 = set_of_signature(Signature(lo, hi, kstar, ()), instance)
        diffs = {}
        for ci in instance.classes_of[lo]:
            members = instance.classes[ci][1]
            diff = []
            for q in r0:
                if q not in members:
                    diff.append(q)
                    if len(diff) > 3:
                        break
            else:
                diffs.setdefault(tuple(diff), ci)
        if not diffs:
            continue
        for idx, holes in rows:
            for size in range(len(holes) + 1):
                hit = None
                for sub in itertools.combinations(holes, size):
                    if sub in diffs:
                        hit = diffs[sub]
                        break
                if hit is not None:
                    d.leaf_witness[idx] = hit
                    d.memo[idx] = 0
                    break
    return d
