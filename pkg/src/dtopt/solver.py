"""Exact solver: memoized recurrence over the admissible-set dictionary.

The minimum cost of a tree answering a query set R is 0 when R fits one
class, and otherwise w(R) plus the best sum of the two sides' costs over
all allowed tests whose sides are both admissible.  Each subproblem body
runs in amortized O(n): one sweep produces every less-than split's
prefix/suffix signatures (stage 1), and each equality split's no-side
signature is an O(1) hole insertion except for the at-most-three keys
(min, max, k*) that need a rescan (stage 2).
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .errors import CostOverflowError, ValidationError
from .model import EQUAL, INT64_MAX, LESS, Instance, Internal, Leaf, Test
from .signatures import (
    DEFAULT_MAX_RECORDS,
    INFEASIBLE,
    UNSOLVED,
    Signature,
    _sig_of_sorted,
    enumerate_admissible,
    identify_leaves,
    signature_of,
)

INF = math.inf

MAX_RECORDS_ENV = "DTOPT_MAX_RECORDS"


class SolveMode(str, Enum):
    FULL = "full"
    HEAVIEST_FIRST_ONLY = "heaviest_first_only"


def _as_mode(mode):
    if isinstance(mode, SolveMode):
        return mode
    if mode in ("full", None):
        return SolveMode.FULL
    if mode in ("hf", "heaviest_first_only"):
        return SolveMode.HEAVIEST_FIRST_ONLY
    raise ValueError(f"unknown solve mode {mode!r}")


@dataclass
class SolveStats:
    subproblems: int = 0
    dict_size: int = 0
    stage1_tests: int = 0
    stage2_tests: int = 0
    wall_ms: float = 0.0
    canonical_drops: int = 0
    max_candidates: int = 0


@dataclass
class SolveResult:
    status: str  # "optimal" or "infeasible"
    cost: Optional[int]
    tree: Optional[object]
    stats: SolveStats = field(default_factory=SolveStats)


def _pack_test(test):
    return test.key * 2 + (1 if test.kind == EQUAL else 0)


def _unpack_test(code):
    if code < 0:
        return None
    return Test(EQUAL if code & 1 else LESS, code >> 1)


def _canon_count(lo, hi, kstar, holes, wr, stats):
    # Canonical form of a sweep-produced signature; a prefix/suffix k* can
    # be lighter than the parent's, demoting recorded holes to heavy.
    if not holes:
        return Signature(lo, hi, kstar, ())
    if kstar is None:
        kept = ()
    else:
        wk = wr[kstar]
        kept = tuple(h for h in holes if wr[h] < wk)
    if stats is not None and len(kept) != len(holes):
        stats.canonical_drops += 1
    return Signature(lo, hi, kstar, kept)


def stage1_less_splits(R, t, instance, stats=None):
    """Candidate less-than splits of R, with both sides' signatures.

    Emits one candidate per key h with min R < h <= max R (those are
    exactly the legal less-than tests splitting R into two nonempty
    sides).  Prefix and suffix k* come from two linear sweeps; hole
    prefixes are cut from t's hole list; results are canonicalized.
    """
    j = len(R)
    wr = instance.weight_rank
    is_key = instance.is_key
    holes = t.holes

    # pk[i] = k* of R[:i]; sk[i] = k* of R[i:].
    pk = [None] * (j + 1)
    best, cur = -1, None
    for i in range(1, j):
        q = R[i - 1]
        if is_key[q] and wr[q] > best:
            best, cur = wr[q], q
        pk[i] = cur
    sk = [None] * (j + 1)
    best, cur = -1, None
    for i in range(j - 1, 0, -1):
        q = R[i]
        if is_key[q] and wr[q] > best:
            best, cur = wr[q], q
        sk[i] = cur

    out = []
    keys = instance.key_ranks
    lo, hi = R[0], R[-1]
    i = 0
    cached_i = -1
    ys = ns = None
    for h in keys:
        if h <= lo:
            continue
        if h > hi:
            break
        while i < j and R[i] < h:
            i += 1
        if i >= j:
            break
        if i != cached_i:
            qi = R[i - 1]
            pre = tuple(x for x in holes if x < qi)
            suf = tuple(x for x in holes if x > R[i])
            ys = _canon_count(R[0], qi, pk[i], pre, wr, stats)
            ns = _canon_count(R[i], R[-1], sk[i], suf, wr, stats)
            cached_i = i
        out.append((Test(LESS, h), ys, ns))
    if stats is not None:
        stats.stage1_tests += len(out)
    return out


def stage2_eq_splits(R, t, instance, stats=None):
    """Candidate equality splits of R: one per key h in R.

    The yes side {h} always has signature (h, h, h, ()).  The no side
    keeps t's triple with h merged into the light holes — h is a key of R
    other than k*, hence strictly lighter — unless h is the minimum,
    maximum, or k*, in which case R \\ {h} is rescanned.  A merged hole
    list of size 4 is emitted as-is; it can never be admissible, so the
    caller skips it without a dictionary probe.
    """
    is_key = instance.is_key
    lo, hi, kstar, holes = t
    out = []
    if len(R) < 2:
        return out  # an equality split of a singleton leaves an empty side
    for h in R:
        if not is_key[h]:
            continue
        ys = Signature(h, h, h, ())
        if h == lo or h == hi or h == kstar:
            ns = _sig_of_sorted([q for q in R if q != h], instance)
        else:
            ns = Signature(lo, hi, kstar, tuple(sorted(holes + (h,))))
        out.append((Test(EQUAL, h), ys, ns))
    if stats is not None:
        stats.stage2_tests += len(out)
    return out


def _resolved_candidates(R, t, d, instance, hf, stats):
    """Fused, allocation-light replica of the two stages.

    Emits (packed test, yes index, no index) with signatures built
    directly in packed form and probed against the dictionary, skipping
    candidates with an inadmissible side.  Must produce exactly the
    surviving candidates of stage1_less_splits + stage2_eq_splits —
    that agreement is property-tested.
    """
    wr = instance.weight_rank
    is_key = instance.is_key
    index = d._index
    B = d.base
    B3 = B * B * B
    lo, hi, kstar, holes = t
    j = len(R)
    out = []
    cand_count = 0
    s1 = s2 = 0

    if j > 1:
        # pk/sk sweeps: weight rank and rank of the prefix/suffix k*.
        pkw = [-1] * j
        pkr = [0] * j
        bw, br = -1, 0
        for i in range(1, j):
            q = R[i - 1]
            if is_key[q] and wr[q] > bw:
                bw, br = wr[q], q
            pkw[i] = bw
            pkr[i] = br
        skw = [-1] * j
        skr = [0] * j
        bw, br = -1, 0
        for i in range(j - 1, 0, -1):
            q = R[i]
            if is_key[q] and wr[q] > bw:
                bw, br = wr[q], q
            skw[i] = bw
            skr[i] = br

        i = 0
        cached_i = -1
        yi = ni = -1
        ok = False
        for h in instance.key_ranks:
            if h <= lo:
                continue
            if h > hi:
                break
            while i < j and R[i] < h:
                i += 1
            if i >= j:
                break
            if i != cached_i:
                cached_i = i
                qi = R[i - 1]
                qn = R[i]
                pw = pkw[i]
                ya = yb = yc = 0
                cnt = raw = 0
                for x in holes:
                    if x >= qi:
                        break
                    raw += 1
                    if wr[x] < pw:
                        if cnt == 0:
                            ya = x + 1
                        elif cnt == 1:
                            yb = x + 1
                        else:
                            yc = x + 1
                        cnt += 1
                if stats is not None and cnt != raw:
                    stats.canonical_drops += 1
                ykk = pkr[i] + 1 if pw >= 0 else 0
                yi = index.get(
                    (((lo * B + qi) * B + ykk) * B + ya) * B * B + yb * B + yc, -1
                )
                ycnt = cnt
                sw = skw[i]
                na = nb = nc = 0
                cnt = raw = 0
                for x in holes:
                    if x <= qn:
                        continue
                    raw += 1
                    if wr[x] < sw:
                        if cnt == 0:
                            na = x + 1
                        elif cnt == 1:
                            nb = x + 1
                        else:
                            nc = x + 1
                        cnt += 1
                if stats is not None and cnt != raw:
                    stats.canonical_drops += 1
                nkk = skr[i] + 1 if sw >= 0 else 0
                ni = index.get(
                    (((qn * B + hi) * B + nkk) * B + na) * B * B + nb * B + nc, -1
                )
                ok = yi >= 0 and ni >= 0 and not (hf and (ycnt or cnt))
            cand_count += 1
            if ok:
                out.append((h * 2, yi, ni))
        s1 = cand_count

        kk = 0 if kstar is None else kstar + 1
        base_code = ((lo * B + hi) * B + kk) * B
        nholes = len(holes)
        for h in R:
            if not is_key[h]:
                continue
            cand_count += 1
            yi = index.get(((h * B + h) * B + h + 1) * B3, -1)
            if yi < 0:
                continue
            if h == lo or h == hi or h == kstar:
                ns = _sig_of_sorted([q for q in R if q != h], instance)
                if hf and ns.holes:
                    continue
                ni = d.index_of(ns)
            elif hf or nholes >= 3:
                continue  # merged hole list: never admissible past 3
            else:
                ha = hb = hc = 0
                cnt = 0
                placed = False
                for x in holes:
                    if not placed and h < x:
                        placed = True
                        if cnt == 0:
                            ha = h + 1
                        elif cnt == 1:
                            hb = h + 1
                        else:
                            hc = h + 1
                        cnt += 1
                    if cnt == 0:
                        ha = x + 1
                    elif cnt == 1:
                        hb = x + 1
                    else:
                        hc = x + 1
                    cnt += 1
                if not placed:
                    if cnt == 0:
                        ha = h + 1
                    elif cnt == 1:
                        hb = h + 1
                    else:
                        hc = h + 1
                ni = index.get((base_code + ha) * B * B + hb * B + hc, -1)
            if ni >= 0:
                out.append((h * 2 + 1, yi, ni))
        s2 = cand_count - s1

    if stats is not None:
        stats.stage1_tests += s1
        stats.stage2_tests += s2
        if cand_count > stats.max_candidates:
            stats.max_candidates = cand_count
    return out


def _set_for_record(t, instance):
    # Direct tau-inverse for signatures that came out of the dictionary;
    # skips the round-trip validation that set_of_signature performs.
    wr = instance.weight_rank
    is_key = instance.is_key
    wk = wr[t.kstar] if t.kstar is not None else -1
    if t.holes:
        hs = set(t.holes)
        return [
            q
            for q in range(t.lo, t.hi + 1)
            if not (is_key[q] and wr[q] > wk) and q not in hs
        ]
    return [q for q in range(t.lo, t.hi + 1) if not (is_key[q] and wr[q] > wk)]


def cost_of(t, d, instance, mode=SolveMode.FULL, stats=None):
    """Memoized minimum cost for the set with signature *t*.

    Infinity when the (canonicalized) signature has no record or the mode
    excludes it; 0 for leaf records; otherwise w(R) plus the best
    candidate split, with the argmin test recorded for reconstruction.
    Ties break toward lower cost, then less-than before equality, then
    the smaller key.  Evaluation uses an explicit work stack (children
    are strictly smaller sets, so dependencies are acyclic) and mutates
    the dictionary's memo: a dictionary belongs to one (instance, mode)
    pair.
    """
    mode = _as_mode(mode)
    idx = d.index_of(t)
    if idx < 0:
        return INF
    tc = d.signature_at(idx)
    hf = mode is SolveMode.HEAVIEST_FIRST_ONLY
    if hf and tc.holes:
        return INF
    _evaluate(idx, d, instance, hf, stats)
    memo = d.memo[idx]
    return INF if memo == INFEASIBLE else memo


def _evaluate(root_idx, d, instance, hf, stats):
    memo = d.memo
    best = d.best
    weights = instance.weights
    if memo[root_idx] != UNSOLVED:
        return
    pending = {}
    stack = [root_idx]
    while stack:
        idx = stack[-1]
        if memo[idx] != UNSOLVED:
            stack.pop()
            continue
        frame = pending.get(idx)
        if frame is None:
            t = d.signature_at(idx)
            R = _set_for_record(t, instance)
            w_r = 0
            for q in R:
                w_r += weights[q]
            resolved = _resolved_candidates(R, t, d, instance, hf, stats)
            grow = False
            for _, yi, ni in resolved:
                if memo[yi] == UNSOLVED:
                    stack.append(yi)
                    grow = True
                if memo[ni] == UNSOLVED:
                    stack.append(ni)
                    grow = True
            pending[idx] = (w_r, resolved)
            if grow:
                continue
            frame = pending[idx]
        w_r, resolved = frame
        best_cost = INF
        best_code = -1
        for code, yi, ni in resolved:
            cy = memo[yi]
            if cy < 0:
                if cy == UNSOLVED:
                    raise RuntimeError("child subproblem left unsolved")
                continue
            cn = memo[ni]
            if cn < 0:
                if cn == UNSOLVED:
                    raise RuntimeError("child subproblem left unsolved")
                continue
            total = cy + cn
            if total < best_cost:
                best_cost = total
                best_code = code
        if best_code < 0:
            memo[idx] = INFEASIBLE
        else:
            total = w_r + best_cost
            if total > INT64_MAX:
                raise CostOverflowError("subproblem cost exceeds the 64-bit range")
            memo[idx] = total
            best[idx] = best_code
        if stats is not None:
            stats.subproblems += 1
        del pending[idx]
        stack.pop()


def _build_tree(d, instance, root_sig):
    """Reconstruct the optimal tree from recorded argmin tests."""
    root_idx = d.index_of(root_sig)
    class_ids = [cid for cid, _ in instance.classes]
    work = [(root_idx, False, None)]
    out = []
    while work:
        idx, combine, test = work.pop()
        if combine:
            no = out.pop()
            yes = out.pop()
            out.append(Internal(test, yes, no))
            continue
        code = d.best[idx]
        if code < 0:
            out.append(Leaf(class_ids[d.leaf_witness[idx]]))
            continue
        test = _unpack_test(code)
        t = d.signature_at(idx)
        R = _set_for_record(t, instance)
        if test.kind == LESS:
            yes_set = [q for q in R if q < test.key]
            no_set = [q for q in R if q >= test.key]
        else:
            yes_set = [test.key]
            no_set = [q for q in R if q != test.key]
        yi = d.index_of(_sig_of_sorted(yes_set, instance))
        ni = d.index_of(_sig_of_sorted(no_set, instance))
        work.append((idx, True, test))
        work.append((ni, False, None))
        work.append((yi, False, None))
    return out[0]


def _record_cap(max_records):
    if max_records is not None:
        return max_records
    raw = os.environ.get(MAX_RECORDS_ENV)
    if raw is None:
        return DEFAULT_MAX_RECORDS
    try:
        return int(raw)
    except ValueError:
        raise ValidationError(f"{MAX_RECORDS_ENV} must be an integer, got {raw!r}")


def solve(instance, mode=SolveMode.FULL, max_records=None):
    """Minimum-cost decision tree for the instance.

    In full mode the returned cost is the global optimum over all correct
    trees.  The restricted mode explores only signatures without light
    holes, modelling the heaviest-first tree family; its cost is an upper
    bound of the full one.  The dictionary size is capped by
    *max_records*, defaulting to the DTOPT_MAX_RECORDS environment
    variable or 50 million.
    """
    mode = _as_mode(mode)
    start = time.perf_counter()
    d = enumerate_admissible(
        instance,
        include_light_holes=mode is SolveMode.FULL,
        max_records=_record_cap(max_records),
    )
    identify_leaves(d, instance)
    stats = SolveStats(dict_size=len(d))
    root = signature_of(range(instance.n), instance)
    cost = cost_of(root, d, instance, mode, stats)
    if cost == INF:
        stats.wall_ms = (time.perf_counter() - start) * 1000.0
        return SolveResult("infeasible", None, None, stats)
    tree = _build_tree(d, instance, root)
    stats.wall_ms = (time.perf_counter() - start) * 1000.0
    return SolveResult("optimal", int(cost), tree, stats)


def greedy_baseline(instance):
    """Balanced-weight greedy heuristic, for benchmark comparison only.

    At each set it takes the allowed test minimizing |w(yes) - w(no)|
    (ties: less-than first, then smaller key), so its cost is an upper
    bound on the optimum.  Feasible instances never get stuck: a set not
    inside any class always spans a key it can cut at.
    """
    start = time.perf_counter()
    weights = instance.weights
    is_key = instance.is_key
    keys = instance.key_ranks

    def leaf_for(ranks):
        rset = set(ranks)
        for cid, members in instance.classes:
            if rset <= members:
                return cid
        return None

    def build(ranks):
        cid = leaf_for(ranks)
        if cid is not None:
            return Leaf(cid)
        lo, hi = ranks[0], ranks[-1]
        best = None
        best_gap = None
        total = sum(weights[q] for q in ranks)
        for h in keys:
            if lo < h <= hi:
                wy = sum(weights[q] for q in ranks if q < h)
                gap = abs(total - 2 * wy)
                if best_gap is None or gap < best_gap:
                    best, best_gap = Test(LESS, h), gap
        if len(ranks) >= 2:
            for h in ranks:
                if is_key[h]:
                    gap = abs(total - 2 * weights[h])
                    if best_gap is None or gap < best_gap:
                        best, best_gap = Test(EQUAL, h), gap
        if best is None:
            return None
        if best.kind == LESS:
            yes = [q for q in ranks if q < best.key]
            no = [q for q in ranks if q >= best.key]
        else:
            yes = [best.key]
            no = [q for q in ranks if q != best.key]
        left = build(yes)
        right = build(no)
        if left is None or right is None:
            return None
        return Internal(best, left, right)

    tree = build(list(range(instance.n)))
    stats = SolveStats(wall_ms=(time.perf_counter() - start) * 1000.0)
    if tree is None:
        return SolveResult("infeasible", None, None, stats)
    from .model import tree_cost

    return SolveResult("optimal", tree_cost(tree, instance), tree, stats)
