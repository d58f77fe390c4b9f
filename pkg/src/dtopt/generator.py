"""Seeded random instance generation.

Three layouts:

* ``successful`` — every query is a key (n queries, K = Q);
* ``standard``   — n keys with one non-key query in every gap and at both
                   ends (2n+1 queries, flags 0,1,0,...,1,0);
* ``general``    — n queries, each a key with probability 1/2.

Classes are a random partition into up to ``classes`` groups; ``overlap``
is the probability that a query additionally joins a second group.  Empty
groups are dropped.  The same seed and parameters always produce the same
instance, byte for byte.  Note the general layout can produce infeasible
instances (a keyless stretch can straddle a class boundary); the other
two cannot.
"""

from __future__ import annotations

import random

from .errors import ValidationError
from .model import Instance

VARIANTS = ("successful", "standard", "general")


def _values(rng: random.Random, count: int) -> list[int]:
    out = [rng.randint(0, 9)]
    for _ in range(count - 1):
        out.append(out[-1] + rng.randint(1, 10))
    return out


def generate_instance(
    variant: str,
    n: int,
    seed: int,
    classes: int = 3,
    weight_max: int = 100,
    overlap: float = 0.0,
) -> Instance:
    """Random instance; ``n`` counts keys for the standard layout and
    queries otherwise."""
    if variant not in VARIANTS:
        raise ValidationError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if n < 1:
        raise ValidationError("n must be >= 1")
    if classes < 1:
        raise ValidationError("classes must be >= 1")
    if not 0.0 <= overlap <= 1.0:
        raise ValidationError("overlap must be in [0, 1]")
    if weight_max < 1:
        raise ValidationError("weight-max must be >= 1")

    rng = random.Random(seed)
    if variant == "successful":
        is_key = [True] * n
    elif variant == "standard":
        is_key = [i % 2 == 1 for i in range(2 * n + 1)]
    else:
        is_key = [rng.random() < 0.5 for _ in range(n)]
    count = len(is_key)

    values = _values(rng, count)
    weights = [rng.randint(1, weight_max) for _ in range(count)]

    membership = [[rng.randrange(classes)] for _ in range(count)]
    if classes > 1:
        for groups in membership:
            if rng.random() < overlap:
                extra = rng.randrange(classes - 1)
                if extra >= groups[0]:
                    extra += 1
                groups.append(extra)

    groups: list[list[int]] = [[] for _ in range(classes)]
    for q, mine in enumerate(membership):
        for g in mine:
            groups[g].append(values[q])
    class_spec = [
        (f"c{g}", tuple(members)) for g, members in enumerate(groups) if members
    ]
    return Instance(values, weights, is_key, class_spec)


def generate_search_instance(n: int, seed: int, weight_max: int = 100) -> Instance:
    """All-keys instance classified by identity: query i is its own class.

    The shape used for benchmarking — a pure search-tree problem.
    """
    if n < 1:
        raise ValidationError("n must be >= 1")
    rng = random.Random(seed)
    values = _values(rng, n)
    weights = [rng.randint(1, weight_max) for _ in range(n)]
    class_spec = [(f"c{i}", (values[i],)) for i in range(n)]
    return Instance(values, weights, [True] * n, class_spec)
