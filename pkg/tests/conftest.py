import random

from dtopt import LESS, Instance, Internal, Leaf, generate_instance


def abc_instance(weights=(1, 1, 1), keys=(True, True, True)):
    """Three values 1,2,3 with classes A={1,3}, B={2}."""
    return Instance([1, 2, 3], weights, keys, [("A", (1, 3)), ("B", (2,))])


def ladder_instance():
    """Q=[1..4], all keys, one class each (identity classification)."""
    return Instance(
        [1, 2, 3, 4],
        [1, 2, 3, 4],
        [True] * 4,
        [(f"c{i}", (v,)) for i, v in enumerate([1, 2, 3, 4])],
    )


def all_keys_one_class(values=(1, 2, 3, 4)):
    """Trivial single-class instance over all-keys values."""
    return Instance(values, [1] * len(values), [True] * len(values), [("c", values)])


def position_masks(tree, instance, start_mask):
    """List of (leaf object, mask of queries reaching that position)."""
    out, stack = [], [(tree, start_mask)]
    while stack:
        node, mask = stack.pop()
        if isinstance(node, Leaf):
            out.append((node, mask))
            continue
        k = node.test.key
        if node.test.kind == LESS:
            ymask = mask & ((1 << k) - 1)
        else:
            ymask = mask & (1 << k)
        stack.append((node.yes, ymask))
        stack.append((node.no, mask & ~ymask))
    return out


def subtree_mask(tree, instance, u):
    """Mask of queries reaching node u (located by identity)."""
    stack = [(tree, (1 << instance.n) - 1)]
    while stack:
        node, mask = stack.pop()
        if node is u:
            return mask
        if isinstance(node, Internal):
            k = node.test.key
            ymask = mask & ((1 << k) - 1) if node.test.kind == LESS else mask & (1 << k)
            stack.append((node.yes, ymask))
            stack.append((node.no, mask & ~ymask))
    raise AssertionError("u not found in tree")


def random_small(seed, max_keys=4):
    """A small random instance across all layouts, deterministic per seed."""
    rng = random.Random(seed)
    variant = rng.choice(["successful", "standard", "general"])
    n = rng.randint(1, max_keys if variant == "standard" else 2 * max_keys + 1)
    return generate_instance(
        variant,
        n,
        seed=rng.randrange(1 << 30),
        classes=rng.randint(1, 4),
        weight_max=rng.choice([1, 10, 100]),
        overlap=rng.choice([0.0, 0.3]),
    )
