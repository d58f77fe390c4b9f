"""Text formats: instance files, tree s-expressions, and DOT export.

Instance files are line-oriented::

    2wcdt 1
    # comment
    query <value> <weight> <0|1>     (strictly increasing values)
    class <id> <value> <value> ...

Trees are parenthesized, written with query *values* (not ranks)::

    (= 2 (leaf B) (< 2 (leaf A) (leaf A)))

Both formats round-trip exactly through print/parse.
"""

from __future__ import annotations

from .errors import MalformedTreeError, ParseError
from .model import (
    EQUAL,
    LESS,
    Instance,
    Internal,
    Leaf,
    Test,
    _yes_mask,
)

MAGIC = "2wcdt 1"


def parse_instance(text: str) -> Instance:
    """Parse instance-file text.  Raises ParseError (with a line number)
    for malformed lines, ValidationError for semantic problems."""
    values: list[int] = []
    weights: list[int] = []
    is_key: list[bool] = []
    classes: list[tuple[str, tuple[int, ...]]] = []
    saw_magic = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not saw_magic:
            if line != MAGIC:
                raise ParseError(f"expected header {MAGIC!r}", line=lineno)
            saw_magic = True
            continue
        fields = line.split()
        kind = fields[0]
        if kind == "query":
            if len(fields) != 4:
                raise ParseError("query line needs: value weight key-flag", line=lineno)
            try:
                value, weight = int(fields[1]), int(fields[2])
            except ValueError:
                raise ParseError(f"bad integer in {line!r}", line=lineno) from None
            if fields[3] not in ("0", "1"):
                raise ParseError("key flag must be 0 or 1", line=lineno)
            values.append(value)
            weights.append(weight)
            is_key.append(fields[3] == "1")
        elif kind == "class":
            if len(fields) < 2:
                raise ParseError("class line needs an identifier", line=lineno)
            try:
                members = tuple(int(v) for v in fields[2:])
            except ValueError:
                raise ParseError(f"bad integer in {line!r}", line=lineno) from None
            classes.append((fields[1], members))
        else:
            raise ParseError(f"unknown directive {kind!r}", line=lineno)

    if not saw_magic:
        raise ParseError(f"missing header {MAGIC!r}", line=1)
    return Instance(values, weights, is_key, classes)


def print_instance(instance: Instance) -> str:
    """Canonical text for an instance (parse∘print is the identity)."""
    lines = [MAGIC]
    for q in range(instance.n):
        key = 1 if instance.is_key[q] else 0
        lines.append(f"query {instance.values[q]} {instance.weights[q]} {key}")
    for cid, members in instance.classes:
        vals = " ".join(str(instance.values[q]) for q in sorted(members))
        lines.append(f"class {cid} {vals}".rstrip())
    return "\n".join(lines) + "\n"


def _tokenize_tree(text: str):
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "()":
            tokens.append((ch, i))
            i += 1
        else:
            j = i
            while j < len(text) and not text[j].isspace() and text[j] not in "()":
                j += 1
            tokens.append((text[i:j], i))
            i = j
    return tokens


def parse_tree(text: str, instance: Instance):
    """Parse an s-expression tree.  Key atoms are query values and are
    translated to ranks; unknown values or bad shape raise
    MalformedTreeError."""
    tokens = _tokenize_tree(text)
    pos = 0

    def fail(msg, at=None):
        where = f" at offset {at}" if at is not None else ""
        raise MalformedTreeError(f"{msg}{where}")

    def expect(tok):
        nonlocal pos
        if pos >= len(tokens) or tokens[pos][0] != tok:
            at = tokens[pos][1] if pos < len(tokens) else len(text)
            fail(f"expected {tok!r}", at)
        pos += 1

    def atom():
        nonlocal pos
        if pos >= len(tokens) or tokens[pos][0] in "()":
            at = tokens[pos][1] if pos < len(tokens) else len(text)
            fail("expected an atom", at)
        tok, _ = tokens[pos]
        pos += 1
        return tok

    def node():
        expect("(")
        head = atom()
        if head == "leaf":
            out = Leaf(atom())
        elif head in (LESS, EQUAL):
            raw = atom()
            try:
                value = int(raw)
            except ValueError:
                fail(f"key {raw!r} is not an integer")
            rank = instance.value_to_rank.get(value)
            if rank is None:
                fail(f"key value {value} is not a query of this instance")
            out = Internal(Test(head, rank), node(), node())
        else:
            fail(f"unknown node kind {head!r}")
        expect(")")
        return out

    if not tokens:
        fail("empty input")
    tree = node()
    if pos != len(tokens):
        fail("trailing input", tokens[pos][1])
    return tree


def print_tree(tree, instance: Instance) -> str:
    """Single-line s-expression with query values."""
    parts: list[str] = []
    stack = [tree]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            parts.append(item)
        elif isinstance(item, Leaf):
            parts.append(f"(leaf {item.class_id})")
        else:
            value = instance.values[item.test.key]
            parts.append(f"({item.test.kind} {value}")
            stack.extend([")", item.no, item.yes])
    out = " ".join(parts)
    return out.replace(" )", ")")


def _dot_quote(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def to_dot(tree, instance: Instance) -> str:
    """Graphviz rendering: tests as ellipses, leaves as boxes listing the
    class and the query values that reach the leaf."""
    lines = ["digraph tree {"]
    edges: list[str] = []
    counter = 0
    full = (1 << instance.n) - 1

    def emit(node, mask):
        nonlocal counter
        name = f"n{counter}"
        counter += 1
        if isinstance(node, Leaf):
            vals = " ".join(
                str(instance.values[q]) for q in range(instance.n) if mask >> q & 1
            )
            label = _dot_quote(node.class_id) + "\\n" + vals
            lines.append(f'  {name} [shape=box, label="{label}"];')
        else:
            value = instance.values[node.test.key]
            label = _dot_quote(f"{node.test.kind} {value}")
            lines.append(f'  {name} [label="{label}"];')
            ymask = mask & _yes_mask(node.test, instance.n)
            yes_name = emit(node.yes, ymask)
            no_name = emit(node.no, mask & ~ymask)
            edges.append(f'  {name} -> {yes_name} [label="yes"];')
            edges.append(f'  {name} -> {no_name} [label="no"];')
        return name

    emit(tree, full)
    lines.extend(edges)
    lines.append("}")
    return "\n".join(lines) + "\n"
