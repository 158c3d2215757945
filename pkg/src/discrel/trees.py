"""Minimal reader for bracketed (Penn-style) constituency trees."""

import re
from dataclasses import dataclass, field

from .errors import TreeParseError

_TOKEN_RE = re.compile(r"\(|\)|[^\s()]+")


@dataclass
class Node:
    label: str
    children: list = field(default_factory=list)  # Node or str (leaf word)

    def is_preterminal(self):
        return len(self.children) == 1 and isinstance(self.children[0], str)

    def leaves(self):
        out = []
        for child in self.children:
            if isinstance(child, str):
                out.append(child)
            else:
                out.extend(child.leaves())
        return out

    def internal_nodes(self):
        """Pre-order traversal over all non-leaf nodes."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            for child in reversed(node.children):
                if isinstance(child, Node):
                    stack.append(child)


def parse_tree(text, instance_id=None):
    """Parse a bracketed tree string such as ``(S (NP (NN he)) (VP (VBD ran)))``.

    An outer wrapper with an empty label (``( (S ...))``, as in the
    treebank files) is kept as a node with label ``""``.
    """
    tokens = _TOKEN_RE.findall(text)
    if not tokens:
        raise TreeParseError("empty tree", instance_id)
    pos = 0

    def parse_node():
        nonlocal pos
        if tokens[pos] != "(":
            raise TreeParseError(f"expected '(' at token {pos}, got {tokens[pos]!r}", instance_id)
        pos += 1
        if pos >= len(tokens):
            raise TreeParseError("unbalanced brackets: input ends after '('", instance_id)
        label = ""
        if tokens[pos] not in ("(", ")"):
            label = tokens[pos]
            pos += 1
        node = Node(label)
        while True:
            if pos >= len(tokens):
                raise TreeParseError("unbalanced brackets: missing ')'", instance_id)
            tok = tokens[pos]
            if tok == ")":
                pos += 1
                break
            if tok == "(":
                node.children.append(parse_node())
            else:
                node.children.append(tok)
                pos += 1
        if not node.children:
            raise TreeParseError(f"node {label!r} has no children", instance_id)
        return node

    root = parse_node()
    if pos != len(tokens):
        raise TreeParseError("unbalanced brackets: trailing material after root", instance_id)
    return root
