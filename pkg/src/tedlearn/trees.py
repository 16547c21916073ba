"""Ordered labeled trees, their text form, and labeled datasets of trees.

Trees are written as ``label`` or ``label(child,child,...)``, e.g. ``a(b(a,b),a)``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

GAP = "-"
_SYMBOL_RE = re.compile(r"[A-Za-z0-9_]+")


class TreeSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class AlphabetError(ValueError):
    pass


class DatasetFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Alphabet:
    """Ordered symbol list; the gap is addressed as index ``len(symbols)``."""

    symbols: tuple[str, ...]

    def __post_init__(self):
        symbols = tuple(self.symbols)
        object.__setattr__(self, "symbols", symbols)
        if len(set(symbols)) != len(symbols):
            raise AlphabetError(f"duplicate symbols in {symbols}")
        for s in symbols:
            check_symbol(s)
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(symbols)})

    def __len__(self) -> int:
        return len(self.symbols)

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._index

    @property
    def gap(self) -> int:
        return len(self.symbols)

    @property
    def extended(self) -> tuple[str, ...]:
        return self.symbols + (GAP,)

    def index(self, symbol: str) -> int:
        if symbol == GAP:
            return self.gap
        try:
            return self._index[symbol]
        except KeyError:
            raise AlphabetError(f"unknown symbol {symbol!r}") from None


def check_symbol(name: str) -> None:
    if name == GAP:
        raise AlphabetError(f"{GAP!r} is reserved for the gap and cannot label a node")
    if not isinstance(name, str) or not _SYMBOL_RE.fullmatch(name):
        raise AlphabetError(f"invalid symbol {name!r}")


@dataclass(frozen=True)
class Tree:
    label: str
    children: tuple[Tree, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))

    @property
    def size(self) -> int:
        return 1 + sum(c.size for c in self.children)

    def preorder(self) -> Iterator[Tree]:
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def postorder(self) -> Iterator[Tree]:
        for c in self.children:
            yield from c.postorder()
        yield self

    def labels(self) -> list[str]:
        """Node labels in preorder."""
        return [n.label for n in self.preorder()]

    def __str__(self) -> str:
        return serialize_tree(self)


@dataclass
class Dataset:
    alphabet: Alphabet
    records: list[tuple[Tree, str]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def trees(self) -> list[Tree]:
        return [t for t, _ in self.records]

    @property
    def labels(self) -> list[str]:
        return [y for _, y in self.records]

    @property
    def classes(self) -> list[str]:
        seen: dict[str, None] = {}
        for y in self.labels:
            seen.setdefault(y)
        return list(seen)

    def subset(self, indices: Sequence[int]) -> Dataset:
        return Dataset(self.alphabet, [self.records[i] for i in indices])

    def to_json(self) -> str:
        doc = {
            "alphabet": list(self.alphabet.symbols),
            "records": [{"tree": serialize_tree(t), "label": y} for t, y in self.records],
        }
        return json.dumps(doc, indent=2)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")


def validate_tree(tree: Tree, alphabet: Alphabet) -> None:
    for node in tree.preorder():
        check_symbol(node.label)
        if node.label not in alphabet:
            raise AlphabetError(f"label {node.label!r} is not in the alphabet")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def label(self) -> str:
        self.skip()
        if self.text.startswith(GAP, self.pos):
            raise AlphabetError(
                f"{GAP!r} is reserved for the gap and cannot label a node "
                f"(position {self.pos})"
            )
        m = _SYMBOL_RE.match(self.text, self.pos)
        if m is None:
            raise TreeSyntaxError("expected a label", self.pos)
        self.pos = m.end()
        return m.group()

    def tree(self) -> Tree:
        label = self.label()
        if self.peek() != "(":
            return Tree(label)
        self.pos += 1
        children = [self.tree()]
        while self.peek() == ",":
            self.pos += 1
            children.append(self.tree())
        if self.peek() != ")":
            raise TreeSyntaxError("expected ',' or ')'", self.pos)
        self.pos += 1
        return Tree(label, tuple(children))


def parse_tree(text: str, alphabet: Alphabet | None = None) -> Tree:
    """Parse the bracket notation; with an alphabet, every label must belong to it."""
    parser = _Parser(text)
    tree = parser.tree()
    if parser.peek():
        raise TreeSyntaxError("trailing input", parser.pos)
    if alphabet is not None:
        validate_tree(tree, alphabet)
    return tree


def serialize_tree(tree: Tree) -> str:
    if not tree.children:
        return tree.label
    return tree.label + "(" + ",".join(serialize_tree(c) for c in tree.children) + ")"


def load_dataset(path: str | Path) -> Dataset:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(f"{path}: {exc}") from exc
    return dataset_from_dict(doc)


def dataset_from_dict(doc: dict) -> Dataset:
    if not isinstance(doc, dict) or "alphabet" not in doc or "records" not in doc:
        raise DatasetFormatError("dataset needs top-level keys 'alphabet' and 'records'")
    alphabet = Alphabet(tuple(doc["alphabet"]))
    records = []
    for k, rec in enumerate(doc["records"]):
        try:
            text, label = rec["tree"], str(rec["label"])
        except (TypeError, KeyError):
            raise DatasetFormatError(f"record {k} needs 'tree' and 'label'") from None
        records.append((parse_tree(text, alphabet), label))
    if not records:
        raise DatasetFormatError("dataset has no records")
    return Dataset(alphabet, records)


def random_tree(rng: np.random.Generator, symbols: Sequence[str], max_size: int) -> Tree:
    """Random ordered tree with 1..max_size nodes (uniform size, random attachment)."""
    size = int(rng.integers(1, max_size + 1))
    labels = [symbols[int(rng.integers(len(symbols)))] for _ in range(size)]
    kids: list[list[int]] = [[] for _ in range(size)]
    for node in range(1, size):
        kids[int(rng.integers(node))].append(node)

    def build(i: int) -> Tree:
        return Tree(labels[i], tuple(build(j) for j in kids[i]))

    return build(0)
