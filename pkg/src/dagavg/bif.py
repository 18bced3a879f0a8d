"""Parser for discrete Bayesian networks in BIF 0.15 text format.

Handles the common repository dialect: ``network``/``variable``/``probability``
blocks, ``//`` and ``/* */`` comments, ``property`` lines (skipped), root CPTs
via ``table`` and conditional CPTs via explicit ``(state, ...)`` rows.  Rows
are resolved by their parent-state tuples, never by file order.
"""

from __future__ import annotations

import gzip
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataset import Schema
from .errors import (
    ArityMismatchError,
    BifError,
    BifSyntaxError,
    MissingRowError,
    RowNotNormalizedError,
    UndeclaredVariableError,
    UnknownStateError,
)
from .graph import Dag
from .model import DiscreteBn

_PUNCT = set("{}()[],;|")


@dataclass(frozen=True)
class BifVariable:
    name: str
    states: tuple[str, ...]


@dataclass(frozen=True)
class BifProbability:
    target: str
    parents: tuple[str, ...]
    rows: dict[tuple[str, ...], tuple[float, ...]] = field(compare=False)


@dataclass(frozen=True)
class BifDocument:
    name: str
    variables: tuple[BifVariable, ...]
    probabilities: tuple[BifProbability, ...]

    def variable(self, name: str) -> BifVariable:
        for v in self.variables:
            if v.name == name:
                return v
        raise KeyError(name)


class _Token:
    __slots__ = ("text", "line", "column")

    def __init__(self, text, line, column):
        self.text = text
        self.line = line
        self.column = column


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
        elif c in " \t\r":
            i += 1
            col += 1
        elif c == "/" and text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
        elif c == "/" and text.startswith("/*", i):
            end = text.find("*/", i + 2)
            if end < 0:
                raise BifSyntaxError("unterminated block comment", line, col)
            skipped = text[i : end + 2]
            line += skipped.count("\n")
            col = (
                len(skipped) - skipped.rfind("\n") if "\n" in skipped else col + len(skipped)
            )
            i = end + 2
        elif c in _PUNCT:
            tokens.append(_Token(c, line, col))
            i += 1
            col += 1
        else:
            j = i
            while j < n and text[j] not in _PUNCT and not text[j].isspace() and not (
                text[j] == "/" and (text.startswith("//", j) or text.startswith("/*", j))
            ):
                j += 1
            tokens.append(_Token(text[i:j], line, col))
            col += j - i
            i = j
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self._tokens = tokens
        self._pos = 0

    def _peek(self) -> _Token | None:
        return self._tokens[self._pos] if self._pos < len(self._tokens) else None

    def _next(self, what: str = "token") -> _Token:
        tok = self._peek()
        if tok is None:
            last = self._tokens[-1] if self._tokens else _Token("", 1, 1)
            raise BifSyntaxError(f"unexpected end of input, expected {what}", last.line, last.column)
        self._pos += 1
        return tok

    def _expect(self, text: str) -> _Token:
        tok = self._next(repr(text))
        if tok.text != text:
            raise BifSyntaxError(f"expected {text!r}, found {tok.text!r}", tok.line, tok.column)
        return tok

    def _word(self, what: str = "identifier") -> _Token:
        tok = self._next(what)
        if tok.text in _PUNCT:
            raise BifSyntaxError(f"expected {what}, found {tok.text!r}", tok.line, tok.column)
        return tok

    def _number(self) -> float:
        tok = self._word("number")
        try:
            return float(tok.text)
        except ValueError:
            raise BifSyntaxError(f"expected number, found {tok.text!r}", tok.line, tok.column) from None

    def _skip_property(self) -> None:
        while True:
            tok = self._next("';' ending property")
            if tok.text == ";":
                return

    def parse(self) -> BifDocument:
        name = "unnamed"
        variables: list[BifVariable] = []
        probabilities: list[BifProbability] = []
        declared: dict[str, BifVariable] = {}
        seen_blocks: set[str] = set()
        while self._peek() is not None:
            tok = self._next("block keyword")
            if tok.text == "network":
                name = self._word("network name").text
                self._expect("{")
                while self._peek() is not None and self._peek().text != "}":
                    self._skip_property()
                self._expect("}")
            elif tok.text == "variable":
                var = self._variable_block()
                if var.name in declared:
                    raise BifSyntaxError(f"variable {var.name!r} declared twice", tok.line, tok.column)
                declared[var.name] = var
                variables.append(var)
            elif tok.text == "probability":
                block_tok = tok
                prob = self._probability_block()
                if prob.target in seen_blocks:
                    raise BifSyntaxError(
                        f"duplicate probability block for {prob.target!r}",
                        block_tok.line,
                        block_tok.column,
                    )
                seen_blocks.add(prob.target)
                probabilities.append(prob)
            else:
                raise BifSyntaxError(f"unexpected token {tok.text!r}", tok.line, tok.column)
        doc = BifDocument(name, tuple(variables), tuple(probabilities))
        _validate(doc)
        return doc

    def _variable_block(self) -> BifVariable:
        name = self._word("variable name").text
        self._expect("{")
        states: tuple[str, ...] | None = None
        while True:
            tok = self._next("'type' or '}'")
            if tok.text == "}":
                break
            if tok.text == "property":
                self._skip_property()
                continue
            if tok.text != "type":
                raise BifSyntaxError(f"unexpected token {tok.text!r} in variable block", tok.line, tok.column)
            kind = self._word("'discrete'")
            if kind.text != "discrete":
                raise BifSyntaxError(f"unsupported variable type {kind.text!r}", kind.line, kind.column)
            self._expect("[")
            count_tok = self._word("state count")
            try:
                count = int(count_tok.text)
            except ValueError:
                raise BifSyntaxError(
                    f"expected integer state count, found {count_tok.text!r}",
                    count_tok.line,
                    count_tok.column,
                ) from None
            self._expect("]")
            self._expect("{")
            labels = [self._word("state label").text]
            while self._peek() is not None and self._peek().text == ",":
                self._next()
                labels.append(self._word("state label").text)
            self._expect("}")
            self._expect(";")
            if len(labels) != count:
                raise ArityMismatchError(
                    f"variable {name!r} declares {count} states but lists {len(labels)}"
                )
            states = tuple(labels)
        if states is None:
            raise BifSyntaxError(f"variable {name!r} lacks a type declaration", 0, 0)
        return BifVariable(name, states)

    def _probability_block(self) -> BifProbability:
        self._expect("(")
        target = self._word("target variable").text
        parents: list[str] = []
        tok = self._next("')' or '|'")
        if tok.text == "|":
            parents.append(self._word("parent name").text)
            while self._peek() is not None and self._peek().text == ",":
                self._next()
                parents.append(self._word("parent name").text)
            self._expect(")")
        elif tok.text != ")":
            raise BifSyntaxError(f"expected ')' or '|', found {tok.text!r}", tok.line, tok.column)
        self._expect("{")
        rows: dict[tuple[str, ...], tuple[float, ...]] = {}
        while True:
            tok = self._next("CPT row or '}'")
            if tok.text == "}":
                break
            if tok.text == "property":
                self._skip_property()
                continue
            if tok.text == "table":
                if parents:
                    raise BifSyntaxError(
                        "'table' rows are only supported for parentless variables",
                        tok.line,
                        tok.column,
                    )
                values = [self._number()]
                while self._peek() is not None and self._peek().text == ",":
                    self._next()
                    values.append(self._number())
                self._expect(";")
                if () in rows:
                    raise BifSyntaxError("duplicate 'table' row", tok.line, tok.column)
                rows[()] = tuple(values)
            elif tok.text == "(":
                combo = [self._word("parent state").text]
                while self._peek() is not None and self._peek().text == ",":
                    self._next()
                    combo.append(self._word("parent state").text)
                self._expect(")")
                values = [self._number()]
                while self._peek() is not None and self._peek().text == ",":
                    self._next()
                    values.append(self._number())
                self._expect(";")
                key = tuple(combo)
                if key in rows:
                    raise BifSyntaxError(
                        f"duplicate CPT row for parent states {key}", tok.line, tok.column
                    )
                rows[key] = tuple(values)
            else:
                raise BifSyntaxError(
                    f"unexpected token {tok.text!r} in probability block", tok.line, tok.column
                )
        return BifProbability(target, tuple(parents), rows)


def _parent_configs(parent_states: list[tuple[str, ...]]):
    """All parent-state tuples in row order: last declared parent fastest."""
    configs: list[tuple[str, ...]] = [()]
    for states in parent_states:
        configs = [c + (s,) for c in configs for s in states]
    return configs


def _validate(doc: BifDocument) -> None:
    declared = {v.name: v for v in doc.variables}
    targets = set()
    for prob in doc.probabilities:
        if prob.target not in declared:
            raise UndeclaredVariableError(f"probability block for undeclared {prob.target!r}")
        targets.add(prob.target)
        r = len(declared[prob.target].states)
        for parent in prob.parents:
            if parent not in declared:
                raise UndeclaredVariableError(
                    f"undeclared parent {parent!r} of {prob.target!r}"
                )
        parent_states = [declared[p].states for p in prob.parents]
        for combo, values in prob.rows.items():
            if len(combo) != len(prob.parents):
                raise ArityMismatchError(
                    f"{prob.target!r}: row key {combo} does not match {len(prob.parents)} parents"
                )
            for p, s in zip(prob.parents, combo):
                if s not in declared[p].states:
                    raise UnknownStateError(f"{s!r} is not a state of parent {p!r}")
            if len(values) != r:
                raise ArityMismatchError(
                    f"{prob.target!r}: row {combo} has {len(values)} entries, expected {r}"
                )
        for combo in _parent_configs(parent_states):
            if combo not in prob.rows:
                raise MissingRowError(
                    f"{prob.target!r}: no CPT row for parent states {combo}"
                )
    for name in declared:
        if name not in targets:
            raise MissingRowError(f"variable {name!r} has no probability block")


def parse_bif(text: str) -> BifDocument:
    """Parse BIF text into a validated document."""
    return _Parser(_tokenize(text)).parse()


def load_bif(path: str | Path) -> BifDocument:
    """Read a .bif or .bif.gz file and parse it."""
    path = Path(path)
    if path.suffix == ".gz":
        text = gzip.decompress(path.read_bytes()).decode("utf-8")
    else:
        text = path.read_text(encoding="utf-8")
    return parse_bif(text)


def to_bn(doc: BifDocument) -> DiscreteBn:
    """Materialize a document as a discrete Bayesian network.

    Edges run parent -> target for every probability block; the declared
    parent order is kept as the CPT row index order (last parent fastest).
    Rows whose sum strays more than 1e-6 from 1 are rejected outright.
    """
    declared = {v.name: v for v in doc.variables}
    edges = []
    for prob in doc.probabilities:
        for parent in prob.parents:
            edges.append((parent, prob.target))
    dag = Dag(declared.keys(), edges)
    schema = Schema(
        dag.vertices, tuple(declared[name].states for name in dag.vertices)
    )
    blocks = {p.target: p for p in doc.probabilities}
    cpts = []
    parent_order = []
    for name in dag.vertices:
        prob = blocks[name]
        r = len(declared[name].states)
        parent_states = [declared[p].states for p in prob.parents]
        configs = _parent_configs(parent_states)
        table = np.empty((len(configs), r), dtype=np.float64)
        for row_idx, combo in enumerate(configs):
            try:
                values = prob.rows[combo]
            except KeyError:
                raise MissingRowError(
                    f"{name!r}: no CPT row for parent states {combo}"
                ) from None
            table[row_idx] = values
        sums = table.sum(axis=1)
        if np.any(table < 0) or np.any(np.abs(sums - 1.0) > 1e-6):
            bad = int(np.argmax(np.abs(sums - 1.0)))
            raise RowNotNormalizedError(
                f"{name!r}: CPT row {bad} sums to {sums[bad]!r}"
            )
        cpts.append(table)
        parent_order.append(prob.parents)
    return DiscreteBn(dag, schema, tuple(cpts), tuple(parent_order))
