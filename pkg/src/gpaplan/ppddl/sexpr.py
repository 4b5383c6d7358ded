"""Tokenizer and reader for PDDL-style s-expressions."""

from __future__ import annotations

from dataclasses import dataclass, field


class PPDDLError(Exception):
    """Base class for everything the PPDDL front end raises."""


class PPDDLSyntaxError(PPDDLError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{msg} (line {line}, column {col})")
        self.line = line
        self.col = col


@dataclass
class SList:
    """A parenthesised list; remembers where it opened for error reporting."""

    items: list = field(default_factory=list)
    line: int = 0
    col: int = 0

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items)

    def __getitem__(self, i):
        return self.items[i]

    @property
    def head(self):
        if self.items and isinstance(self.items[0], Sym):
            return self.items[0].lower
        return None


@dataclass(frozen=True)
class Sym:
    text: str
    line: int = 0
    col: int = 0

    @property
    def lower(self) -> str:
        return self.text.lower()

    def __str__(self) -> str:
        return self.text


def tokenize(text: str):
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch in "()":
            yield ch, line, col
            i += 1
            col += 1
            continue
        start, start_col = i, col
        while i < n and not text[i].isspace() and text[i] not in "();":
            i += 1
            col += 1
        yield text[start:i], line, start_col


def read(text: str) -> SList:
    """Read exactly one top-level s-expression from ``text``."""
    stack: list[SList] = []
    result = None
    for tok, line, col in tokenize(text):
        if tok == "(":
            stack.append(SList([], line, col))
        elif tok == ")":
            if not stack:
                raise PPDDLSyntaxError("unbalanced ')'", line, col)
            done = stack.pop()
            if stack:
                stack[-1].items.append(done)
            elif result is None:
                result = done
            else:
                raise PPDDLSyntaxError("more than one top-level expression", line, col)
        else:
            if not stack:
                raise PPDDLSyntaxError(f"unexpected token {tok!r} outside parentheses", line, col)
            stack[-1].items.append(Sym(tok, line, col))
    if stack:
        open_ = stack[-1]
        raise PPDDLSyntaxError("unclosed '('", open_.line, open_.col)
    if result is None:
        raise PPDDLSyntaxError("empty input", 1, 1)
    return result
