"""Minimal S-expression reader/writer shared by the model, trace and SMT layers."""

from __future__ import annotations

from dataclasses import dataclass


class SexprError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Sym:
    """A symbol with the source position it was read from."""

    name: str
    line: int = 0
    col: int = 0

    def __str__(self) -> str:
        return self.name


class SList(list):
    line = 0
    col = 0


def _tokens(text: str):
    i, n = 0, len(text)
    line, col0 = 1, 0
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col0 = i + 1
            i += 1
        elif ch.isspace():
            i += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch in "()":
            yield ch, line, i - col0 + 1
            i += 1
        elif ch == "|":
            j = text.find("|", i + 1)
            if j < 0:
                raise SexprError("unterminated |symbol|", line, i - col0 + 1)
            yield Sym(text[i + 1 : j], line, i - col0 + 1), line, i - col0 + 1
            line += text.count("\n", i, j)
            i = j + 1
        elif ch == '"':
            j = i + 1
            while j < n and not (text[j] == '"' and text[j + 1 : j + 2] != '"'):
                j += 2 if text[j] == '"' else 1
            yield Sym(text[i : j + 1], line, i - col0 + 1), line, i - col0 + 1
            line += text.count("\n", i, j)
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "();|":
                j += 1
            yield Sym(text[i:j], line, i - col0 + 1), line, i - col0 + 1
            i = j


def parse_all(text: str) -> list:
    """Parse every top-level expression in ``text``."""
    stack: list[SList] = [SList()]
    for tok, line, col in _tokens(text):
        if tok == "(":
            lst = SList()
            lst.line, lst.col = line, col
            stack.append(lst)
        elif tok == ")":
            if len(stack) == 1:
                raise SexprError("unbalanced ')'", line, col)
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    if len(stack) != 1:
        raise SexprError("unbalanced '('", stack[-1].line, stack[-1].col)
    return list(stack[0])


def parse_one(text: str):
    exprs = parse_all(text)
    if len(exprs) != 1:
        raise SexprError(f"expected one expression, got {len(exprs)}")
    return exprs[0]


def balanced(text: str) -> bool:
    """True once ``text`` holds at least one complete expression (used for pipe reads)."""
    depth = 0
    seen = False
    in_bar = False
    for ch in text:
        if in_bar:
            in_bar = ch != "|"
        elif ch == "|":
            in_bar = True
        elif ch == "(":
            depth += 1
            seen = True
        elif ch == ")":
            depth -= 1
    if in_bar:
        return False
    if not seen:
        return bool(text.strip())
    return depth == 0


def dumps(expr) -> str:
    if isinstance(expr, list):
        return "(" + " ".join(dumps(e) for e in expr) + ")"
    return str(expr)
