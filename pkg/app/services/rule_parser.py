"""Rule files and the entry grammar.

    expr  := term (('+' | '-') term)*
    term  := coeff | coeff '*' zpow | zpow
    zpow  := 'Z' | 'Z' '^' int
    coeff := nonneg-int
    int   := ('-')? nonneg-int

Whitespace is insignificant, coefficients are reduced mod p and '-' is the
additive inverse mod p.
"""
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import ValidationError

from app.schemas import RuleSpec
from app.services.algebra import LaurentMatrix, LaurentPoly, PrimeField, PrimeFieldElem, check_prime
from app.services.automaton import Rule, companion
from app.services.errors import RuleParseError, RuleSpecError
from app.services.input_validator import validate_rule_spec

logger = logging.getLogger(__name__)

_SYMBOLS = {"+", "-", "*", "^"}


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "Z", one of _SYMBOLS, or "end"
    text: str
    line: int
    column: int


def tokenize(text: str, where: Optional[str] = None) -> List[Token]:
    """Split an entry into tokens with 1-based line/column positions."""
    tokens: List[Token] = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line, col = line + 1, 1
            i += 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            tokens.append(Token("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch == "Z" or ch in _SYMBOLS:
            tokens.append(Token(ch, ch, line, col))
        else:
            raise RuleParseError("unexpected character", line, col, ch, where)
        i += 1
        col += 1
    tokens.append(Token("end", "<end>", line, col))
    return tokens


class _EntryParser:
    """Recursive-descent parser over a token list."""

    def __init__(self, text: str, p: int, where: Optional[str]):
        self.field = PrimeField(p)
        self.where = where
        self.tokens = tokenize(text, where)
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def take(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "end":
            self.pos += 1
        return tok

    def fail(self, message: str, tok: Optional[Token] = None):
        tok = tok or self.peek()
        raise RuleParseError(message, tok.line, tok.column, tok.text, self.where)

    def expect(self, kind: str, message: str) -> Token:
        if self.peek().kind != kind:
            self.fail(message)
        return self.take()

    def expr(self) -> Dict[int, PrimeFieldElem]:
        terms: Dict[int, PrimeFieldElem] = {}
        sign = 1
        while True:
            e, c = self.term()
            terms[e] = terms.get(e, self.field(0)) + sign * c
            tok = self.peek()
            if tok.kind == "end":
                return terms
            if tok.kind not in ("+", "-"):
                self.fail("expected '+' or '-'")
            sign = 1 if self.take().kind == "+" else -1

    def term(self):
        tok = self.peek()
        if tok.kind == "int":
            coeff = int(self.take().text)
            if self.peek().kind != "*":
                return 0, coeff
            self.take()
            return self.zpow(), coeff
        if tok.kind == "Z":
            return self.zpow(), 1
        self.fail("expected a coefficient or Z")

    def zpow(self) -> int:
        self.expect("Z", "expected Z")
        if self.peek().kind != "^":
            return 1
        self.take()
        negative = False
        if self.peek().kind == "-":
            self.take()
            negative = True
        exponent = int(self.expect("int", "expected an integer exponent").text)
        return -exponent if negative else exponent


def parse_entry(text: str, p: int, where: Optional[str] = None) -> LaurentPoly:
    """
    Parse one matrix entry into a Laurent polynomial over F_p.

    Raises:
        RuleParseError: on a syntax error, with line, column and token
    """
    check_prime(p)
    terms = _EntryParser(text, p, where).expr()
    return LaurentPoly.from_terms(p, {e: int(c) for e, c in terms.items()})


def parse_matrix(grid: List[List[str]], p: int, where: str = "entries") -> LaurentMatrix:
    rows = [
        [parse_entry(cell, p, f"{where}[{i}][{j}]") for j, cell in enumerate(row)]
        for i, row in enumerate(grid)
    ]
    return LaurentMatrix.from_rows(p, rows)


def parse_rule_spec(text: str, where: str = "rule file") -> RuleSpec:
    """
    Decode, validate and type a rule file.

    Raises:
        RuleParseError: if the document is not valid JSON
        RuleSpecError: if fields are missing or malformed
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        token = text[e.pos:e.pos + 1] or "<end>"
        raise RuleParseError(e.msg, e.lineno, e.colno, token, where) from e
    return spec_from_dict(raw, where)


def spec_from_dict(raw: Any, where: str = "rule file") -> RuleSpec:
    validation = validate_rule_spec(raw)
    if not validation.ok:
        messages = [f"missing field: {m}" for m in validation.missing] + validation.errors
        raise RuleSpecError(f"{where}: " + "; ".join(messages))
    try:
        spec = RuleSpec(**raw)
    except ValidationError as e:
        raise RuleSpecError(f"{where}: {e}") from e
    build_rule(spec)
    return spec


def load_rule_file(path: Union[str, Path]) -> RuleSpec:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise RuleSpecError(f"cannot read rule file {path}: {e}") from e
    return parse_rule_spec(text, where=str(path))


def spec_blocks(spec: RuleSpec) -> List[LaurentMatrix]:
    if not spec.blocks:
        raise RuleSpecError("rule file has no blocks")
    return [parse_matrix(grid, spec.p, f"blocks[{k}]") for k, grid in enumerate(spec.blocks)]


def build_rule(spec: RuleSpec) -> Rule:
    """The rule described by entries, or the companion rule of blocks."""
    if spec.entries is not None:
        return Rule(parse_matrix(spec.entries, spec.p))
    return companion(spec_blocks(spec))


def format_rule(rule: Rule) -> List[List[str]]:
    """Entry strings that parse back to the same rule."""
    return rule.matrix.to_strings()
